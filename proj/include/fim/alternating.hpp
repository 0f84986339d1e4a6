// SPDX-License-Identifier: Apache-2.0
//
// fimsim: beamforming and surface-shape optimization for flexible metasurface arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FIM_ALTERNATING_HPP
#define FIM_ALTERNATING_HPP

#include "fim/beamforming.hpp"
#include "fim/channel.hpp"
#include "fim/morphing.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fim {

// How the shape is updated between beamformer solves.
enum class ShapeUpdate
{
    // One projected-gradient step per outer iteration along -grad P(y), the dual-weighted
    // margin gradient of the current beamformers; trial shapes are scored by re-solving the
    // beamformer and the step length carries over between iterations.
    power_descent,
    // Margin ascent at fixed beamformers (morph_ascent): total margin, every user kept feasible.
    margin_ascent
};

inline const char *to_string(ShapeUpdate u) { return u == ShapeUpdate::power_descent ? "power_descent" : "margin_ascent"; }

struct AoConfig
{
    int max_outer_iters = 100;
    double convergence_db = -30.0; // stop once the fractional power decrease falls below this
    BeamformerKind beamformer = BeamformerKind::mmse;
    MorphConfig morph;
    bool morph_enabled = true;
    ShapeUpdate shape_update = ShapeUpdate::power_descent;
    MmseOptions mmse;

    void validate() const
    {
        if (max_outer_iters < 1)
            throw std::invalid_argument("AoConfig: max_outer_iters must be at least 1.");
        morph.validate();
    }
};

// Beamformer infeasibility raised inside the alternating loop, tagged with the outer iteration.
class OptimizationError : public InfeasibleError
{
public:
    OptimizationError(const InfeasibleError &cause, int outer_iteration)
        : InfeasibleError("outer iteration " + std::to_string(outer_iteration) + ": " + cause.what(),
                          cause.condition_number(), cause.iterations()),
          outer_iteration_(outer_iteration)
    {
    }

    int outer_iteration() const { return outer_iteration_; }

private:
    int outer_iteration_;
};

struct OuterIteration
{
    double power = 0.0; // watts, beamformers solved at `shape`
    RVector shape;
    MarginReport margins; // those beamformers' margins at the next shape (or at `shape` for the last entry)
    int fixed_point_iterations = 0;
    int morph_steps = 0; // accepted ascent steps (margin_ascent) or trial shapes scored (power_descent)
};

struct OptimizationTrace
{
    std::vector<OuterIteration> iterations;
    BeamformingSolution solution;
    SurfaceShape shape{RVector(), 0.0};
    bool converged = false;

    int iterations_used() const { return static_cast<int>(iterations.size()); }
    double final_power() const { return solution.total_power; }
};

namespace detail {

class AlternatingRun
{
public:
    AlternatingRun(const ScatteringEnvironment &env, const FimGeometry &geom, const LinkBudget &link,
                   std::span<const double> targets, const AoConfig &cfg)
        : env_(env), geom_(geom), noise_(link.noise_powers), targets_(targets), cfg_(cfg)
    {
    }

    BeamformingSolution solve(const SurfaceShape &shape, int outer) const
    {
        try
        {
            return solve_beamformer(cfg_.beamformer, channel_matrix(env_, geom_, shape), noise_, targets_, cfg_.mmse);
        }
        catch (const InfeasibleError &e)
        {
            throw OptimizationError(e, outer);
        }
    }

    MarginReport margins(const SurfaceShape &shape, const CMatrix &W) const
    {
        return sinr_margins(channel_matrix(env_, geom_, shape), W, noise_, targets_);
    }

    // Commits the current iterate to the trace, with its beamformers' margins at `at`.
    void record(OptimizationTrace &trace, const SurfaceShape &at, int morph_steps) const
    {
        trace.iterations.push_back({trace.solution.total_power, trace.shape.y(), margins(at, trace.solution.W),
                                    trace.solution.fixed_point_iterations, morph_steps});
    }

    const ScatteringEnvironment &env_;
    const FimGeometry &geom_;
    std::span<const double> noise_;
    std::span<const double> targets_;
    const AoConfig &cfg_;
};

inline void run_margin_ascent(const AlternatingRun &run, OptimizationTrace &trace, double threshold)
{
    const AoConfig &cfg = run.cfg_;
    for (int outer = 1;; ++outer)
    {
        if (outer == cfg.max_outer_iters)
        {
            run.record(trace, trace.shape, 0);
            return;
        }
        MorphResult morphed =
            morph_ascent(run.env_, run.geom_, trace.shape, trace.solution.W, run.noise_, run.targets_, cfg.morph);
        const int steps = static_cast<int>(morphed.steps.size());
        if (steps == 0)
        {
            run.record(trace, trace.shape, 0);
            trace.converged = true;
            return;
        }
        BeamformingSolution next = run.solve(morphed.shape, outer + 1);
        const double previous = trace.solution.total_power;
        if (next.total_power > previous)
        {
            // only possible for zf, whose re-solve is not the optimum over the enlarged feasible set
            run.record(trace, trace.shape, steps);
            trace.converged = true;
            return;
        }
        run.record(trace, morphed.shape, steps);
        trace.shape = std::move(morphed.shape);
        trace.solution = std::move(next);
        if ((previous - trace.solution.total_power) / previous < threshold)
        {
            run.record(trace, trace.shape, 0);
            trace.converged = true;
            return;
        }
    }
}

inline void run_power_descent(const AlternatingRun &run, OptimizationTrace &trace, double threshold)
{
    const AoConfig &cfg = run.cfg_;
    const MorphConfig &mc = cfg.morph;
    const double y_max = trace.shape.y_max();
    double step = mc.initial_step_wavelengths * run.geom_.wavelength();

    for (int outer = 1;; ++outer)
    {
        if (outer == cfg.max_outer_iters)
        {
            run.record(trace, trace.shape, 0);
            return;
        }

        const RVector ascent =
            -power_gradient(run.env_, run.geom_, trace.shape, trace.solution, run.noise_, run.targets_);
        const double gmax = projected_gradient(ascent, trace.shape).lpNorm<Eigen::Infinity>();
        if (!(gmax > mc.grad_tol))
        {
            run.record(trace, trace.shape, 0);
            trace.converged = true;
            return;
        }

        const double current = trace.solution.total_power;
        int trials = 0;
        auto attempt = [&](double mu, std::optional<SurfaceShape> &shape, std::optional<BeamformingSolution> &sol) {
            SurfaceShape cand = SurfaceShape::projected(trace.shape.y() + mu * ascent, y_max);
            const RVector delta = cand.y() - trace.shape.y();
            if (delta.lpNorm<Eigen::Infinity>() == 0.0)
                return false;
            ++trials;
            BeamformingSolution s;
            try
            {
                s = run.solve(cand, outer + 1);
            }
            catch (const InfeasibleError &)
            {
                return false; // an ill-conditioned trial shape is just a rejected step
            }
            const double bound = (shape ? sol->total_power : current - mc.armijo_constant * ascent.dot(delta));
            if (!(s.total_power < bound) || !(s.total_power < current))
                return false;
            shape = std::move(cand);
            sol = std::move(s);
            return true;
        };

        std::optional<SurfaceShape> best_shape;
        std::optional<BeamformingSolution> best_sol;
        double mu = step / gmax;
        for (int b = 0; b <= mc.max_backtracks; ++b, mu *= mc.backtrack_factor)
        {
            if (attempt(mu, best_shape, best_sol))
            {
                if (b == 0)
                    for (int e = 0; e < mc.max_expansions && attempt(2.0 * mu, best_shape, best_sol); ++e)
                        mu *= 2.0;
                break;
            }
        }
        if (!best_shape)
        {
            run.record(trace, trace.shape, trials);
            trace.converged = true;
            return;
        }

        step = mu * gmax;
        run.record(trace, *best_shape, trials);
        trace.shape = std::move(*best_shape);
        trace.solution = std::move(*best_sol);
        if ((current - trace.solution.total_power) / current < threshold)
        {
            run.record(trace, trace.shape, 0);
            trace.converged = true;
            return;
        }
    }
}

} // namespace detail

// Alternates the beamformer solve at a fixed shape with a shape update driven by that
// beamformer's SINR margins, starting from the flat surface. The reported solution is always the
// beamformer solved at the reported shape and the power sequence never increases.
// Stops when the fractional power decrease drops below 10^(convergence_db / 10), when the shape
// update makes no progress, or after max_outer_iters beamformer solves.
inline OptimizationTrace optimize(const ScatteringEnvironment &env, const FimGeometry &geom, const LinkBudget &link,
                                  std::span<const double> targets, double morphing_range, const AoConfig &cfg)
{
    cfg.validate();
    if (static_cast<int>(targets.size()) != env.users() || link.users() != env.users())
        throw std::invalid_argument("optimize: user count differs between targets, link budget and environment.");
    const detail::AlternatingRun run(env, geom, link, targets, cfg);

    OptimizationTrace trace;
    trace.shape = SurfaceShape::flat(geom.size(), morphing_range);
    trace.solution = run.solve(trace.shape, 1);

    if (!cfg.morph_enabled)
    {
        run.record(trace, trace.shape, 0);
        trace.converged = true;
        return trace;
    }

    const double threshold = db_to_linear(cfg.convergence_db);
    if (cfg.shape_update == ShapeUpdate::margin_ascent)
        detail::run_margin_ascent(run, trace, threshold);
    else
        detail::run_power_descent(run, trace, threshold);
    return trace;
}

} // namespace fim

#endif
