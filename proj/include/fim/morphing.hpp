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

#ifndef FIM_MORPHING_HPP
#define FIM_MORPHING_HPP

#include "fim/beamforming.hpp"
#include "fim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace fim {

struct MorphConfig
{
    // The first trial step moves the coordinate with the steepest projected slope by this many wavelengths.
    double initial_step_wavelengths = 0.1;
    double backtrack_factor = 0.5;
    double armijo_constant = 1e-4;
    int max_backtracks = 30;
    int max_ascent_iters = 50;
    double grad_tol = 1e-8;
    // Step growth attempts (doubling) after an immediately accepted trial step; power descent only.
    int max_expansions = 10;

    void validate() const
    {
        if (!(initial_step_wavelengths > 0.0))
            throw std::invalid_argument("MorphConfig: initial_step_wavelengths must be positive.");
        if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
            throw std::invalid_argument("MorphConfig: backtrack_factor must lie in (0, 1).");
        if (!(armijo_constant > 0.0 && armijo_constant < 1.0))
            throw std::invalid_argument("MorphConfig: armijo_constant must lie in (0, 1).");
        if (max_backtracks < 0 || max_ascent_iters < 0 || max_expansions < 0)
            throw std::invalid_argument("MorphConfig: iteration budgets must be non-negative.");
        if (!(grad_tol >= 0.0))
            throw std::invalid_argument("MorphConfig: grad_tol must be non-negative.");
    }
};

// Residual SINR margins. A shape keeps the current beamformers feasible iff every margin is >= 0.
struct MarginReport
{
    RVector margins;
    double total = 0.0;
    double objective = 0.0; // weighted sum driven by the ascent; equals total for unit weights

    double min() const { return margins.size() ? margins.minCoeff() : 0.0; }
};

// eps_k = |h_k^H w_k|^2 / (gamma_k sigma_k^2) - sum_{k' != k} |h_k^H w_k'|^2 / sigma_k^2 - 1
inline MarginReport sinr_margins(const CMatrix &H, const CMatrix &W, std::span<const double> noise,
                                 std::span<const double> targets)
{
    const SinrReport r = sinr_report(H, W, noise);
    if (static_cast<Eigen::Index>(targets.size()) != H.cols())
        throw std::invalid_argument("sinr_margins: target count does not match the number of users.");
    MarginReport m;
    m.margins.resize(H.cols());
    for (Eigen::Index k = 0; k < H.cols(); ++k)
    {
        const double s2 = noise[static_cast<size_t>(k)];
        m.margins[k] = r.signal[k] / (targets[static_cast<size_t>(k)] * s2) - r.interference[k] / s2 - 1.0;
    }
    m.total = m.margins.sum();
    m.objective = m.total;
    return m;
}

namespace detail {

// Assembles g_n = -2 kappa sum_{k,l} s_kl Im{ alpha_kl a_kl,n B(k, n) }, the common shape-derivative
// pattern of every quadratic form in h_k(y).
inline RVector path_phase_gradient(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape,
                                   const CMatrix &B)
{
    RVector g = RVector::Zero(geom.size());
    for (int k = 0; k < env.users(); ++k)
        for (int l = 0; l < env.paths(); ++l)
        {
            const PathAngles &dir = env.angle(k, l);
            const double s = dir.y_projection();
            const CVector a = steering_vector(geom, shape, dir);
            const cplx alpha = env.gains(k, l);
            for (int n = 0; n < geom.size(); ++n)
                g[n] += s * (alpha * a[n] * B(k, n)).imag();
        }
    return -2.0 * geom.wavenumber() * g;
}

} // namespace detail

// Bundles everything that stays fixed while the surface moves.
class MarginObjective
{
public:
    MarginObjective(const ScatteringEnvironment &env, const FimGeometry &geom, const CMatrix &W,
                    std::span<const double> noise, std::span<const double> targets, RVector weights = RVector())
        : env_(env), geom_(geom), W_(W), noise_(noise.begin(), noise.end()), targets_(targets.begin(), targets.end()),
          weights_(weights.size() ? std::move(weights) : RVector::Ones(W.cols()))
    {
        const auto K = static_cast<Eigen::Index>(env.users());
        if (W.rows() != geom.size() || W.cols() != K || static_cast<Eigen::Index>(noise.size()) != K ||
            static_cast<Eigen::Index>(targets.size()) != K)
            throw std::invalid_argument("margin objective: dimension mismatch between channel, beamformers and "
                                        "targets.");
        env.check();
    }

    MarginReport margins(const SurfaceShape &shape) const
    {
        MarginReport m = sinr_margins(channel_matrix(env_, geom_, shape), W_, noise_, targets_);
        m.objective = weights_.dot(m.margins);
        return m;
    }

    // d eps / d y_n. With c_kj = h_k^H w_j the per-term derivative is
    //     d|c_kj|^2 / dy_n = -2 kappa sum_l s_kl Im{ alpha_kl a_kl,n conj(w_jn) c_kj },  s = sin(el) sin(az),
    // summed with weight 1/(gamma_k sigma_k^2) for j == k and -1/sigma_k^2 otherwise.
    RVector gradient(const SurfaceShape &shape) const
    {
        check_shape(geom_, shape);
        const Eigen::Index K = W_.cols();
        const CMatrix H = channel_matrix(env_, geom_, shape);
        CMatrix C = H.adjoint() * W_; // K x K
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double s2 = noise_[static_cast<size_t>(k)];
            for (Eigen::Index j = 0; j < K; ++j)
                C(k, j) *= weights_[k] * ((k == j) ? 1.0 / (targets_[static_cast<size_t>(k)] * s2) : -1.0 / s2);
        }
        // B(k, n) = sum_j weight_kj c_kj conj(w_jn)
        const CMatrix B = C * W_.adjoint();
        return detail::path_phase_gradient(env_, geom_, shape, B);
    }

    const FimGeometry &geometry() const { return geom_; }

private:
    const ScatteringEnvironment &env_;
    const FimGeometry &geom_;
    CMatrix W_;
    std::vector<double> noise_;
    std::vector<double> targets_;
    RVector weights_;
};

inline RVector margin_gradient(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape,
                               const CMatrix &W, std::span<const double> noise, std::span<const double> targets)
{
    return MarginObjective(env, geom, W, noise, targets).gradient(shape);
}

// Gradient with the components that push against an active bound removed.
inline RVector projected_gradient(const RVector &g, const SurfaceShape &shape)
{
    RVector pg = g;
    for (Eigen::Index n = 0; n < g.size(); ++n)
    {
        const double y = shape.y()[n];
        if ((y <= 0.0 && g[n] < 0.0) || (y >= shape.y_max() && g[n] > 0.0))
            pg[n] = 0.0;
    }
    return pg;
}

struct MorphStep
{
    double total_margin = 0.0; // after the accepted step
    double min_margin = 0.0;
    double step = 0.0;         // accepted mu
    int backtracks = 0;
};

struct MorphResult
{
    SurfaceShape shape;
    MarginReport margins;
    std::vector<MorphStep> steps;
};

// Projected gradient ascent on the total margin with backtracking. A candidate
// clamp(y + mu * grad) is accepted when it gives an Armijo increase measured on the projected
// step, grad . (y_new - y) * armijo_constant, and no user's margin drops below
// min(0, min_k eps_k(shape0)). Stops on a small projected gradient, a failed line search or
// the iteration budget. The returned shape never has a lower total margin than shape0.
inline MorphResult morph_ascent(const MarginObjective &obj, const SurfaceShape &shape0, const MorphConfig &cfg)
{
    cfg.validate();
    MorphResult res{shape0, obj.margins(shape0), {}};
    const double floor = std::min(0.0, res.margins.min());
    if (res.margins.min() < -1e-9 || shape0.y_max() <= 0.0)
        return res;

    const double lambda = obj.geometry().wavelength();
    for (int it = 0; it < cfg.max_ascent_iters; ++it)
    {
        const RVector g = obj.gradient(res.shape);
        const RVector pg = projected_gradient(g, res.shape);
        const double gmax = pg.lpNorm<Eigen::Infinity>();
        if (!(gmax > cfg.grad_tol))
            break;

        double mu = cfg.initial_step_wavelengths * lambda / gmax;
        bool accepted = false;
        for (int b = 0; b <= cfg.max_backtracks; ++b, mu *= cfg.backtrack_factor)
        {
            SurfaceShape cand = SurfaceShape::projected(res.shape.y() + mu * g, res.shape.y_max());
            const RVector delta = cand.y() - res.shape.y();
            if (delta.lpNorm<Eigen::Infinity>() == 0.0)
                break;
            MarginReport m = obj.margins(cand);
            const double required = res.margins.objective + cfg.armijo_constant * g.dot(delta);
            if (m.objective > res.margins.objective && m.objective >= required && m.min() >= floor)
            {
                res.shape = std::move(cand);
                res.margins = std::move(m);
                res.steps.push_back({res.margins.total, res.margins.min(), mu, b});
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
    }
    return res;
}

inline MorphResult morph_ascent(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape0,
                                const CMatrix &W, std::span<const double> noise, std::span<const double> targets,
                                const MorphConfig &cfg = {})
{
    return morph_ascent(MarginObjective(env, geom, W, noise, targets), shape0, cfg);
}

// Weights nu_k = sigma_k^2 [M^{-T} 1]_k, where M is the SINR coupling matrix of the solution's
// directions at H. Re-scaling the powers along fixed directions to meet every target costs
// 1^T M^{-1} sigma^2, whose shape gradient is -sum_k nu_k grad eps_k; for the MMSE solution this is
// also the gradient of the optimal power since the directions are stationary.
inline RVector dual_margin_weights(const CMatrix &H, const BeamformingSolution &sol, std::span<const double> noise,
                                   std::span<const double> targets)
{
    const RMatrix M = detail::power_coupling_matrix(H, sol.directions, targets);
    RVector nu = M.transpose().partialPivLu().solve(RVector::Ones(M.rows()));
    for (Eigen::Index k = 0; k < nu.size(); ++k)
        nu[k] *= noise[static_cast<size_t>(k)];
    return nu;
}

// Shape gradient of the power the given beamformer kind needs at `shape`.
//   mmse: -sum_k nu_k grad eps_k (see dual_margin_weights)
//   zf:   P = sum_k c_k [(H^H H)^{-1}]_kk with c_k = gamma_k sigma_k^2, differentiated through H(y);
//         with P+ = H (H^H H)^{-1} and Z = P+ diag(c) P+^H P+ the result has the same path-phase form.
inline RVector power_gradient(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape,
                              const BeamformingSolution &sol, std::span<const double> noise,
                              std::span<const double> targets)
{
    if (sol.method == BeamformerKind::mmse)
    {
        const CMatrix H = channel_matrix(env, geom, shape);
        return -MarginObjective(env, geom, sol.W, noise, targets, dual_margin_weights(H, sol, noise, targets))
                    .gradient(shape);
    }
    const CMatrix H = channel_matrix(env, geom, shape);
    const CMatrix pinv_h = (H.adjoint() * H).llt().solve(H.adjoint()); // (P+)^H
    RVector c(H.cols());
    for (Eigen::Index k = 0; k < c.size(); ++k)
        c[k] = targets[static_cast<size_t>(k)] * noise[static_cast<size_t>(k)];
    const CMatrix Z = pinv_h.adjoint() * c.cast<cplx>().asDiagonal() * (pinv_h * pinv_h.adjoint());
    const CMatrix B = -Z.adjoint(); // B(k, n) = -conj(Z_nk)
    return detail::path_phase_gradient(env, geom, shape, B);
}

} // namespace fim

#endif
