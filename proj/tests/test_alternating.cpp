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

#include "support.hpp"

#include <gtest/gtest.h>

using namespace fim;
using fim::test::kLambda;

namespace {

OptimizationTrace run(const fim::test::Scenario &sc, double zeta, BeamformerKind kind, bool morph = true,
                      ShapeUpdate update = ShapeUpdate::power_descent)
{
    AoConfig cfg;
    cfg.beamformer = kind;
    cfg.morph_enabled = morph;
    cfg.shape_update = update;
    return optimize(sc.env, sc.geom, sc.link, sc.targets, zeta * kLambda, cfg);
}

} // namespace

TEST(Alternating, RigidBaselineIsOneSolve)
{
    const auto sc = fim::test::default_scenario(1, 2, 2, 8);
    for (auto kind : {BeamformerKind::mmse, BeamformerKind::zf})
    {
        const auto t = run(sc, 1.0, kind, false);
        ASSERT_EQ(t.iterations_used(), 1);
        EXPECT_TRUE(t.converged);
        const auto s = solve_beamformer(kind, channel_matrix(sc.env, sc.geom, SurfaceShape::flat(4, 0.0)),
                                        sc.link.noise_powers, sc.targets);
        EXPECT_EQ(t.final_power(), s.total_power);
        EXPECT_EQ(t.shape.y(), RVector::Zero(4));
    }
}

TEST(Alternating, ZeroMorphingRangeReproducesTheRigidBaseline)
{
    for (std::uint64_t seed : {2u, 3u, 4u})
    {
        const auto sc = fim::test::default_scenario(seed, 2, 2, 8);
        for (auto kind : {BeamformerKind::mmse, BeamformerKind::zf})
            for (auto update : {ShapeUpdate::power_descent, ShapeUpdate::margin_ascent})
            {
                const auto rigid = run(sc, 0.0, kind, false);
                const auto fim = run(sc, 0.0, kind, true, update);
                EXPECT_EQ(fim.final_power(), rigid.final_power());
                EXPECT_EQ(fim.shape.y(), rigid.shape.y());
            }
    }
}

TEST(Alternating, PowerTraceNeverIncreasesAndBeatsTheRigidArray)
{
    for (std::uint64_t seed = 1; seed <= 15; ++seed)
    {
        const auto sc = fim::test::default_scenario(seed, 2, 2, 4);
        for (auto kind : {BeamformerKind::mmse, BeamformerKind::zf})
            for (auto update : {ShapeUpdate::power_descent, ShapeUpdate::margin_ascent})
            {
                const auto t = run(sc, 1.0, kind, true, update);
                const auto rigid = run(sc, 1.0, kind, false);
                for (size_t i = 1; i < t.iterations.size(); ++i)
                    EXPECT_LE(t.iterations[i].power, t.iterations[i - 1].power * (1 + 1e-9));
                EXPECT_LE(t.final_power(), rigid.final_power() * (1 + 1e-9));
                EXPECT_EQ(t.iterations.front().power, rigid.final_power());
                EXPECT_EQ(t.iterations.back().power, t.final_power());
                EXPECT_GT(t.final_power(), 0.0);
                EXPECT_LE(t.iterations_used(), AoConfig{}.max_outer_iters);
                EXPECT_GE(t.shape.y().minCoeff(), 0.0);
                EXPECT_LE(t.shape.y().maxCoeff(), kLambda);
                // the reported solution is optimal for the reported shape
                const auto check = solve_beamformer(kind, channel_matrix(sc.env, sc.geom, t.shape),
                                                    sc.link.noise_powers, sc.targets);
                EXPECT_NEAR(check.total_power / t.final_power(), 1.0, 1e-9);
            }
    }
}

TEST(Alternating, MorphedElementsCanReachTheUpperBound)
{
    int saturated = 0, converged = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const auto sc = fim::test::default_scenario(seed, 2, 2, 4);
        const auto t = run(sc, 0.5, BeamformerKind::mmse);
        converged += t.converged;
        for (Eigen::Index n = 0; n < 4; ++n)
            if (t.shape.y()[n] == 0.5 * kLambda)
            {
                ++saturated;
                break;
            }
    }
    EXPECT_GT(saturated, 0);
    EXPECT_EQ(converged, 10);
}

TEST(Alternating, SameInputsSameTrace)
{
    const auto sc = fim::test::default_scenario(5, 2, 3, 8);
    const auto a = run(sc, 1.0, BeamformerKind::mmse);
    const auto b = run(sc, 1.0, BeamformerKind::mmse);
    ASSERT_EQ(a.iterations.size(), b.iterations.size());
    for (size_t i = 0; i < a.iterations.size(); ++i)
    {
        EXPECT_EQ(a.iterations[i].power, b.iterations[i].power);
        EXPECT_EQ(a.iterations[i].shape, b.iterations[i].shape);
    }
}

TEST(Alternating, InfeasibilityCarriesTheOuterIteration)
{
    // two shared directions cannot separate four users
    Rng rng(1);
    const auto geom = FimGeometry::half_wavelength(2, 2, kLambda);
    const LinkBudget link = fim::test::unit_link(4);
    const auto env = sample_environment(rng, 2, link, AngleLayout::shared);
    const std::vector<double> targets(4, 3.0);
    AoConfig cfg;
    for (auto kind : {BeamformerKind::mmse, BeamformerKind::zf})
    {
        cfg.beamformer = kind;
        try
        {
            optimize(env, geom, link, targets, kLambda, cfg);
            FAIL() << "rank-two channel accepted";
        }
        catch (const OptimizationError &e)
        {
            EXPECT_EQ(e.outer_iteration(), 1);
        }
    }
}

TEST(Alternating, RejectsMismatchedInputs)
{
    const auto sc = fim::test::default_scenario(1, 2, 2, 4);
    AoConfig cfg;
    EXPECT_THROW(optimize(sc.env, sc.geom, sc.link, std::vector<double>(3, 1.0), kLambda, cfg), std::invalid_argument);
    cfg.max_outer_iters = 0;
    EXPECT_THROW(optimize(sc.env, sc.geom, sc.link, sc.targets, kLambda, cfg), std::invalid_argument);
}
