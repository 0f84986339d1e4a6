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

TEST(Channel, NoisePower)
{
    EXPECT_NEAR(noise_power(-174.0, 1e8) / std::pow(10.0, -12.4), 1.0, 1e-12);
    EXPECT_NEAR(noise_power(-174.0, 1.0) / std::pow(10.0, -20.4), 1.0, 1e-12);
    EXPECT_NEAR(noise_power(0.0, 1e3), 1.0, 1e-12);
    EXPECT_NEAR(transmit_power_dbm(noise_power(-174.0, 1e8)), -94.0, 1e-9);
    EXPECT_THROW(noise_power(-174.0, 0.0), std::invalid_argument);
}

TEST(Channel, PathGain)
{
    const double g0 = path_gain(1.0, 1.0, 2.2, kLambda);
    EXPECT_NEAR(g0 / std::pow(kLambda / (4 * kPi), 2), 1.0, 1e-12);
    EXPECT_NEAR(g0, 7.27e-7, 0.015e-7);
    EXPECT_NEAR(10 * std::log10(g0), -61.4, 0.05);

    for (double d : {1.0, 3.0, 17.5})
        EXPECT_NEAR(path_gain(d, 1.0, 2.0, kLambda) / std::pow(kLambda / (4 * kPi * d), 2), 1.0, 1e-12);

    EXPECT_NEAR(10 * std::log10(path_gain(10.0, 1.0, 2.2, kLambda) / g0), -22.0, 1e-9);
    EXPECT_THROW(path_gain(0.5, 1.0, 2.2, kLambda), std::invalid_argument);
}

TEST(Channel, DegenerateRegionPutsUsersAtTheCenter)
{
    Rng rng(1);
    ScenarioGeometry scn;
    scn.user_region_radius = 0.0;
    for (double d : sample_user_positions(rng, scn))
        EXPECT_NEAR(d, std::sqrt(425.0), 1e-12);
}

TEST(Channel, UserDistancesStayInsideTheRegion)
{
    Rng rng(2);
    const ScenarioGeometry scn;
    const double lo = std::hypot(scn.bs_height, scn.region_center_distance - scn.user_region_radius);
    const double hi = std::hypot(scn.bs_height, scn.region_center_distance + scn.user_region_radius);
    for (int t = 0; t < 10000; ++t)
        for (double d : sample_user_positions(rng, scn))
        {
            ASSERT_GE(d, lo - 1e-12);
            ASSERT_LE(d, hi + 1e-12);
        }
}

TEST(Channel, UserDropIsUniformOverTheDisk)
{
    // E[d^2] = H^2 + D^2 + E[r^2] and E[r^2] = R^2 / 2 for a uniform disk
    Rng rng(3);
    const ScenarioGeometry scn;
    const double base = scn.bs_height * scn.bs_height + scn.region_center_distance * scn.region_center_distance;
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (int t = 0; t < 100000; ++t)
        for (double d : sample_user_positions(rng, scn))
        {
            const double r2 = d * d - base;
            sum += r2;
            sum2 += r2 * r2;
            ++n;
        }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, scn.user_region_radius * scn.user_region_radius / 2, 3 * sd);
}

TEST(Channel, PathPowersSplitTheUserGain)
{
    Rng rng(4);
    const LinkBudget link = make_link_budget({20.0, 25.0, 30.0}, 1.0, 2.2, kLambda, 1e-12);
    for (int L : {1, 3, 8})
    {
        const auto env = sample_environment(rng, L, link);
        for (int k = 0; k < 3; ++k)
            EXPECT_NEAR(env.per_path_power.row(k).sum() / link.gains[static_cast<size_t>(k)], 1.0, 1e-12);
        for (const auto &a : env.angles)
        {
            EXPECT_GE(a.azimuth, 0.0);
            EXPECT_LT(a.azimuth, kPi);
            EXPECT_GE(a.elevation, 0.0);
            EXPECT_LT(a.elevation, kPi);
        }
    }
}

TEST(Channel, PathGainSecondMoment)
{
    Rng rng(5);
    const LinkBudget link = fim::test::unit_link(1);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < n; ++t)
    {
        const double p = std::norm(sample_environment(rng, 1, link).gains(0, 0));
        sum += p;
        sum2 += p * p;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, 1.0, 3 * sd);
}

TEST(Channel, SameSeedSameEnvironment)
{
    const LinkBudget link = make_link_budget({20.0, 22.0}, 1.0, 2.2, kLambda, 1e-12);
    Rng a(99), b(99);
    const auto e1 = sample_environment(a, 6, link);
    const auto e2 = sample_environment(b, 6, link);
    EXPECT_EQ(e1.gains, e2.gains);
    for (size_t i = 0; i < e1.angles.size(); ++i)
    {
        EXPECT_EQ(e1.angles[i].azimuth, e2.angles[i].azimuth);
        EXPECT_EQ(e1.angles[i].elevation, e2.angles[i].elevation);
    }
    const auto geom = FimGeometry::half_wavelength(2, 2, kLambda);
    const SurfaceShape shape(RVector::Constant(4, 0.3 * kLambda), kLambda);
    EXPECT_EQ(channel_matrix(e1, geom, shape), channel_matrix(e2, geom, shape));
}

TEST(Channel, SharedLayoutReusesTheDirections)
{
    Rng rng(6);
    const auto env = sample_environment(rng, 5, fim::test::unit_link(3), AngleLayout::shared);
    for (int k = 1; k < 3; ++k)
        for (int l = 0; l < 5; ++l)
        {
            EXPECT_EQ(env.angle(k, l).azimuth, env.angle(0, l).azimuth);
            EXPECT_EQ(env.angle(k, l).elevation, env.angle(0, l).elevation);
        }
}

TEST(Channel, SingleUnitPathIsTheSteeringVector)
{
    ScatteringEnvironment env;
    env.angles = {{0.3, 1.2}};
    env.gains = CMatrix::Ones(1, 1);
    env.per_path_power = RMatrix::Ones(1, 1);
    const auto geom = FimGeometry::half_wavelength(2, 2, kLambda);
    Rng rng(8);
    const SurfaceShape shape(fim::test::random_interior(rng, 4, kLambda), kLambda);
    const CMatrix H = channel_matrix(env, geom, shape);
    EXPECT_LT((H.col(0) - steering_vector(geom, shape, env.angles[0])).norm(), 1e-15);
}

TEST(Channel, SingleElementMagnitudeIgnoresShape)
{
    Rng rng(9);
    const auto env = sample_environment(rng, 1, fim::test::unit_link(2));
    const auto geom = FimGeometry::half_wavelength(1, 1, kLambda);
    const double ref = channel_matrix(env, geom, SurfaceShape::flat(1, kLambda)).col(0).norm();
    for (double y : {0.1, 0.37, 0.9})
        EXPECT_NEAR(channel_matrix(env, geom, SurfaceShape(RVector::Constant(1, y * kLambda), kLambda)).col(0).norm(),
                    ref, 1e-14);
}

TEST(Channel, SinglePathNormIgnoresCommonShift)
{
    Rng rng(10);
    const auto env = sample_environment(rng, 1, fim::test::unit_link(3));
    const auto geom = FimGeometry::half_wavelength(2, 3, kLambda);
    const RVector y = fim::test::random_interior(rng, 6, kLambda);
    const CMatrix H0 = channel_matrix(env, geom, SurfaceShape(y, 2 * kLambda));
    const CMatrix H1 = channel_matrix(env, geom, SurfaceShape(y.array() + 0.41 * kLambda, 2 * kLambda));
    for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(H0.col(k).norm(), H1.col(k).norm(), 1e-12 * H0.col(k).norm());
}

TEST(Channel, ChannelEnergyIsNTimesGain)
{
    Rng rng(11);
    const auto geom = FimGeometry::half_wavelength(2, 2, kLambda);
    const SurfaceShape shape(fim::test::random_interior(rng, 4, kLambda), kLambda);
    const LinkBudget link = fim::test::unit_link(1);
    const int n = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < n; ++t)
    {
        const double e = channel_matrix(sample_environment(rng, 4, link), geom, shape).squaredNorm();
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, 4.0, 3 * sd);
}

TEST(Channel, ChannelIsContinuousInDisplacement)
{
    Rng rng(12);
    const auto env = sample_environment(rng, 4, fim::test::unit_link(2));
    const auto geom = FimGeometry::half_wavelength(2, 2, kLambda);
    const RVector y = fim::test::random_interior(rng, 4, kLambda);
    const CMatrix H = channel_matrix(env, geom, SurfaceShape(y, kLambda));
    for (double delta : {1e-4, 1e-6, 1e-8})
    {
        RVector yd = y;
        yd[1] += delta * kLambda;
        const double change = (channel_matrix(env, geom, SurfaceShape(yd, kLambda)) - H).norm();
        // each path term moves by at most kappa * delta * |alpha|
        EXPECT_LE(change, geom.wavenumber() * delta * kLambda * env.gains.cwiseAbs().sum());
    }
}
