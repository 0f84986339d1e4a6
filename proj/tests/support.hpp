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

// Shared fixtures for the unit and acceptance tests.

#ifndef FIM_TESTS_SUPPORT_HPP
#define FIM_TESTS_SUPPORT_HPP

#include "fim/fim.hpp"

#include <random>
#include <vector>

namespace fim::test {

inline constexpr double kLambda = kSpeedOfLight / 28e9;

inline CMatrix random_cmatrix(Rng &rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMatrix A(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            A(i, j) = cplx(n(rng), n(rng));
    return A;
}

// Unit-power link budget with unit noise, so channel entries are O(1).
inline LinkBudget unit_link(int K, double noise = 1.0)
{
    LinkBudget link;
    link.distances.assign(static_cast<size_t>(K), 1.0);
    link.gains.assign(static_cast<size_t>(K), 1.0);
    link.noise_powers.assign(static_cast<size_t>(K), noise);
    return link;
}

inline RVector random_interior(Rng &rng, int N, double y_max)
{
    std::uniform_real_distribution<double> u(0.1 * y_max, 0.9 * y_max);
    RVector y(N);
    for (int n = 0; n < N; ++n)
        y[n] = u(rng);
    return y;
}

// A channel realization drawn exactly like one harness trial.
struct Scenario
{
    FimGeometry geom;
    LinkBudget link;
    ScatteringEnvironment env;
    std::vector<double> targets;
};

inline Scenario default_scenario(std::uint64_t seed, int n_x, int n_z, int paths, double sinr_db = 5.0)
{
    Rng rng(seed);
    ScenarioGeometry scn;
    const auto d = sample_user_positions(rng, scn);
    LinkBudget link = make_link_budget(d, 1.0, 2.2, kLambda, noise_power(-174.0, 100e6));
    ScatteringEnvironment env = sample_environment(rng, paths, link);
    return {FimGeometry::half_wavelength(n_x, n_z, kLambda), std::move(link), std::move(env),
            std::vector<double>(static_cast<size_t>(scn.user_count), db_to_linear(sinr_db))};
}

// Central differences of f over each coordinate of y.
template <typename F> RVector central_difference(F &&f, const RVector &y, double delta)
{
    RVector g(y.size());
    for (Eigen::Index n = 0; n < y.size(); ++n)
    {
        RVector yp = y, ym = y;
        yp[n] += delta;
        ym[n] -= delta;
        g[n] = (f(yp) - f(ym)) / (2.0 * delta);
    }
    return g;
}

inline double relative_error(const RVector &a, const RVector &ref)
{
    const double scale = ref.norm();
    return scale > 0.0 ? (a - ref).norm() / scale : a.norm();
}

} // namespace fim::test

#endif
