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

#ifndef FIM_CHANNEL_HPP
#define FIM_CHANNEL_HPP

#include "fim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace fim {

using Rng = std::mt19937_64;

// Per-user large-scale link parameters.
struct LinkBudget
{
    std::vector<double> distances;    // d_k in meters
    std::vector<double> gains;        // linear channel power gain g_k
    std::vector<double> noise_powers; // sigma_k^2 in watts

    int users() const { return static_cast<int>(gains.size()); }
};

// Base station and user-region layout on the ground.
struct ScenarioGeometry
{
    double bs_height = 5.0;               // H_u
    double user_region_radius = 10.0;     // R_u
    double region_center_distance = 20.0; // D_u
    int user_count = 4;                   // K
};

// One multipath realization: K x L complex path gains and the matching arrival directions.
// Directions are stored per (user, path); in the shared layout every user sees the same L directions.
struct ScatteringEnvironment
{
    std::vector<PathAngles> angles; // K * L entries, row-major by user
    CMatrix gains;                  // K x L, alpha_{k,l}
    RMatrix per_path_power;         // K x L, rho^2_{k,l}

    int paths() const { return static_cast<int>(gains.cols()); }
    int users() const { return static_cast<int>(gains.rows()); }

    const PathAngles &angle(int k, int l) const { return angles[static_cast<size_t>(k * paths() + l)]; }

    void check() const
    {
        if (angles.size() != static_cast<size_t>(gains.rows() * gains.cols()) || per_path_power.rows() != gains.rows() ||
            per_path_power.cols() != gains.cols())
            throw std::invalid_argument("ScatteringEnvironment: angle/gain/power tables disagree in size.");
    }
};

enum class AngleLayout
{
    per_user, // every user has its own L scatterers
    shared    // one set of L directions common to all users
};

// Thermal noise power in watts for a density in dBm/Hz over the given bandwidth.
inline double noise_power(double noise_density_dbm_per_hz, double bandwidth_hz)
{
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("noise_power: bandwidth must be positive.");
    return std::pow(10.0, (noise_density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

// Free-space (Friis) gain at the reference distance followed by exponent decay:
// g = (lambda / (4 pi d0))^2 * (d / d0)^(-exponent).
inline double path_gain(double d, double d0, double path_loss_exponent, double wavelength)
{
    if (!(d0 > 0.0))
        throw std::invalid_argument("path_gain: reference distance must be positive.");
    if (!(d >= d0))
        throw std::invalid_argument("path_gain: distance below the reference distance.");
    const double k = 2.0 * kPi / wavelength;
    const double ref = 1.0 / ((2.0 * k * d0) * (2.0 * k * d0));
    return ref * std::pow(d / d0, -path_loss_exponent);
}

inline LinkBudget make_link_budget(const std::vector<double> &distances, double d0, double path_loss_exponent,
                                   double wavelength, double noise_watts)
{
    if (!(noise_watts > 0.0))
        throw std::invalid_argument("make_link_budget: noise power must be positive.");
    LinkBudget link;
    link.distances = distances;
    for (double d : distances)
    {
        link.gains.push_back(path_gain(d, d0, path_loss_exponent, wavelength));
        link.noise_powers.push_back(noise_watts);
    }
    return link;
}

// Uniform drop over the disk; returns the 3D distance from the elevated BS to each user.
inline std::vector<double> sample_user_positions(Rng &rng, const ScenarioGeometry &scn)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> d(static_cast<size_t>(scn.user_count));
    for (auto &dk : d)
    {
        const double r = scn.user_region_radius * std::sqrt(unit(rng));
        const double psi = 2.0 * kPi * unit(rng);
        const double gx = scn.region_center_distance + r * std::cos(psi);
        const double gy = r * std::sin(psi);
        dk = std::sqrt(scn.bs_height * scn.bs_height + gx * gx + gy * gy);
    }
    return d;
}

// Angles uniform on [0, pi) for both azimuth and elevation; alpha ~ CN(0, g_k / L).
inline ScatteringEnvironment sample_environment(Rng &rng, int paths, const LinkBudget &link,
                                                AngleLayout layout = AngleLayout::per_user)
{
    if (paths < 1)
        throw std::invalid_argument("sample_environment: at least one path is required.");
    const int K = link.users();

    ScatteringEnvironment env;
    std::uniform_real_distribution<double> angle(0.0, kPi);
    env.angles.resize(static_cast<size_t>(K * paths));
    const int sets = layout == AngleLayout::shared ? 1 : K;
    for (int k = 0; k < sets; ++k)
        for (int l = 0; l < paths; ++l)
        {
            auto &a = env.angles[static_cast<size_t>(k * paths + l)];
            a.azimuth = angle(rng);
            a.elevation = angle(rng);
        }
    for (int k = sets; k < K; ++k)
        std::copy_n(env.angles.begin(), paths, env.angles.begin() + k * paths);

    env.gains.resize(K, paths);
    env.per_path_power.resize(K, paths);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < K; ++k)
    {
        const double rho2 = link.gains[static_cast<size_t>(k)] / paths;
        const double s = std::sqrt(rho2 / 2.0);
        for (int l = 0; l < paths; ++l)
        {
            env.per_path_power(k, l) = rho2;
            const double re = normal(rng);
            const double im = normal(rng);
            env.gains(k, l) = cplx(s * re, s * im);
        }
    }
    return env;
}

// N x L matrix whose columns are the steering vectors of user k's paths.
inline CMatrix user_steering_matrix(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape,
                                    int k)
{
    CMatrix A(geom.size(), env.paths());
    for (int l = 0; l < env.paths(); ++l)
        A.col(l) = steering_vector(geom, shape, env.angle(k, l));
    return A;
}

// H(y): column k is sum_l alpha_{k,l} a(y, az_{k,l}, el_{k,l}).
inline CMatrix channel_matrix(const ScatteringEnvironment &env, const FimGeometry &geom, const SurfaceShape &shape)
{
    env.check();
    check_shape(geom, shape);
    CMatrix H(geom.size(), env.users());
    for (int k = 0; k < env.users(); ++k)
        H.col(k) = user_steering_matrix(env, geom, shape, k) * env.gains.row(k).transpose();
    return H;
}

} // namespace fim

#endif
