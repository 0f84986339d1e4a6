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

#ifndef FIM_GEOMETRY_HPP
#define FIM_GEOMETRY_HPP

#include "fim/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fim {

// Static layout of the metasurface. Elements sit on the x-z plane in row-major order
// along x; element 0 is at the origin.
class FimGeometry
{
public:
    FimGeometry(int n_x, int n_z, double d_x, double d_z, double wavelength)
        : n_x_(n_x), n_z_(n_z), d_x_(d_x), d_z_(d_z), wavelength_(wavelength)
    {
        if (n_x < 1 || n_z < 1)
            throw std::invalid_argument("FimGeometry: element counts must be at least 1.");
        if (!(d_x > 0.0) || !(d_z > 0.0))
            throw std::invalid_argument("FimGeometry: element spacings must be positive.");
        if (!(wavelength > 0.0))
            throw std::invalid_argument("FimGeometry: wavelength must be positive.");
    }

    // Half-wavelength planar array, the default layout.
    static FimGeometry half_wavelength(int n_x, int n_z, double wavelength)
    {
        return {n_x, n_z, 0.5 * wavelength, 0.5 * wavelength, wavelength};
    }

    int n_x() const { return n_x_; }
    int n_z() const { return n_z_; }
    int size() const { return n_x_ * n_z_; }
    double d_x() const { return d_x_; }
    double d_z() const { return d_z_; }
    double wavelength() const { return wavelength_; }
    double wavenumber() const { return 2.0 * kPi / wavelength_; }

    double x(int n) const { return d_x_ * static_cast<double>(n % n_x_); }
    double z(int n) const { return d_z_ * static_cast<double>(n / n_x_); }

private:
    int n_x_;
    int n_z_;
    double d_x_;
    double d_z_;
    double wavelength_;
};

// Per-element displacement along y, bounded to [0, y_max].
class SurfaceShape
{
public:
    SurfaceShape(RVector y, double y_max) : y_(std::move(y)), y_max_(y_max)
    {
        if (!(y_max >= 0.0))
            throw std::invalid_argument("SurfaceShape: y_max must be non-negative.");
        for (Eigen::Index n = 0; n < y_.size(); ++n)
            if (!(y_[n] >= 0.0 && y_[n] <= y_max_))
                throw std::invalid_argument("SurfaceShape: displacement of element " + std::to_string(n) +
                                            " outside [0, y_max].");
    }

    static SurfaceShape flat(int n, double y_max) { return {RVector::Zero(n), y_max}; }

    // Clamps every coordinate into [0, y_max].
    static SurfaceShape projected(const RVector &y, double y_max)
    {
        return {y.cwiseMax(0.0).cwiseMin(y_max), y_max};
    }

    const RVector &y() const { return y_; }
    double y_max() const { return y_max_; }
    double morphing_range() const { return y_max_; }
    int size() const { return static_cast<int>(y_.size()); }

private:
    RVector y_;
    double y_max_;
};

inline void check_shape(const FimGeometry &geom, const SurfaceShape &shape)
{
    if (shape.size() != geom.size())
        throw std::invalid_argument("surface shape has " + std::to_string(shape.size()) +
                                    " elements, geometry has " + std::to_string(geom.size()) + ".");
}

using Point3 = std::array<double, 3>;

inline std::vector<Point3> element_positions(const FimGeometry &geom, const SurfaceShape &shape)
{
    check_shape(geom, shape);
    std::vector<Point3> p(static_cast<size_t>(geom.size()));
    for (int n = 0; n < geom.size(); ++n)
        p[static_cast<size_t>(n)] = {geom.x(n), shape.y()[n], geom.z(n)};
    return p;
}

// Far-field direction of a propagation path (radians).
struct PathAngles
{
    double azimuth = 0.0;
    double elevation = 0.0;

    // Projection of the unit direction onto the y axis; the factor multiplying y_n in the phase.
    double y_projection() const { return std::sin(elevation) * std::sin(azimuth); }
};

// a_n = exp(j k (x_n sin(el) cos(az) + y_n sin(el) sin(az) + z_n cos(el)))
inline CVector steering_vector(const FimGeometry &geom, const SurfaceShape &shape, PathAngles dir)
{
    check_shape(geom, shape);
    const double k = geom.wavenumber();
    const double ux = std::sin(dir.elevation) * std::cos(dir.azimuth);
    const double uy = dir.y_projection();
    const double uz = std::cos(dir.elevation);

    CVector a(geom.size());
    for (int n = 0; n < geom.size(); ++n)
    {
        const double phase = k * (geom.x(n) * ux + shape.y()[n] * uy + geom.z(n) * uz);
        a[n] = cplx(std::cos(phase), std::sin(phase));
    }
    return a;
}

} // namespace fim

#endif
