// SPDX-License-Identifier: Apache-2.0
//
// gbscm - matrix-form geometry-based stochastic MIMO channel simulation
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

#include "gbscm/core_model.hpp"
#include "gbscm/error.hpp"

#include <cmath>
#include <string>

namespace gbscm
{

double norm(const Vec3 &a)
{
    return std::sqrt(dot(a, a));
}

namespace
{
double wrap_azimuth(double phi)
{
    double w = std::fmod(phi + pi, two_pi);
    if (w < 0.0)
        w += two_pi;
    w -= pi;
    // fmod can land exactly on the excluded upper bound after the shift
    return w >= pi ? -pi : w;
}
} // namespace

Angles normalize(Angles a)
{
    double theta = std::fmod(a.theta, two_pi);
    if (theta < 0.0)
        theta += two_pi;
    double phi = a.phi;
    if (theta > pi)
    {
        theta = two_pi - theta;
        phi += pi;
    }
    return {theta, wrap_azimuth(phi)};
}

double wrap_phase(double psi)
{
    double w = std::fmod(psi, two_pi);
    if (w < 0.0)
        w += two_pi;
    return w >= two_pi ? 0.0 : w;
}

void LinkMultipath::validate() const
{
    if (subpaths.empty())
        throw invalid_parameter("core_model", "link needs at least one subpath");
    if (!(f0 > 0.0) || !std::isfinite(f0))
        throw invalid_parameter("core_model", "f0 must be > 0");
    if (!polarization.empty() && polarization.size() != subpaths.size())
        throw invalid_parameter("core_model", "polarization extras must match the subpath count");
    for (std::size_t m = 0; m < subpaths.size(); ++m)
    {
        const auto &sp = subpaths[m];
        if (!(sp.power >= 0.0))
            throw invalid_parameter("core_model", "subpath " + std::to_string(m) + ": power must be >= 0");
        if (!(sp.delay >= 0.0))
            throw invalid_parameter("core_model", "subpath " + std::to_string(m) + ": delay must be >= 0");
    }
    for (const auto &p : polarization)
        if (!(p.kappa > 0.0))
            throw invalid_parameter("core_model", "depolarization kappa must be > 0");
}

Vec3 direction_unit_vector(const Angles &angles)
{
    const double st = std::sin(angles.theta);
    return {st * std::cos(angles.phi), st * std::sin(angles.phi), std::cos(angles.theta)};
}

double wavenumber(double f0)
{
    if (!(f0 > 0.0) || !std::isfinite(f0))
        throw invalid_parameter("core_model", "f0 must be > 0, got " + std::to_string(f0));
    return two_pi * f0 / speed_of_light;
}

double doppler_coefficient(const Vec3 &arrival, const Vec3 &departure, const Vec3 &v_rx, const Vec3 &v_tx)
{
    return dot(arrival, v_rx) + dot(departure, v_tx);
}

} // namespace gbscm
