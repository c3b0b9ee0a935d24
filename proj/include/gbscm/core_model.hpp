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

#pragma once

#include <cstddef>
#include <vector>

namespace gbscm
{

inline constexpr double speed_of_light = 299792458.0; // m/s, exact SI value
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, const Vec3 &a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3 &a);

// Spherical direction in the 3GPP convention.
//
// IMPORTANT: `theta` is the ZENITH angle measured from the +z axis, not the
// elevation above the horizon. theta = pi/2 lies in the horizontal x-y plane.
// `phi` is the azimuth in the x-y plane measured from +x.
struct Angles
{
    double theta = 0.0; // [0, pi]
    double phi = 0.0;   // [-pi, pi)

    friend bool operator==(const Angles &, const Angles &) = default;
};

// Wraps phi into [-pi, pi). A zenith outside [0, pi] is folded back over
// the pole, which also rotates the azimuth by pi. Idempotent.
Angles normalize(Angles a);

// Wraps a phase into [0, 2pi).
double wrap_phase(double psi);

struct Subpath
{
    double power = 0.0; // linear, >= 0
    double delay = 0.0; // seconds, >= 0
    Angles arrival;
    Angles departure;
    double phase = 0.0; // radians, [0, 2pi)
    int cluster_index = 0;

    friend bool operator==(const Subpath &, const Subpath &) = default;
};

// Per-subpath parameters of the dual-polarized model.
struct PolarizedSubpathExtras
{
    double phase_vv = 0.0;
    double phase_vh = 0.0;
    double phase_hv = 0.0;
    double phase_hh = 0.0;
    double kappa = 1.0; // cross-polarization power ratio (linear), > 0

    friend bool operator==(const PolarizedSubpathExtras &, const PolarizedSubpathExtras &) = default;
};

// Flattened multipath description of a single link. Subpath index m is the
// column index of every matrix built from the link.
struct LinkMultipath
{
    std::vector<Subpath> subpaths;
    double f0 = 0.0; // center frequency, Hz
    Vec3 v_tx;       // m/s
    Vec3 v_rx;       // m/s
    // Empty for the scalar model, otherwise one entry per subpath.
    std::vector<PolarizedSubpathExtras> polarization;

    std::size_t size() const { return subpaths.size(); }
    bool polarized() const { return !polarization.empty(); }

    // Throws invalid_parameter unless M >= 1, f0 > 0 and every subpath is in range.
    void validate() const;

    friend bool operator==(const LinkMultipath &, const LinkMultipath &) = default;
};

// (sin theta cos phi, sin theta sin phi, cos theta)
Vec3 direction_unit_vector(const Angles &angles);

// k0 = 2 pi f0 / c in rad/m.
double wavenumber(double f0);

// nu = a^T v_rx + d^T v_tx in m/s.
double doppler_coefficient(const Vec3 &arrival, const Vec3 &departure, const Vec3 &v_rx, const Vec3 &v_tx);

} // namespace gbscm
