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

#include "gbscm/antenna_array.hpp"
#include "gbscm/error.hpp"

#include <algorithm>
#include <cmath>

namespace gbscm
{

namespace
{
constexpr double deg = pi / 180.0;

struct GainVisitor
{
    const Angles &q;

    double operator()(const Isotropic &) const { return 1.0; }
    double operator()(const NoResponse &) const { return 0.0; }

    double operator()(const CosinePower &p) const
    {
        const double c = dot(direction_unit_vector(q), direction_unit_vector(p.boresight));
        return c > 0.0 ? std::pow(std::min(c, 1.0), p.exponent) : 0.0;
    }

    double operator()(const Sectorized &p) const
    {
        const double az = q.phi / (p.azimuth_beamwidth_deg * deg);
        const double el = (q.theta - pi / 2) / (p.elevation_beamwidth_deg * deg);
        const double att_h = std::min(12.0 * az * az, p.max_attenuation_db);
        const double att_v = std::min(12.0 * el * el, p.max_attenuation_db);
        const double att = std::min(att_h + att_v, p.max_attenuation_db);
        return std::pow(10.0, -att / 20.0);
    }
};

void check_builder_args(double spacing, double f0)
{
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw invalid_parameter("antenna_array", "spacing must be > 0");
    if (!(f0 > 0.0) || !std::isfinite(f0))
        throw invalid_parameter("antenna_array", "f0 must be > 0");
}
} // namespace

double gain(const ElementPattern &pattern, const Angles &angles)
{
    return std::visit(GainVisitor{angles}, pattern);
}

const ElementPattern &scalar_pattern(const ArrayDescriptor &array)
{
    if (const auto *p = std::get_if<ElementPattern>(&array.pattern))
        return *p;
    throw invalid_parameter("antenna_array", "array carries a polarized pattern where a scalar one is required");
}

const PolarizedPattern &polarized_pattern(const ArrayDescriptor &array)
{
    if (const auto *p = std::get_if<PolarizedPattern>(&array.pattern))
        return *p;
    throw invalid_parameter("antenna_array", "array carries a scalar pattern where a polarized one is required");
}

ArrayDescriptor make_ula(int count, double spacing_wavelengths, double f0, const Vec3 &axis, ArrayPattern pattern)
{
    if (count < 1)
        throw invalid_parameter("antenna_array", "element count must be >= 1");
    check_builder_args(spacing_wavelengths, f0);
    if (std::abs(norm(axis) - 1.0) > 1e-9)
        throw invalid_parameter("antenna_array", "ULA axis must be a unit vector");

    const double d = spacing_wavelengths * speed_of_light / f0;
    const double center = 0.5 * (count - 1);
    ArrayDescriptor out;
    out.pattern = std::move(pattern);
    out.design_f0 = f0;
    out.positions.reserve(count);
    for (int k = 0; k < count; ++k)
        out.positions.push_back(((k - center) * d) * axis);
    return out;
}

ArrayDescriptor make_upa(int rows, int cols, double spacing_wavelengths, double f0, ArrayPattern pattern)
{
    if (rows < 1 || cols < 1)
        throw invalid_parameter("antenna_array", "UPA rows and cols must be >= 1");
    check_builder_args(spacing_wavelengths, f0);

    const double d = spacing_wavelengths * speed_of_light / f0;
    const double rc = 0.5 * (rows - 1);
    const double cc = 0.5 * (cols - 1);
    ArrayDescriptor out;
    out.pattern = std::move(pattern);
    out.design_f0 = f0;
    out.positions.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out.positions.push_back({0.0, (c - cc) * d, (r - rc) * d});
    return out;
}

} // namespace gbscm
