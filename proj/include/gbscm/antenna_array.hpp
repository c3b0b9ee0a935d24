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

#include "gbscm/core_model.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace gbscm
{

struct Isotropic
{
    friend bool operator==(const Isotropic &, const Isotropic &) = default;
};

// Zero gain everywhere, e.g. the H port of a vertically polarized element.
struct NoResponse
{
    friend bool operator==(const NoResponse &, const NoResponse &) = default;
};

// max(0, cos gamma)^q, gamma being the angle between the query direction and the boresight.
struct CosinePower
{
    double exponent = 1.0;
    Angles boresight{pi / 2, 0.0};

    friend bool operator==(const CosinePower &, const CosinePower &) = default;
};

// Parabolic-in-dB sector pattern with boresight on +x (theta = 90 deg, phi = 0):
//   A(theta, phi) = -min(12 (phi/phi3dB)^2 + 12 ((theta - 90)/theta3dB)^2, Am)   [dB]
// with each cut also clipped at Am. gain() returns 10^(A/20).
struct Sectorized
{
    double azimuth_beamwidth_deg = 65.0;
    double elevation_beamwidth_deg = 65.0;
    double max_attenuation_db = 30.0;

    friend bool operator==(const Sectorized &, const Sectorized &) = default;
};

using ElementPattern = std::variant<Isotropic, NoResponse, CosinePower, Sectorized>;

struct PolarizedPattern
{
    ElementPattern vertical = Isotropic{};
    ElementPattern horizontal = Isotropic{};

    friend bool operator==(const PolarizedPattern &, const PolarizedPattern &) = default;
};

using ArrayPattern = std::variant<ElementPattern, PolarizedPattern>;

// Element phase centers in meters plus one pattern shared by all elements.
struct ArrayDescriptor
{
    std::vector<Vec3> positions;
    ArrayPattern pattern = ElementPattern{Isotropic{}};
    // Frequency the positions were laid out for; 0 when given in absolute meters.
    double design_f0 = 0.0;

    std::size_t element_count() const { return positions.size(); }
    bool polarized() const { return std::holds_alternative<PolarizedPattern>(pattern); }

    friend bool operator==(const ArrayDescriptor &, const ArrayDescriptor &) = default;
};

// Amplitude (not power) gain of a pattern toward `angles`. Always >= 0.
double gain(const ElementPattern &pattern, const Angles &angles);

// Scalar pattern of an array; throws invalid_parameter if the array is polarized.
const ElementPattern &scalar_pattern(const ArrayDescriptor &array);
const PolarizedPattern &polarized_pattern(const ArrayDescriptor &array);

// Uniform linear array along `axis` with centroid at the origin. The spacing
// is given in wavelengths and resolved to meters against f0.
ArrayDescriptor make_ula(int count, double spacing_wavelengths, double f0, const Vec3 &axis = {0.0, 1.0, 0.0},
                         ArrayPattern pattern = ElementPattern{Isotropic{}});

// rows x cols grid in the y-z plane: columns along +y, rows along +z, centroid at the origin.
ArrayDescriptor make_upa(int rows, int cols, double spacing_wavelengths, double f0,
                         ArrayPattern pattern = ElementPattern{Isotropic{}});

} // namespace gbscm
