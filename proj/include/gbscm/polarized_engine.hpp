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

#include "gbscm/coeff_engine.hpp"

namespace gbscm
{

// Dual-polarized counterpart of SpatialMatrices. A term H^{XY} couples the
// receive polarization X with the transmit polarization Y:
//   H^{XY}(f, t) = R^X diag(c^{XY} .* psi^{XY} .* rho .* nu(t) .* xi(f)) (S^Y)^T
// where c^{VV} = c^{HH} = 1 and c^{VH} = c^{HV} = kappa (entries 1/sqrt(kappa_m)).
struct PolarizedSpatialMatrices
{
    Eigen::MatrixXcd tx_v, tx_h; // S x M
    Eigen::MatrixXcd rx_v, rx_h; // R x M
    Eigen::VectorXd kappa;       // 1/sqrt(kappa_m)
    Eigen::VectorXcd psi_vv, psi_vh, psi_hv, psi_hh;
    Eigen::VectorXd rho, nu, tau;
    double k0 = 0.0;

    Eigen::Index subpaths() const { return rho.size(); }

    std::size_t storage_bytes() const
    {
        return static_cast<std::size_t>(tx_v.size() + tx_h.size() + rx_v.size() + rx_h.size()) * sizeof(cplx);
    }
};

struct PolarizedChannel
{
    Eigen::MatrixXcd vv, vh, hv, hh;
    Eigen::MatrixXcd sum; // vv + vh + hv + hh
};

// Requires a polarized link and polarized patterns on both arrays.
PolarizedSpatialMatrices precompute_polarized(const LinkMultipath &link, const ArrayDescriptor &tx,
                                              const ArrayDescriptor &rx);

PolarizedChannel polarized_components(const PolarizedSpatialMatrices &psp, double f, double t);
Eigen::MatrixXcd polarized_channel(const PolarizedSpatialMatrices &psp, double f, double t);

// Per-entry evaluation with the 2x2 coupling sandwich
//   (F^V_r F^H_r) [ e^{j psi_vv}            e^{j psi_vh}/sqrt(kappa) ] (F^V_s F^H_s)^T
//                 [ e^{j psi_hv}/sqrt(kappa) e^{j psi_hh}           ]
// (rows: receive polarization, columns: transmit polarization).
Eigen::MatrixXcd polarized_channel_baseline(const LinkMultipath &link, const ArrayDescriptor &tx,
                                            const ArrayDescriptor &rx, double f, double t);

// Grid of polarized channels; with `components` set, each cell also keeps the four terms.
struct PolarizedChannelGrid
{
    std::vector<double> times;
    std::vector<double> freqs;
    std::vector<PolarizedChannel> cells; // row-major over (time, frequency)

    const PolarizedChannel &at(std::size_t t_index, std::size_t f_index) const
    {
        return cells[t_index * freqs.size() + f_index];
    }
};

PolarizedChannelGrid polarized_grid(const PolarizedSpatialMatrices &psp, const std::vector<double> &freqs,
                                    const std::vector<double> &times, bool components,
                                    Execution exec = Execution::parallel);

// Storage of the four polarized response matrices over L links: twice the scalar figure.
std::uint64_t polarized_spatial_memory_bytes(std::uint64_t links, std::uint64_t subpaths, std::uint64_t rx_elements,
                                             std::uint64_t tx_elements, std::uint64_t real_width_bytes);

} // namespace gbscm
