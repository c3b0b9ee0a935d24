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

#include "gbscm/antenna_array.hpp"
#include "gbscm/core_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gbscm
{

using cplx = std::complex<double>;

enum class Execution
{
    serial,
    parallel
};

// Precomputed per-link state of the factorized channel
//   H(f, t) = R diag(psi .* rho .* nu(t) .* xi(f)) S^T
// Column m of every member corresponds to subpath m of the source link.
struct SpatialMatrices
{
    Eigen::MatrixXcd tx; // S x M, F_s(dep_m) exp(j k0 p_s^T d_m)
    Eigen::MatrixXcd rx; // R x M, F_r(arr_m) exp(j k0 p_r^T a_m)
    Eigen::VectorXd rho; // sqrt(P_m)
    Eigen::VectorXd nu;  // Doppler coefficients, m/s
    Eigen::VectorXd tau; // delays, s
    Eigen::VectorXcd psi; // exp(j psi_m)
    double k0 = 0.0;

    Eigen::Index subpaths() const { return rho.size(); }
    Eigen::Index rx_elements() const { return rx.rows(); }
    Eigen::Index tx_elements() const { return tx.rows(); }

    // Bytes held by the two array response matrices.
    std::size_t storage_bytes() const
    {
        return static_cast<std::size_t>(tx.size() + rx.size()) * sizeof(cplx);
    }
};

// Channel matrices on a (time x frequency) grid, cell (i, k) holding H(freqs[k], times[i]).
struct ChannelGrid
{
    std::vector<double> times;
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> cells; // row-major over (time, frequency)

    const Eigen::MatrixXcd &at(std::size_t t_index, std::size_t f_index) const
    {
        return cells[t_index * freqs.size() + f_index];
    }
    Eigen::MatrixXcd &at(std::size_t t_index, std::size_t f_index)
    {
        return cells[t_index * freqs.size() + f_index];
    }
    cplx value(std::size_t t_index, std::size_t f_index, Eigen::Index r, Eigen::Index s) const
    {
        return at(t_index, f_index)(r, s);
    }
};

// Direct per-entry evaluation of the double sum. `f` is an absolute frequency in Hz.
// Throws invalid_parameter when the arrays were built for a different f0 than the link.
Eigen::MatrixXcd channel_baseline(const LinkMultipath &link, const ArrayDescriptor &tx, const ArrayDescriptor &rx,
                                  double f, double t);

SpatialMatrices precompute_spatial(const LinkMultipath &link, const ArrayDescriptor &tx, const ArrayDescriptor &rx);

// exp(j k0 nu_m t)
Eigen::VectorXcd doppler_vector(const SpatialMatrices &sp, double t);
// exp(-j 2 pi f tau_m)
Eigen::VectorXcd frequency_vector(const SpatialMatrices &sp, double f);
// rho .* psi .* xi(f): every factor of the channel that does not depend on time.
Eigen::VectorXcd time_invariant_weights(const SpatialMatrices &sp, double f);

Eigen::MatrixXcd channel_optimized(const SpatialMatrices &sp, double f, double t);

// Evaluates every (time, frequency) cell. rho is folded into R once per call,
// nu(t) and xi(f) are computed once per grid line. Cells are independent, so the
// parallel variant is bitwise identical to the serial one for any thread count.
ChannelGrid channel_grid(const SpatialMatrices &sp, const std::vector<double> &freqs, const std::vector<double> &times,
                         Execution exec = Execution::parallel);

// 4 L M (R + S) real_width_bytes: two complex matrices of two reals each.
std::uint64_t spatial_memory_bytes(std::uint64_t links, std::uint64_t subpaths, std::uint64_t rx_elements,
                                   std::uint64_t tx_elements, std::uint64_t real_width_bytes);

// max |a - b| / max |b|, the relative entrywise difference used to compare channel paths.
double relative_difference(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b);

namespace detail
{
void check_same_f0(const LinkMultipath &link, const ArrayDescriptor &array, const char *side);

// out = (weighted_rx .* w^T) tx^T with w = psi .* doppler .* freq
void channel_cell(const Eigen::MatrixXcd &weighted_rx, const Eigen::MatrixXcd &tx, const Eigen::VectorXcd &psi,
                  const Eigen::VectorXcd &doppler, const Eigen::VectorXcd &freq, Eigen::MatrixXcd &scratch,
                  Eigen::MatrixXcd &out);

Eigen::MatrixXcd fold_power(const Eigen::MatrixXcd &response, const Eigen::VectorXd &rho);
} // namespace detail

} // namespace gbscm
