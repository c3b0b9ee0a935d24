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

#include "gbscm/coeff_engine.hpp"
#include "gbscm/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gbscm
{

namespace detail
{
void check_same_f0(const LinkMultipath &link, const ArrayDescriptor &array, const char *side)
{
    if (array.element_count() == 0)
        throw invalid_parameter("coeff_engine", std::string(side) + " array has no elements");
    if (array.design_f0 != 0.0 && std::abs(array.design_f0 - link.f0) > 1e-12 * link.f0)
        throw invalid_parameter("coeff_engine", std::string(side) + " array was built for f0 = " +
                                                    std::to_string(array.design_f0) + " Hz but the link uses " +
                                                    std::to_string(link.f0) + " Hz");
}

Eigen::MatrixXcd fold_power(const Eigen::MatrixXcd &response, const Eigen::VectorXd &rho)
{
    return response * rho.asDiagonal();
}

void channel_cell(const Eigen::MatrixXcd &weighted_rx, const Eigen::MatrixXcd &tx, const Eigen::VectorXcd &psi,
                  const Eigen::VectorXcd &doppler, const Eigen::VectorXcd &freq, Eigen::MatrixXcd &scratch,
                  Eigen::MatrixXcd &out)
{
    const Eigen::VectorXcd w = psi.cwiseProduct(doppler).cwiseProduct(freq);
    scratch.noalias() = weighted_rx * w.asDiagonal();
    out.noalias() = scratch * tx.transpose();
}
} // namespace detail

Eigen::MatrixXcd channel_baseline(const LinkMultipath &link, const ArrayDescriptor &tx, const ArrayDescriptor &rx,
                                  double f, double t)
{
    link.validate();
    detail::check_same_f0(link, tx, "tx");
    detail::check_same_f0(link, rx, "rx");
    const auto &tx_pattern = scalar_pattern(tx);
    const auto &rx_pattern = scalar_pattern(rx);

    const double k0 = wavenumber(link.f0);
    const std::size_t M = link.size();
    std::vector<Vec3> dep(M), arr(M);
    std::vector<double> nu(M);
    for (std::size_t m = 0; m < M; ++m)
    {
        dep[m] = direction_unit_vector(link.subpaths[m].departure);
        arr[m] = direction_unit_vector(link.subpaths[m].arrival);
        nu[m] = doppler_coefficient(arr[m], dep[m], link.v_rx, link.v_tx);
    }

    const auto R = static_cast<Eigen::Index>(rx.element_count());
    const auto S = static_cast<Eigen::Index>(tx.element_count());
    Eigen::MatrixXcd H(R, S);
    for (Eigen::Index r = 0; r < R; ++r)
    {
        const Vec3 &p_r = rx.positions[r];
        for (Eigen::Index s = 0; s < S; ++s)
        {
            const Vec3 &p_s = tx.positions[s];
            cplx sum = 0.0;
            for (std::size_t m = 0; m < M; ++m)
            {
                const Subpath &sp = link.subpaths[m];
                const double amplitude = std::sqrt(sp.power) * gain(tx_pattern, sp.departure) * gain(rx_pattern, sp.arrival);
                sum += amplitude * std::polar(1.0, sp.phase) * std::polar(1.0, k0 * dot(p_s, dep[m])) *
                       std::polar(1.0, k0 * dot(p_r, arr[m])) * std::polar(1.0, k0 * nu[m] * t) *
                       std::polar(1.0, -two_pi * f * sp.delay);
            }
            H(r, s) = sum;
        }
    }
    return H;
}

SpatialMatrices precompute_spatial(const LinkMultipath &link, const ArrayDescriptor &tx, const ArrayDescriptor &rx)
{
    link.validate();
    detail::check_same_f0(link, tx, "tx");
    detail::check_same_f0(link, rx, "rx");
    const auto &tx_pattern = scalar_pattern(tx);
    const auto &rx_pattern = scalar_pattern(rx);

    const auto M = static_cast<Eigen::Index>(link.size());
    const auto R = static_cast<Eigen::Index>(rx.element_count());
    const auto S = static_cast<Eigen::Index>(tx.element_count());

    SpatialMatrices sp;
    sp.k0 = wavenumber(link.f0);
    sp.tx.resize(S, M);
    sp.rx.resize(R, M);
    sp.rho.resize(M);
    sp.nu.resize(M);
    sp.tau.resize(M);
    sp.psi.resize(M);
    for (Eigen::Index m = 0; m < M; ++m)
    {
        const Subpath &path = link.subpaths[m];
        const Vec3 d = direction_unit_vector(path.departure);
        const Vec3 a = direction_unit_vector(path.arrival);
        const double g_tx = gain(tx_pattern, path.departure);
        const double g_rx = gain(rx_pattern, path.arrival);
        for (Eigen::Index s = 0; s < S; ++s)
            sp.tx(s, m) = std::polar(g_tx, sp.k0 * dot(tx.positions[s], d));
        for (Eigen::Index r = 0; r < R; ++r)
            sp.rx(r, m) = std::polar(g_rx, sp.k0 * dot(rx.positions[r], a));
        sp.rho(m) = std::sqrt(path.power);
        sp.nu(m) = doppler_coefficient(a, d, link.v_rx, link.v_tx);
        sp.tau(m) = path.delay;
        sp.psi(m) = std::polar(1.0, path.phase);
    }
    return sp;
}

Eigen::VectorXcd doppler_vector(const SpatialMatrices &sp, double t)
{
    Eigen::VectorXcd v(sp.subpaths());
    for (Eigen::Index m = 0; m < v.size(); ++m)
        v(m) = std::polar(1.0, sp.k0 * sp.nu(m) * t);
    return v;
}

Eigen::VectorXcd frequency_vector(const SpatialMatrices &sp, double f)
{
    Eigen::VectorXcd v(sp.subpaths());
    for (Eigen::Index m = 0; m < v.size(); ++m)
        v(m) = std::polar(1.0, -two_pi * f * sp.tau(m));
    return v;
}

Eigen::VectorXcd time_invariant_weights(const SpatialMatrices &sp, double f)
{
    return sp.rho.cast<cplx>().cwiseProduct(sp.psi).cwiseProduct(frequency_vector(sp, f));
}

Eigen::MatrixXcd channel_optimized(const SpatialMatrices &sp, double f, double t)
{
    const Eigen::MatrixXcd weighted_rx = detail::fold_power(sp.rx, sp.rho);
    Eigen::MatrixXcd scratch, out;
    detail::channel_cell(weighted_rx, sp.tx, sp.psi, doppler_vector(sp, t), frequency_vector(sp, f), scratch, out);
    return out;
}

ChannelGrid channel_grid(const SpatialMatrices &sp, const std::vector<double> &freqs, const std::vector<double> &times,
                         Execution exec)
{
    if (freqs.empty() || times.empty())
        throw invalid_parameter("coeff_engine", "channel grid needs at least one time and one frequency");

    ChannelGrid grid;
    grid.times = times;
    grid.freqs = freqs;
    grid.cells.resize(times.size() * freqs.size());

    const Eigen::MatrixXcd weighted_rx = detail::fold_power(sp.rx, sp.rho);
    std::vector<Eigen::VectorXcd> doppler(times.size()), freq(freqs.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        doppler[i] = doppler_vector(sp, times[i]);
    for (std::size_t k = 0; k < freqs.size(); ++k)
        freq[k] = frequency_vector(sp, freqs[k]);

    const auto n_cells = static_cast<std::int64_t>(grid.cells.size());
    const std::size_t n_freqs = freqs.size();
    if (exec == Execution::serial)
    {
        Eigen::MatrixXcd scratch;
        for (std::int64_t c = 0; c < n_cells; ++c)
            detail::channel_cell(weighted_rx, sp.tx, sp.psi, doppler[c / n_freqs], freq[c % n_freqs], scratch,
                                 grid.cells[c]);
        return grid;
    }

#pragma omp parallel
    {
        Eigen::MatrixXcd scratch;
#pragma omp for schedule(static)
        for (std::int64_t c = 0; c < n_cells; ++c)
            detail::channel_cell(weighted_rx, sp.tx, sp.psi, doppler[c / n_freqs], freq[c % n_freqs], scratch,
                                 grid.cells[c]);
    }
    return grid;
}

std::uint64_t spatial_memory_bytes(std::uint64_t links, std::uint64_t subpaths, std::uint64_t rx_elements,
                                   std::uint64_t tx_elements, std::uint64_t real_width_bytes)
{
    if (links < 1 || subpaths < 1 || rx_elements < 1 || tx_elements < 1 || real_width_bytes < 1)
        throw invalid_parameter("coeff_engine", "spatial_memory_bytes arguments must all be >= 1");
    std::uint64_t elements = 0;
    std::uint64_t out = 0;
    if (__builtin_add_overflow(rx_elements, tx_elements, &elements) || __builtin_mul_overflow(4ULL, links, &out) ||
        __builtin_mul_overflow(out, subpaths, &out) || __builtin_mul_overflow(out, elements, &out) ||
        __builtin_mul_overflow(out, real_width_bytes, &out))
        throw invalid_parameter("coeff_engine", "spatial_memory_bytes overflows 64 bits");
    return out;
}

double relative_difference(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return std::numeric_limits<double>::infinity();
    const double scale = b.cwiseAbs().maxCoeff();
    const double diff = (a - b).cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / scale;
}

} // namespace gbscm
