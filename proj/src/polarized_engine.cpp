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

#include "gbscm/polarized_engine.hpp"
#include "gbscm/error.hpp"

#include <cmath>

namespace gbscm
{

namespace
{
struct TermFactors
{
    Eigen::VectorXcd vv, vh, hv, hh;
};

// psi^{XY} .* c^{XY}, the per-term weights that do not depend on (f, t).
TermFactors coupling_weights(const PolarizedSpatialMatrices &psp)
{
    const Eigen::VectorXcd kappa = psp.kappa.cast<cplx>();
    return {psp.psi_vv, psp.psi_vh.cwiseProduct(kappa), psp.psi_hv.cwiseProduct(kappa), psp.psi_hh};
}

void polarized_cell(const PolarizedSpatialMatrices &psp, const Eigen::MatrixXcd &rx_v, const Eigen::MatrixXcd &rx_h,
                    const TermFactors &w, const Eigen::VectorXcd &doppler, const Eigen::VectorXcd &freq,
                    bool components, Eigen::MatrixXcd &scratch, PolarizedChannel &out)
{
    detail::channel_cell(rx_v, psp.tx_v, w.vv, doppler, freq, scratch, out.vv);
    detail::channel_cell(rx_v, psp.tx_h, w.vh, doppler, freq, scratch, out.vh);
    detail::channel_cell(rx_h, psp.tx_v, w.hv, doppler, freq, scratch, out.hv);
    detail::channel_cell(rx_h, psp.tx_h, w.hh, doppler, freq, scratch, out.hh);
    out.sum = out.vv + out.vh + out.hv + out.hh;
    if (!components)
    {
        out.vv.resize(0, 0);
        out.vh.resize(0, 0);
        out.hv.resize(0, 0);
        out.hh.resize(0, 0);
    }
}

Eigen::VectorXcd doppler_of(const PolarizedSpatialMatrices &psp, double t)
{
    Eigen::VectorXcd v(psp.subpaths());
    for (Eigen::Index m = 0; m < v.size(); ++m)
        v(m) = std::polar(1.0, psp.k0 * psp.nu(m) * t);
    return v;
}

Eigen::VectorXcd frequency_of(const PolarizedSpatialMatrices &psp, double f)
{
    Eigen::VectorXcd v(psp.subpaths());
    for (Eigen::Index m = 0; m < v.size(); ++m)
        v(m) = std::polar(1.0, -two_pi * f * psp.tau(m));
    return v;
}

void require_polarized_link(const LinkMultipath &link)
{
    if (!link.polarized())
        throw invalid_parameter("polarized_engine", "link has no polarization parameters");
}
} // namespace

PolarizedSpatialMatrices precompute_polarized(const LinkMultipath &link, const ArrayDescriptor &tx,
                                              const ArrayDescriptor &rx)
{
    link.validate();
    require_polarized_link(link);
    detail::check_same_f0(link, tx, "tx");
    detail::check_same_f0(link, rx, "rx");
    if (!tx.polarized() || !rx.polarized())
        throw invalid_parameter("polarized_engine", "both arrays need a polarized pattern");
    const auto &tx_pattern = polarized_pattern(tx);
    const auto &rx_pattern = polarized_pattern(rx);

    const auto M = static_cast<Eigen::Index>(link.size());
    const auto R = static_cast<Eigen::Index>(rx.element_count());
    const auto S = static_cast<Eigen::Index>(tx.element_count());

    PolarizedSpatialMatrices psp;
    psp.k0 = wavenumber(link.f0);
    psp.tx_v.resize(S, M);
    psp.tx_h.resize(S, M);
    psp.rx_v.resize(R, M);
    psp.rx_h.resize(R, M);
    psp.kappa.resize(M);
    psp.psi_vv.resize(M);
    psp.psi_vh.resize(M);
    psp.psi_hv.resize(M);
    psp.psi_hh.resize(M);
    psp.rho.resize(M);
    psp.nu.resize(M);
    psp.tau.resize(M);

    for (Eigen::Index m = 0; m < M; ++m)
    {
        const Subpath &path = link.subpaths[m];
        const PolarizedSubpathExtras &pol = link.polarization[m];
        const Vec3 d = direction_unit_vector(path.departure);
        const Vec3 a = direction_unit_vector(path.arrival);
        const double gtv = gain(tx_pattern.vertical, path.departure);
        const double gth = gain(tx_pattern.horizontal, path.departure);
        const double grv = gain(rx_pattern.vertical, path.arrival);
        const double grh = gain(rx_pattern.horizontal, path.arrival);
        for (Eigen::Index s = 0; s < S; ++s)
        {
            const cplx steer = std::polar(1.0, psp.k0 * dot(tx.positions[s], d));
            psp.tx_v(s, m) = gtv * steer;
            psp.tx_h(s, m) = gth * steer;
        }
        for (Eigen::Index r = 0; r < R; ++r)
        {
            const cplx steer = std::polar(1.0, psp.k0 * dot(rx.positions[r], a));
            psp.rx_v(r, m) = grv * steer;
            psp.rx_h(r, m) = grh * steer;
        }
        psp.kappa(m) = 1.0 / std::sqrt(pol.kappa);
        psp.psi_vv(m) = std::polar(1.0, pol.phase_vv);
        psp.psi_vh(m) = std::polar(1.0, pol.phase_vh);
        psp.psi_hv(m) = std::polar(1.0, pol.phase_hv);
        psp.psi_hh(m) = std::polar(1.0, pol.phase_hh);
        psp.rho(m) = std::sqrt(path.power);
        psp.nu(m) = doppler_coefficient(a, d, link.v_rx, link.v_tx);
        psp.tau(m) = path.delay;
    }
    return psp;
}

PolarizedChannel polarized_components(const PolarizedSpatialMatrices &psp, double f, double t)
{
    const Eigen::MatrixXcd rx_v = detail::fold_power(psp.rx_v, psp.rho);
    const Eigen::MatrixXcd rx_h = detail::fold_power(psp.rx_h, psp.rho);
    Eigen::MatrixXcd scratch;
    PolarizedChannel out;
    polarized_cell(psp, rx_v, rx_h, coupling_weights(psp), doppler_of(psp, t), frequency_of(psp, f), true, scratch,
                   out);
    return out;
}

Eigen::MatrixXcd polarized_channel(const PolarizedSpatialMatrices &psp, double f, double t)
{
    return polarized_components(psp, f, t).sum;
}

Eigen::MatrixXcd polarized_channel_baseline(const LinkMultipath &link, const ArrayDescriptor &tx,
                                            const ArrayDescriptor &rx, double f, double t)
{
    link.validate();
    require_polarized_link(link);
    detail::check_same_f0(link, tx, "tx");
    detail::check_same_f0(link, rx, "rx");
    const auto &tx_pattern = polarized_pattern(tx);
    const auto &rx_pattern = polarized_pattern(rx);

    const double k0 = wavenumber(link.f0);
    const std::size_t M = link.size();
    const auto R = static_cast<Eigen::Index>(rx.element_count());
    const auto S = static_cast<Eigen::Index>(tx.element_count());
    Eigen::MatrixXcd H(R, S);
    for (Eigen::Index r = 0; r < R; ++r)
    {
        for (Eigen::Index s = 0; s < S; ++s)
        {
            cplx sum = 0.0;
            for (std::size_t m = 0; m < M; ++m)
            {
                const Subpath &path = link.subpaths[m];
                const PolarizedSubpathExtras &pol = link.polarization[m];
                const Vec3 d = direction_unit_vector(path.departure);
                const Vec3 a = direction_unit_vector(path.arrival);
                const double cross = 1.0 / std::sqrt(pol.kappa);

                const double frv = gain(rx_pattern.vertical, path.arrival);
                const double frh = gain(rx_pattern.horizontal, path.arrival);
                const double fsv = gain(tx_pattern.vertical, path.departure);
                const double fsh = gain(tx_pattern.horizontal, path.departure);
                const cplx c_vv = std::polar(1.0, pol.phase_vv);
                const cplx c_vh = cross * std::polar(1.0, pol.phase_vh);
                const cplx c_hv = cross * std::polar(1.0, pol.phase_hv);
                const cplx c_hh = std::polar(1.0, pol.phase_hh);
                const cplx coupling = frv * (c_vv * fsv + c_vh * fsh) + frh * (c_hv * fsv + c_hh * fsh);

                const double nu = doppler_coefficient(a, d, link.v_rx, link.v_tx);
                sum += std::sqrt(path.power) * coupling * std::polar(1.0, k0 * dot(tx.positions[s], d)) *
                       std::polar(1.0, k0 * dot(rx.positions[r], a)) * std::polar(1.0, k0 * nu * t) *
                       std::polar(1.0, -two_pi * f * path.delay);
            }
            H(r, s) = sum;
        }
    }
    return H;
}

PolarizedChannelGrid polarized_grid(const PolarizedSpatialMatrices &psp, const std::vector<double> &freqs,
                                    const std::vector<double> &times, bool components, Execution exec)
{
    if (freqs.empty() || times.empty())
        throw invalid_parameter("polarized_engine", "channel grid needs at least one time and one frequency");

    PolarizedChannelGrid grid;
    grid.times = times;
    grid.freqs = freqs;
    grid.cells.resize(times.size() * freqs.size());

    const Eigen::MatrixXcd rx_v = detail::fold_power(psp.rx_v, psp.rho);
    const Eigen::MatrixXcd rx_h = detail::fold_power(psp.rx_h, psp.rho);
    const TermFactors w = coupling_weights(psp);
    std::vector<Eigen::VectorXcd> doppler(times.size()), freq(freqs.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        doppler[i] = doppler_of(psp, times[i]);
    for (std::size_t k = 0; k < freqs.size(); ++k)
        freq[k] = frequency_of(psp, freqs[k]);

    const auto n_cells = static_cast<std::int64_t>(grid.cells.size());
    const std::size_t n_freqs = freqs.size();
#pragma omp parallel if (exec == Execution::parallel)
    {
        Eigen::MatrixXcd scratch;
#pragma omp for schedule(static)
        for (std::int64_t c = 0; c < n_cells; ++c)
            polarized_cell(psp, rx_v, rx_h, w, doppler[c / n_freqs], freq[c % n_freqs], components, scratch,
                           grid.cells[c]);
    }
    return grid;
}

std::uint64_t polarized_spatial_memory_bytes(std::uint64_t links, std::uint64_t subpaths, std::uint64_t rx_elements,
                                             std::uint64_t tx_elements, std::uint64_t real_width_bytes)
{
    const std::uint64_t scalar = spatial_memory_bytes(links, subpaths, rx_elements, tx_elements, real_width_bytes);
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(scalar, 2ULL, &out))
        throw invalid_parameter("polarized_engine", "polarized_spatial_memory_bytes overflows 64 bits");
    return out;
}

} // namespace gbscm
