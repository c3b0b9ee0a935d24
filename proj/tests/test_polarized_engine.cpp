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

#include "gbscm/error.hpp"
#include "gbscm/param_pipeline.hpp"
#include "gbscm/polarized_engine.hpp"
#include "oracle.hpp"

#include <doctest.h>
#include <omp.h>

using namespace gbscm;

namespace
{
const ElementPattern vertical_dipole = CosinePower{1.0, {pi / 2, 0.0}};

PolarizedPattern mixed_pattern()
{
    return {Sectorized{}, CosinePower{2.0, {1.3, 0.5}}};
}

PolarizedPattern vertical_only(const ElementPattern &v)
{
    return {v, NoResponse{}};
}

// Exchanges the V and H roles of patterns and per-subpath phases.
LinkMultipath swap_labels(LinkMultipath link)
{
    for (auto &p : link.polarization)
    {
        std::swap(p.phase_vv, p.phase_hh);
        std::swap(p.phase_vh, p.phase_hv);
    }
    return link;
}

PolarizedPattern swap_labels(const PolarizedPattern &p)
{
    return {p.horizontal, p.vertical};
}
} // namespace

TEST_CASE("zero horizontal response gives zero H matrices")
{
    oracle::Gen g(1);
    const auto link = g.link(20, 3e9, 1.0, true);
    const auto arr = make_ula(4, 0.5, 3e9, {0, 1, 0}, vertical_only(Isotropic{}));
    const auto psp = precompute_polarized(link, arr, arr);
    CHECK(psp.tx_h.cwiseAbs().maxCoeff() == 0.0);
    CHECK(psp.rx_h.cwiseAbs().maxCoeff() == 0.0);
    CHECK(psp.tx_v.cwiseAbs().minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("depolarization vector")
{
    oracle::Gen g(2);
    auto link = g.link(5, 3e9, 1.0, true);
    const double kappas[] = {1.0, 4.0, 100.0, 1e12, 1e300};
    for (int m = 0; m < 5; ++m)
        link.polarization[m].kappa = kappas[m];
    const auto arr = make_ula(2, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    const auto psp = precompute_polarized(link, arr, arr);
    CHECK(psp.kappa(0) == 1.0);
    CHECK(psp.kappa(1) == 0.5);
    CHECK(psp.kappa(2) == doctest::Approx(0.1));
    CHECK(psp.kappa(3) == doctest::Approx(1e-6));
    CHECK(psp.kappa(4) < 1e-149);
}

TEST_CASE("polarized spatial matrices match per-element evaluation")
{
    oracle::Gen g(3);
    const auto link = g.link(30, 3e9, 2.0, true);
    const auto tx = make_ula(5, 0.5, 3e9, {0, 1, 0}, mixed_pattern());
    const auto rx = make_upa(2, 2, 0.5, 3e9, PolarizedPattern{CosinePower{1.0, {1.0, 1.0}}, Isotropic{}});
    const auto psp = precompute_polarized(link, tx, rx);
    const double k = oracle::k0(3e9);
    const auto &ptx = std::get<PolarizedPattern>(tx.pattern);
    const auto &prx = std::get<PolarizedPattern>(rx.pattern);
    for (int m = 0; m < 30; ++m)
    {
        const auto &p = link.subpaths[m];
        const auto d = oracle::unit(p.departure.theta, p.departure.phi);
        const auto a = oracle::unit(p.arrival.theta, p.arrival.phi);
        for (int s = 0; s < 5; ++s)
        {
            const cplx steer = std::exp(cplx(0.0, k * oracle::dot3(d, tx.positions[s])));
            CHECK(std::abs(psp.tx_v(s, m) - oracle::gain(ptx.vertical, p.departure.theta, p.departure.phi) * steer) < 1e-12);
            CHECK(std::abs(psp.tx_h(s, m) - oracle::gain(ptx.horizontal, p.departure.theta, p.departure.phi) * steer) < 1e-12);
            // Same steering phase on both polarizations.
            if (std::abs(psp.tx_v(s, m)) > 0 && std::abs(psp.tx_h(s, m)) > 0)
                CHECK(std::abs(std::arg(psp.tx_v(s, m) * std::conj(psp.tx_h(s, m)))) < 1e-12);
        }
        for (int r = 0; r < 4; ++r)
        {
            const cplx steer = std::exp(cplx(0.0, k * oracle::dot3(a, rx.positions[r])));
            CHECK(std::abs(psp.rx_v(r, m) - oracle::gain(prx.vertical, p.arrival.theta, p.arrival.phi) * steer) < 1e-12);
            CHECK(std::abs(psp.rx_h(r, m) - oracle::gain(prx.horizontal, p.arrival.theta, p.arrival.phi) * steer) < 1e-12);
        }
        CHECK(psp.kappa(m) == doctest::Approx(1.0 / std::sqrt(link.polarization[m].kappa)));
    }
}

TEST_CASE("polarized channel matches the brute-force coupling sandwich")
{
    oracle::Gen g(4);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto link = g.link(g.integer(1, 80), 3e9, 3.0, true);
        const auto tx = make_ula(g.integer(1, 8), 0.5, 3e9, {0, 1, 0}, mixed_pattern());
        const auto rx = make_ula(g.integer(1, 4), 0.5, 3e9, {1, 0, 0}, PolarizedPattern{vertical_dipole, Isotropic{}});
        const auto psp = precompute_polarized(link, tx, rx);
        const double f = g.frequency(3e9), t = g.time();
        const auto ref = oracle::polarized_channel(link, tx, rx, f, t);
        CHECK(oracle::rel_diff(polarized_channel(psp, f, t), ref) <= 1e-12);
        CHECK(oracle::rel_diff(polarized_channel_baseline(link, tx, rx, f, t), ref) <= 1e-12);
    }
}

TEST_CASE("components sum to the channel")
{
    oracle::Gen g(5);
    const auto link = g.link(40, 3e9, 1.0, true);
    const auto arr = make_ula(3, 0.5, 3e9, {0, 1, 0}, mixed_pattern());
    const auto psp = precompute_polarized(link, arr, arr);
    const auto c = polarized_components(psp, 3.01e9, 0.3);
    CHECK(c.sum == c.vv + c.vh + c.hv + c.hh);
    CHECK(c.sum == polarized_channel(psp, 3.01e9, 0.3));

    // Each component is a rank-M product with its own coupling: compare with the
    // oracle on patterns that isolate one receive/transmit polarization pair.
    const std::pair<PolarizedPattern, const Eigen::MatrixXcd PolarizedChannel::*> isolate[] = {
        {{Isotropic{}, NoResponse{}}, &PolarizedChannel::vv},
        {{NoResponse{}, Isotropic{}}, &PolarizedChannel::hh},
    };
    for (const auto &[pattern, member] : isolate)
    {
        const auto a = make_ula(3, 0.5, 3e9, {0, 1, 0}, pattern);
        const auto p2 = precompute_polarized(link, a, a);
        const auto comps = polarized_components(p2, 3.01e9, 0.3);
        CHECK(oracle::rel_diff(comps.*member, oracle::polarized_channel(link, a, a, 3.01e9, 0.3)) <= 1e-12);
    }
    // Receive V only, transmit H only: the VH term alone survives.
    const auto rxv = make_ula(2, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{Isotropic{}, NoResponse{}});
    const auto txh = make_ula(3, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{NoResponse{}, Isotropic{}});
    const auto vh = polarized_components(precompute_polarized(link, txh, rxv), 3e9, 0.1);
    CHECK(vh.vv.cwiseAbs().maxCoeff() == 0.0);
    CHECK(oracle::rel_diff(vh.vh, oracle::polarized_channel(link, txh, rxv, 3e9, 0.1)) <= 1e-12);
}

TEST_CASE("vertical-only arrays collapse to the scalar engine")
{
    ScenarioConfig cfg;
    cfg.polarized = true;
    const auto link = generate_link(cfg, 0).link;
    LinkMultipath scalar = link;
    for (std::size_t m = 0; m < link.size(); ++m)
        scalar.subpaths[m].phase = link.polarization[m].phase_vv;
    scalar.polarization.clear();

    const auto tx = make_ula(8, 0.5, cfg.f0, {0, 1, 0}, vertical_only(Sectorized{}));
    const auto rx = make_ula(4, 0.5, cfg.f0, {0, 1, 0}, vertical_only(vertical_dipole));
    const auto psp = precompute_polarized(link, tx, rx);
    const auto sp = precompute_spatial(scalar, make_ula(8, 0.5, cfg.f0, {0, 1, 0}, ElementPattern{Sectorized{}}),
                                       make_ula(4, 0.5, cfg.f0, {0, 1, 0}, vertical_dipole));
    oracle::Gen g(6);
    for (int i = 0; i < 5; ++i)
    {
        const double f = g.frequency(cfg.f0), t = g.time();
        CHECK(polarized_channel(psp, f, t) == channel_optimized(sp, f, t));
    }
}

TEST_CASE("swapping V and H labels leaves the channel unchanged")
{
    oracle::Gen g(7);
    const auto link = g.link(30, 3e9, 2.0, true);
    const auto ptx = mixed_pattern();
    const PolarizedPattern prx{vertical_dipole, Sectorized{}};
    const auto tx = make_ula(4, 0.5, 3e9, {0, 1, 0}, ptx), rx = make_ula(2, 0.5, 3e9, {0, 1, 0}, prx);
    const auto tx_s = make_ula(4, 0.5, 3e9, {0, 1, 0}, swap_labels(ptx));
    const auto rx_s = make_ula(2, 0.5, 3e9, {0, 1, 0}, swap_labels(prx));
    const auto a = polarized_channel(precompute_polarized(link, tx, rx), 3.02e9, 0.4);
    const auto b = polarized_channel(precompute_polarized(swap_labels(link), tx_s, rx_s), 3.02e9, 0.4);
    CHECK(oracle::rel_diff(b, a) <= 1e-13);
}

TEST_CASE("cross-polar terms vanish as kappa grows")
{
    oracle::Gen g(8);
    auto link = g.link(30, 3e9, 1.0, true);
    const auto arr = make_ula(3, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    double previous = std::numeric_limits<double>::infinity();
    for (double kappa : {1.0, 1e2, 1e4, 1e8, 1e16})
    {
        for (auto &p : link.polarization)
            p.kappa = kappa;
        const auto c = polarized_components(precompute_polarized(link, arr, arr), 3e9, 0.2);
        const double cross = std::max(c.vh.cwiseAbs().maxCoeff(), c.hv.cwiseAbs().maxCoeff());
        CHECK(cross < previous);
        previous = cross;
    }
    CHECK(previous < 1e-7);
}

TEST_CASE("polarized storage is twice the scalar storage")
{
    CHECK(polarized_spatial_memory_bytes(10, 240, 4, 256, 8) == 2 * spatial_memory_bytes(10, 240, 4, 256, 8));
    oracle::Gen g(9);
    const auto link = g.link(240, 3e9, 1.0, true);
    const auto tx = make_ula(64, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    const auto rx = make_ula(4, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    CHECK(2 * precompute_polarized(link, tx, rx).storage_bytes() == polarized_spatial_memory_bytes(1, 240, 4, 64, 8));
}

TEST_CASE("polarized grid")
{
    oracle::Gen g(10);
    const auto link = g.link(40, 3e9, 1.0, true);
    const auto arr = make_ula(3, 0.5, 3e9, {0, 1, 0}, mixed_pattern());
    const auto psp = precompute_polarized(link, arr, arr);
    const std::vector<double> freqs{3e9, 3.001e9, 3.002e9}, times{0.0, 0.5};
    const auto serial = polarized_grid(psp, freqs, times, true, Execution::serial);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(3);
    const auto par = polarized_grid(psp, freqs, times, true, Execution::parallel);
    omp_set_num_threads(saved);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t k = 0; k < freqs.size(); ++k)
        {
            const auto ref = polarized_components(psp, freqs[k], times[i]);
            CHECK(serial.at(i, k).sum == ref.sum);
            CHECK(serial.at(i, k).hv == ref.hv);
            CHECK(par.at(i, k).sum == ref.sum);
        }
    const auto sums = polarized_grid(psp, freqs, times, false);
    CHECK(sums.at(1, 2).vv.size() == 0);
    CHECK(sums.at(1, 2).sum == serial.at(1, 2).sum);
    CHECK_THROWS_AS(polarized_grid(psp, {}, times, false), invalid_parameter);
}

TEST_CASE("polarized inputs are validated")
{
    oracle::Gen g(11);
    const auto pol_link = g.link(4, 3e9, 1.0, true);
    const auto scalar_link = g.link(4, 3e9, 1.0, false);
    const auto pol_arr = make_ula(2, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    const auto scalar_arr = make_ula(2, 0.5, 3e9);
    CHECK_THROWS_AS(precompute_polarized(pol_link, scalar_arr, pol_arr), invalid_parameter);
    CHECK_THROWS_AS(precompute_polarized(pol_link, pol_arr, scalar_arr), invalid_parameter);
    CHECK_THROWS_AS(precompute_polarized(scalar_link, pol_arr, pol_arr), invalid_parameter);
}
