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
#include "gbscm/param_pipeline.hpp"
#include "oracle.hpp"

#include <doctest.h>
#include <omp.h>

#include <limits>

using namespace gbscm;

namespace
{
LinkMultipath single_path(double power, double delay)
{
    LinkMultipath link;
    link.f0 = 3e9;
    Subpath p;
    p.power = power;
    p.delay = delay;
    p.arrival = {0.4, 1.0};
    p.departure = {2.0, -0.3};
    link.subpaths.push_back(p);
    return link;
}

const ArrayDescriptor origin = make_ula(1, 0.5, 3e9);
} // namespace

TEST_CASE("degenerate geometry collapses to the delay phase")
{
    const LinkMultipath link = single_path(1.0, 37e-9);
    for (double t : {0.0, 0.3, 17.0})
    {
        const double f = 2.9e9;
        const auto H = channel_baseline(link, origin, origin, f, t);
        REQUIRE(H.rows() == 1);
        REQUIRE(H.cols() == 1);
        const cplx ref = std::exp(cplx(0.0, -2.0 * oracle::PI * f * 37e-9));
        CHECK(std::abs(H(0, 0) - ref) < 1e-12);
        CHECK(std::abs(channel_baseline(link, origin, origin, 0.0, t)(0, 0) - 1.0) < 1e-15);
    }
    const LinkMultipath four = single_path(4.0, 10e-9);
    CHECK(std::abs(channel_baseline(four, origin, origin, 3e9, 0.2)(0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("baseline matches the scalar-loop oracle")
{
    ScenarioConfig cfg;
    cfg.rng_seed = 12;
    cfg.rx_speed_max = cfg.rx_speed_min = 3.0;
    cfg.tx_speed_max = 2.0;
    const LinkMultipath link = generate_link(cfg, 0).link;
    REQUIRE(link.size() == 240);
    const auto tx = make_ula(8, 0.5, cfg.f0, {0, 1, 0}, ElementPattern{Sectorized{}});
    const auto rx = make_upa(2, 2, 0.5, cfg.f0, ElementPattern{CosinePower{1.5, {pi / 2, 1.0}}});
    oracle::Gen g(3);
    for (int i = 0; i < 5; ++i)
    {
        const double f = g.frequency(cfg.f0), t = g.time();
        CHECK(oracle::rel_diff(channel_baseline(link, tx, rx, f, t), oracle::channel(link, tx, rx, f, t)) <= 1e-12);
    }
}

TEST_CASE("precompute_spatial entries")
{
    SUBCASE("single isotropic element gives unit entries")
    {
        oracle::Gen g(1);
        const auto link = g.link(7, 3e9, 1.0);
        const auto sp = precompute_spatial(link, origin, origin);
        CHECK(sp.tx.rows() == 1);
        CHECK(sp.tx.cols() == 7);
        CHECK((sp.tx.array() - cplx(1.0)).abs().maxCoeff() == 0.0);
        CHECK((sp.rx.array() - cplx(1.0)).abs().maxCoeff() == 0.0);
    }
    SUBCASE("half-wavelength pair along the arrival direction")
    {
        LinkMultipath link = single_path(1.0, 0.0);
        link.subpaths[0].arrival = {pi / 2, pi / 2};
        link.subpaths[0].departure = {pi / 2, pi / 2};
        const auto ula = make_ula(2, 0.5, 3e9, {0, 1, 0});
        const auto sp = precompute_spatial(link, ula, ula);
        // k0 * lambda/4 = pi/2
        CHECK(std::abs(std::arg(sp.rx(0, 0)) + pi / 2) < 1e-12);
        CHECK(std::abs(std::arg(sp.rx(1, 0)) - pi / 2) < 1e-12);
        CHECK(std::abs(std::abs(std::arg(sp.rx(1, 0) * std::conj(sp.rx(0, 0)))) - pi) < 1e-12);
        CHECK(std::abs(std::arg(sp.tx(1, 0) * std::conj(sp.tx(0, 0)))) == doctest::Approx(pi));
    }
    SUBCASE("zenith path is broadside to a horizontal ULA")
    {
        LinkMultipath link = single_path(1.0, 0.0);
        link.subpaths[0].departure = {0.0, 0.0};
        const auto sp = precompute_spatial(link, make_ula(6, 0.5, 3e9), origin);
        for (int s = 1; s < 6; ++s)
            CHECK(sp.tx(s, 0) == sp.tx(0, 0));
    }
    SUBCASE("entry moduli equal the pattern gains")
    {
        oracle::Gen g(9);
        const auto link = g.link(30, 3e9, 2.0);
        const ElementPattern ptx = Sectorized{}, prx = CosinePower{2.0, {1.2, 0.4}};
        const auto sp = precompute_spatial(link, make_ula(4, 0.5, 3e9, {0, 1, 0}, ptx),
                                           make_ula(3, 0.5, 3e9, {1, 0, 0}, prx));
        for (int m = 0; m < 30; ++m)
        {
            const auto &p = link.subpaths[m];
            for (int s = 0; s < 4; ++s)
                CHECK(std::abs(std::abs(sp.tx(s, m)) - oracle::gain(ptx, p.departure.theta, p.departure.phi)) <= 1e-12);
            for (int r = 0; r < 3; ++r)
                CHECK(std::abs(std::abs(sp.rx(r, m)) - oracle::gain(prx, p.arrival.theta, p.arrival.phi)) <= 1e-12);
            CHECK(sp.rho(m) >= 0.0);
            CHECK(sp.rho(m) * sp.rho(m) == doctest::Approx(p.power));
            CHECK(sp.tau(m) == p.delay);
        }
    }
}

TEST_CASE("optimized path equals the baseline")
{
    oracle::Gen g(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const int S = g.integer(1, 12), R = g.integer(1, 4), M = g.integer(1, 60);
        const auto link = g.link(M, 3e9, 5.0);
        const auto tx = make_ula(S, g.uniform(0.1, 2.0), 3e9, {0, 1, 0}, ElementPattern{Sectorized{}});
        const auto rx = make_upa(R, 2, 0.5, 3e9, ElementPattern{CosinePower{1.0, g.angles()}});
        const auto sp = precompute_spatial(link, tx, rx);
        const double f = g.frequency(3e9), t = g.time();
        worst = std::max(worst, oracle::rel_diff(channel_optimized(sp, f, t), channel_baseline(link, tx, rx, f, t)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("static and linearity laws")
{
    oracle::Gen g(5);
    auto link = g.link(40, 3e9, 0.0);
    link.v_rx = link.v_tx = Vec3{};
    const auto tx = make_ula(4, 0.5, 3e9), rx = make_ula(2, 0.5, 3e9);
    auto sp = precompute_spatial(link, tx, rx);
    const auto h0 = channel_optimized(sp, 3.01e9, 0.0);
    for (double t : {0.5, 10.0, 1e4})
        CHECK(channel_optimized(sp, 3.01e9, t) == h0);

    auto scaled = sp;
    scaled.rho *= 4.0;
    CHECK((channel_optimized(scaled, 3.01e9, 0.0) - 4.0 * h0).cwiseAbs().maxCoeff() <= 1e-12 * h0.cwiseAbs().maxCoeff());
    scaled.rho = sp.rho * 0.37;
    CHECK(oracle::rel_diff(channel_optimized(scaled, 3.01e9, 0.0), 0.37 * h0) <= 1e-12);
}

TEST_CASE("frequency shift law for a single subpath")
{
    oracle::Gen g(6);
    const auto link = g.link(1, 3e9, 2.0);
    const auto tx = make_ula(3, 0.5, 3e9), rx = make_ula(2, 0.5, 3e9);
    const auto sp = precompute_spatial(link, tx, rx);
    const double tau = link.subpaths[0].delay;
    for (int i = 0; i < 10; ++i)
    {
        const double f = g.frequency(3e9), d = g.uniform(-1e6, 1e6), t = g.time();
        const auto shifted = channel_optimized(sp, f + d, t);
        const Eigen::MatrixXcd ref = channel_optimized(sp, f, t) * std::exp(cplx(0.0, -2.0 * pi * d * tau));
        CHECK(oracle::rel_diff(shifted, ref) <= 1e-9);
    }
}

TEST_CASE("conjugation symmetry")
{
    // Negating phases, delays, velocities and element positions conjugates H.
    oracle::Gen g(31);
    const auto link = g.link(25, 3e9, 3.0);
    const auto tx = make_ula(5, 0.5, 3e9), rx = make_ula(3, 0.5, 3e9);
    const auto sp = precompute_spatial(link, tx, rx);
    SpatialMatrices mirror = sp;
    mirror.tx = sp.tx.conjugate();
    mirror.rx = sp.rx.conjugate();
    mirror.psi = sp.psi.conjugate();
    mirror.tau = -sp.tau;
    mirror.nu = -sp.nu;
    for (int i = 0; i < 5; ++i)
    {
        const double f = g.frequency(3e9), t = g.time();
        const auto H = channel_optimized(sp, f, t);
        CHECK(oracle::rel_diff(channel_optimized(mirror, f, t), H.conjugate()) <= 1e-12);
    }

    // Same statement at the input level: mirrored positions and velocities, negated phases.
    LinkMultipath neg = link;
    for (auto &p : neg.subpaths)
        p.phase = wrap_phase(-p.phase);
    neg.v_rx = -1.0 * link.v_rx;
    neg.v_tx = -1.0 * link.v_tx;
    ArrayDescriptor tx_m = tx, rx_m = rx;
    for (auto &p : tx_m.positions)
        p = -1.0 * p;
    for (auto &p : rx_m.positions)
        p = -1.0 * p;
    auto sp_neg = precompute_spatial(neg, tx_m, rx_m);
    sp_neg.tau = -sp_neg.tau;
    const double f = 3.002e9, t = 0.25;
    CHECK(oracle::rel_diff(channel_optimized(sp_neg, f, t), channel_optimized(sp, f, t).conjugate()) <= 1e-12);
}

TEST_CASE("channel_grid")
{
    oracle::Gen g(8);
    const auto link = g.link(50, 3e9, 2.0);
    const auto tx = make_ula(6, 0.5, 3e9), rx = make_ula(4, 0.5, 3e9);
    const auto sp = precompute_spatial(link, tx, rx);

    SUBCASE("1x1 grid")
    {
        const auto grid = channel_grid(sp, {3.001e9}, {0.2});
        REQUIRE(grid.cells.size() == 1);
        CHECK(grid.at(0, 0) == channel_optimized(sp, 3.001e9, 0.2));
    }
    SUBCASE("slices equal pointwise calls exactly")
    {
        const std::vector<double> freqs{2.99e9, 3e9, 3.02e9}, times{0.0, 0.1, 0.7, 2.0};
        const auto grid = channel_grid(sp, freqs, times, Execution::serial);
        CHECK(grid.times == times);
        CHECK(grid.freqs == freqs);
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t k = 0; k < freqs.size(); ++k)
            {
                CHECK(grid.at(i, k) == channel_optimized(sp, freqs[k], times[i]));
                CHECK(grid.at(i, k).rows() == 4);
                CHECK(grid.at(i, k).cols() == 6);
            }
    }
    SUBCASE("duplicated frequency gives duplicated slices")
    {
        const auto grid = channel_grid(sp, {3e9, 3.1e9, 3e9}, {0.4});
        CHECK(grid.at(0, 0) == grid.at(0, 2));
        CHECK_FALSE(grid.at(0, 0) == grid.at(0, 1));
    }
    SUBCASE("serial and parallel agree bitwise for any thread count")
    {
        std::vector<double> freqs, times;
        for (int k = 0; k < 24; ++k)
            freqs.push_back(3e9 + 15e3 * k);
        for (int i = 0; i < 5; ++i)
            times.push_back(1e-3 * i);
        const auto serial = channel_grid(sp, freqs, times, Execution::serial);
        const int saved = omp_get_max_threads();
        for (int threads : {1, 2, 4, 7})
        {
            omp_set_num_threads(threads);
            const auto par = channel_grid(sp, freqs, times, Execution::parallel);
            CHECK(par.cells == serial.cells);
        }
        omp_set_num_threads(saved);
    }
    SUBCASE("empty grids are rejected")
    {
        CHECK_THROWS_AS(channel_grid(sp, {}, {0.0}), invalid_parameter);
        CHECK_THROWS_AS(channel_grid(sp, {3e9}, {}), invalid_parameter);
    }
}

TEST_CASE("12-point frequency grid on the reference network equals baseline calls")
{
    ScenarioConfig cfg;
    cfg.link_count = 10;
    const auto links = generate_links(cfg);
    const auto tx = make_ula(8, 0.5, cfg.f0), rx = make_ula(4, 0.5, cfg.f0);
    std::vector<double> freqs;
    for (int k = 0; k < 12; ++k)
        freqs.push_back(cfg.f0 + (k - 5.5) * 15e3);
    double worst = 0.0;
    for (const auto &link : links)
    {
        const auto grid = channel_grid(precompute_spatial(link, tx, rx), freqs, {0.0});
        for (std::size_t k = 0; k < freqs.size(); ++k)
            worst = std::max(worst, oracle::rel_diff(grid.at(0, k), channel_baseline(link, tx, rx, freqs[k], 0.0)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("spatial_memory_bytes")
{
    CHECK(spatial_memory_bytes(10, 240, 4, 256, 8) == 19968000ULL);
    CHECK(spatial_memory_bytes(1, 1, 1, 1, 1) == 8ULL);
    CHECK(spatial_memory_bytes(10, 240, 4, 8, 8) == 921600ULL);
    const std::uint64_t big = std::numeric_limits<std::uint64_t>::max() / 2;
    CHECK_THROWS_AS(spatial_memory_bytes(big, big, 1, 1, 8), invalid_parameter);
    CHECK_THROWS_AS(spatial_memory_bytes(0, 1, 1, 1, 8), invalid_parameter);

    // The formula's factor 4 counts two reals per entry on top of R+S, so it is
    // twice the complex storage one link actually holds.
    oracle::Gen g(1);
    const auto sp = precompute_spatial(g.link(240, 3e9, 1.0), make_ula(256, 0.5, 3e9), make_ula(4, 0.5, 3e9));
    CHECK(2 * sp.storage_bytes() * 10 == spatial_memory_bytes(10, 240, 4, 256, 8));
}

TEST_CASE("input validation")
{
    const LinkMultipath link = single_path(1.0, 0.0);
    const auto other_f0 = make_ula(2, 0.5, 28e9);
    CHECK_THROWS_AS(channel_baseline(link, other_f0, origin, 3e9, 0.0), invalid_parameter);
    CHECK_THROWS_AS(precompute_spatial(link, origin, other_f0), invalid_parameter);
    const auto pol = make_ula(1, 0.5, 3e9, {0, 1, 0}, PolarizedPattern{});
    CHECK_THROWS_AS(precompute_spatial(link, pol, origin), invalid_parameter);
    LinkMultipath empty;
    empty.f0 = 3e9;
    CHECK_THROWS_AS(precompute_spatial(empty, origin, origin), invalid_parameter);
}
