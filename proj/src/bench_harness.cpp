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

#include "gbscm/bench_harness.hpp"
#include "gbscm/error.hpp"
#include "gbscm/param_pipeline.hpp"
#include "gbscm/polarized_engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <stdexcept>

#ifndef GBSCM_BUILD_FLAGS
#define GBSCM_BUILD_FLAGS "unknown"
#endif

namespace gbscm
{

namespace
{
using clock_type = std::chrono::steady_clock;

struct Setup
{
    std::vector<LinkMultipath> links;
    ArrayDescriptor rx;
};

ArrayPattern bench_pattern(bool polarized)
{
    if (polarized)
        return PolarizedPattern{Isotropic{}, Isotropic{}};
    return ElementPattern{Isotropic{}};
}

Setup make_setup(const BenchConfig &cfg)
{
    ScenarioConfig sc;
    sc.f0 = cfg.f0;
    sc.link_count = cfg.links;
    sc.cluster_count = cfg.clusters;
    sc.subpaths_per_cluster = cfg.subpaths_per_cluster;
    sc.polarized = cfg.polarized;
    sc.rng_seed = cfg.seed;
    return {generate_links(sc), make_ula(cfg.rx_antennas, 0.5, cfg.f0, {0.0, 1.0, 0.0}, bench_pattern(cfg.polarized))};
}

std::vector<double> subcarriers(const BenchConfig &cfg, int count)
{
    std::vector<double> f(count);
    const double center = 0.5 * (count - 1);
    for (int k = 0; k < count; ++k)
        f[k] = cfg.f0 + (k - center) * cfg.subcarrier_spacing;
    return f;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename Fn>
double seconds_of(Fn &&fn, int inner)
{
    const auto start = clock_type::now();
    for (int i = 0; i < inner; ++i)
        fn();
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

// Smallest power-of-two repeat count whose run outlasts the sampling floor.
template <typename Fn>
int calibrate(Fn &&fn, const BenchConfig &cfg)
{
    for (int w = 0; w < cfg.warmup; ++w)
        fn();
    const double tick = std::chrono::duration<double>(clock_type::duration(1)).count();
    const double floor = std::max(cfg.min_sample_seconds, 1000.0 * tick);
    int inner = 1;
    while (seconds_of(fn, inner) < floor && inner < (1 << 20))
        inner *= 2;
    return inner;
}

// Each repetition brackets one baseline sample between two optimized samples, so
// machine-speed drift during the (long) baseline run cancels to first order in
// the ratio. Seconds are per-call medians; the speedup is the median ratio.
template <typename Base, typename Opt>
void time_paired(Base &&baseline, Opt &&optimized, const BenchConfig &cfg, BenchCell &cell)
{
    cell.baseline_inner_iterations = calibrate(baseline, cfg);
    cell.optimized_inner_iterations = calibrate(optimized, cfg);
    const int nb = cell.baseline_inner_iterations, no = cell.optimized_inner_iterations;
    std::vector<double> base(cfg.repetitions), opt(cfg.repetitions), ratio(cfg.repetitions);
    for (int r = 0; r < cfg.repetitions; ++r)
    {
        const double before = seconds_of(optimized, no) / no;
        base[r] = seconds_of(baseline, nb) / nb;
        const double after = seconds_of(optimized, no) / no;
        opt[r] = 0.5 * (before + after);
        ratio[r] = base[r] / opt[r];
    }
    cell.baseline_seconds = median(base);
    cell.optimized_seconds = median(opt);
    cell.speedup = median(ratio);
}

std::string cpu_string()
{
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("model name", 0) == 0)
        {
            const auto pos = line.find(':');
            return pos == std::string::npos ? line : line.substr(pos + 2);
        }
    return "unknown";
}

volatile double sink = 0.0;
} // namespace

void BenchConfig::validate() const
{
    auto fail = [](const std::string &what) { throw invalid_parameter("bench_harness", what); };
    if (tx_antenna_sweep.empty() || freq_point_sweep.empty())
        fail("antenna and frequency sweeps must be nonempty");
    for (int v : tx_antenna_sweep)
        if (v < 1)
            fail("tx antenna counts must be >= 1");
    for (int v : freq_point_sweep)
        if (v < 1)
            fail("frequency point counts must be >= 1");
    if (rx_antennas < 1 || links < 1 || clusters < 1 || subpaths_per_cluster < 1)
        fail("rx_antennas, links, clusters and subpaths_per_cluster must be >= 1");
    if (repetitions < 3)
        fail("repetitions must be >= 3");
    if (warmup < 0)
        fail("warmup must be >= 0");
    if (!(f0 > 0.0) || !(subcarrier_spacing > 0.0))
        fail("f0 and subcarrier_spacing must be > 0");
    if (gate_cells < 5)
        fail("gate_cells must be >= 5");
}

std::vector<std::pair<int, int>> BenchConfig::active_cells() const
{
    std::vector<std::pair<int, int>> cells;
    for (int tx : tx_antenna_sweep)
        for (int nf : freq_point_sweep)
        {
            const bool desk = tx <= desk_max_tx && nf <= desk_max_freqs;
            const bool extra = std::find(extra_cells.begin(), extra_cells.end(), std::pair{tx, nf}) != extra_cells.end();
            if (full || desk || extra)
                cells.emplace_back(tx, nf);
        }
    return cells;
}

const BenchCell *BenchReport::find(int tx_antennas, int freq_points) const
{
    for (const auto &c : cells)
        if (c.tx_antennas == tx_antennas && c.freq_points == freq_points)
            return &c;
    return nullptr;
}

GateResult verify_equivalence_gate(const BenchConfig &cfg, const OptimizedFn &optimized)
{
    cfg.validate();
    const Setup setup = make_setup(cfg);
    auto cells = cfg.active_cells();
    if (cells.empty())
        cells.emplace_back(cfg.tx_antenna_sweep.front(), cfg.freq_point_sweep.front());

    std::mt19937_64 rng(substream_seed(cfg.seed, 0x67617465ULL));
    GateResult result;
    for (int c = 0; c < cfg.gate_cells; ++c)
    {
        const auto &link = setup.links[std::uniform_int_distribution<int>(0, cfg.links - 1)(rng)];
        const auto [n_tx, n_f] = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
        const auto freqs = subcarriers(cfg, n_f);
        const double f = freqs[std::uniform_int_distribution<int>(0, n_f - 1)(rng)];
        const auto tx = make_ula(n_tx, 0.5, cfg.f0, {0.0, 1.0, 0.0}, bench_pattern(cfg.polarized));

        double err = 0.0;
        if (cfg.polarized)
        {
            const auto base = polarized_channel_baseline(link, tx, setup.rx, f, cfg.time);
            err = relative_difference(polarized_channel(precompute_polarized(link, tx, setup.rx), f, cfg.time), base);
        }
        else
        {
            const auto base = channel_baseline(link, tx, setup.rx, f, cfg.time);
            const auto sp = precompute_spatial(link, tx, setup.rx);
            err = relative_difference(optimized ? optimized(sp, f, cfg.time) : channel_optimized(sp, f, cfg.time), base);
        }
        result.max_relative_error = std::max(result.max_relative_error, err);
        ++result.cells_checked;
    }
    result.passed = result.max_relative_error <= equivalence_tolerance;
    return result;
}

BenchReport run_bench(const BenchConfig &cfg)
{
    cfg.validate();
    const GateResult gate = verify_equivalence_gate(cfg);
    if (!gate.passed)
        throw std::runtime_error("bench_harness: equivalence gate failed, max relative error " +
                                 std::to_string(gate.max_relative_error));

    const Setup setup = make_setup(cfg);
    const std::vector<double> times{cfg.time};
    const auto M = static_cast<std::uint64_t>(cfg.clusters) * cfg.subpaths_per_cluster;

    BenchReport report;
    report.gate_max_error = gate.max_relative_error;
    report.cpu = cpu_string();
    report.build_flags = GBSCM_BUILD_FLAGS;

    for (const auto &[n_tx, n_f] : cfg.active_cells())
    {
        const auto tx = make_ula(n_tx, 0.5, cfg.f0, {0.0, 1.0, 0.0}, bench_pattern(cfg.polarized));
        const auto freqs = subcarriers(cfg, n_f);

        auto baseline = [&] {
            double acc = 0.0;
            for (const auto &link : setup.links)
                for (double f : freqs)
                {
                    const auto H = cfg.polarized ? polarized_channel_baseline(link, tx, setup.rx, f, cfg.time)
                                                 : channel_baseline(link, tx, setup.rx, f, cfg.time);
                    acc += H(0, 0).real();
                }
            sink = sink + acc;
        };
        auto optimized = [&] {
            double acc = 0.0;
            for (const auto &link : setup.links)
            {
                if (cfg.polarized)
                {
                    const auto grid = polarized_grid(precompute_polarized(link, tx, setup.rx), freqs, times, false,
                                                     Execution::serial);
                    acc += grid.cells.back().sum(0, 0).real();
                }
                else
                {
                    const auto grid = channel_grid(precompute_spatial(link, tx, setup.rx), freqs, times,
                                                   Execution::serial);
                    acc += grid.cells.back()(0, 0).real();
                }
            }
            sink = sink + acc;
        };

        BenchCell cell;
        cell.tx_antennas = n_tx;
        cell.freq_points = n_f;
        time_paired(baseline, optimized, cfg, cell);
        cell.memory_bytes = cfg.polarized ? polarized_spatial_memory_bytes(cfg.links, M, cfg.rx_antennas, n_tx, sizeof(double))
                                          : spatial_memory_bytes(cfg.links, M, cfg.rx_antennas, n_tx, sizeof(double));
        report.cells.push_back(cell);
    }
    return report;
}

void write_bench_csv(std::ostream &os, const BenchReport &report)
{
    os << "tx_antennas,freq_points,baseline_s,optimized_s,speedup,memory_bytes\n";
    os << std::scientific << std::setprecision(16);
    for (const auto &c : report.cells)
        os << c.tx_antennas << ',' << c.freq_points << ',' << c.baseline_seconds << ',' << c.optimized_seconds << ','
           << c.speedup << ',' << c.memory_bytes << '\n';
}

} // namespace gbscm
