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

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace gbscm
{

// Baseline vs factorized channel generation over antenna counts and
// frequency-grid sizes: one base station (S elements) serving `links` users
// (R elements each), channels for all users at a single time over F subcarriers.
struct BenchConfig
{
    std::vector<int> tx_antenna_sweep{8, 16, 32, 64, 128, 256};
    int rx_antennas = 4;
    std::vector<int> freq_point_sweep{12, 120, 1200};
    int links = 10;
    int clusters = 24;
    int subpaths_per_cluster = 10; // 240 subpaths per link
    int repetitions = 3;
    int warmup = 1;
    double f0 = 3.0e9;
    double subcarrier_spacing = 15e3;
    double time = 0.0;
    bool polarized = false;
    std::uint64_t seed = 1;
    // Without `full`, cells beyond desk_max_tx x desk_max_freqs are skipped
    // unless listed in extra_cells.
    bool full = false;
    int desk_max_tx = 64;
    int desk_max_freqs = 120;
    std::vector<std::pair<int, int>> extra_cells; // (tx antennas, freq points)
    // A timed sample shorter than this is repeated with a doubled inner loop.
    double min_sample_seconds = 5e-3;
    int gate_cells = 5;

    void validate() const;
    // Cells that run under the current `full` / desk-scale settings, sweep order.
    std::vector<std::pair<int, int>> active_cells() const;

    friend bool operator==(const BenchConfig &, const BenchConfig &) = default;
};

struct BenchCell
{
    int tx_antennas = 0;
    int freq_points = 0;
    double baseline_seconds = 0.0;  // median over repetitions
    double optimized_seconds = 0.0; // median, includes precompute of the spatial matrices
    double speedup = 0.0; // median of paired per-repetition ratios
    std::uint64_t memory_bytes = 0;
    int baseline_inner_iterations = 1;
    int optimized_inner_iterations = 1;
};

struct BenchReport
{
    std::vector<BenchCell> cells;
    double gate_max_error = 0.0;
    std::string cpu;
    std::string build_flags;

    const BenchCell *find(int tx_antennas, int freq_points) const;
};

struct GateResult
{
    bool passed = false;
    double max_relative_error = 0.0;
    int cells_checked = 0;
};

// Optimized-path override used for fault injection in tests.
using OptimizedFn = std::function<Eigen::MatrixXcd(const SpatialMatrices &, double f, double t)>;

inline constexpr double equivalence_tolerance = 1e-12;

// Compares baseline and optimized channels on cfg.gate_cells random (link, antennas, frequency) cells.
GateResult verify_equivalence_gate(const BenchConfig &cfg, const OptimizedFn &optimized = {});

// Runs the gate, then times every active cell single-threaded. Throws
// std::runtime_error if the gate fails.
BenchReport run_bench(const BenchConfig &cfg);

// tx_antennas,freq_points,baseline_s,optimized_s,speedup,memory_bytes
void write_bench_csv(std::ostream &os, const BenchReport &report);

} // namespace gbscm
