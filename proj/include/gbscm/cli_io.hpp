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
#include "gbscm/bench_harness.hpp"
#include "gbscm/coeff_engine.hpp"
#include "gbscm/covariance_lab.hpp"
#include "gbscm/param_pipeline.hpp"
#include "gbscm/polarized_engine.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbscm
{

// Configuration problem; `key` is the dotted path of the offending entry.
class config_error : public std::runtime_error
{
public:
    config_error(std::string key, const std::string &constraint)
        : std::runtime_error(key + ": " + constraint), key_(std::move(key)) {}

    const std::string &key() const noexcept { return key_; }

private:
    std::string key_;
};

struct ArrayConfig
{
    std::string kind = "ula"; // "ula" or "upa"
    int count = 1;            // ula
    int rows = 1, cols = 1;   // upa
    double spacing = 0.5;     // wavelengths
    Vec3 axis{0.0, 1.0, 0.0}; // ula
    ArrayPattern pattern = ElementPattern{Isotropic{}};

    ArrayDescriptor build(double f0) const;

    friend bool operator==(const ArrayConfig &, const ArrayConfig &) = default;
};

// Either explicit lists or (count, step). Frequencies are offsets from f0;
// a count/spacing grid is centered on f0.
struct GridSpec
{
    std::vector<double> times;
    int time_count = 1;
    double time_step = 0.0;
    std::vector<double> freq_offsets;
    int freq_count = 1;
    double freq_spacing = 15e3;

    std::vector<double> resolve_times() const;
    std::vector<double> resolve_freqs(double f0) const; // absolute Hz

    friend bool operator==(const GridSpec &, const GridSpec &) = default;
};

struct CovarianceSettings
{
    Side side = Side::receive;
    int link = 0;
    double time = 0.0; // ensemble evaluation time
    std::size_t time_samples = 140;
    double time_step = 10e-3 / 140;
    std::size_t n_draws = 10000;
    double nu_tolerance = default_nu_tolerance;

    friend bool operator==(const CovarianceSettings &, const CovarianceSettings &) = default;
};

struct ConvergenceSettings
{
    int link = 0;
    double time_step = 10e-3 / 140;
    std::vector<std::size_t> horizons{140, 1400, 14000, 140000};
    std::vector<std::size_t> n_draws{10, 100, 1000, 10000};

    friend bool operator==(const ConvergenceSettings &, const ConvergenceSettings &) = default;
};

struct RunConfig
{
    std::uint64_t seed = 0;
    ScenarioConfig scenario; // scenario.f0 and scenario.rng_seed mirror the top-level keys
    ArrayConfig tx_array;
    ArrayConfig rx_array;
    GridSpec grid;
    bool polarized = false;
    bool components = false; // polarized simulate: also dump VV/VH/HV/HH
    CovarianceSettings covariance;
    ConvergenceSettings convergence;
    BenchConfig bench;

    void set_seed(std::uint64_t s);

    friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

// Parses a JSON document. Required keys: `f0`, `seed`. Every other key has a
// default; unknown keys are rejected. Throws config_error.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::filesystem::path &path);

// Full JSON dump with every default spelled out; parse_config(print_config(c)) == c.
std::string print_config(const RunConfig &cfg);

// CSV writers. Floating-point values use 17 significant digits.
void write_channel_csv(std::ostream &os, int link_id, const ChannelGrid &grid, bool header = true);
void write_polarized_csv(std::ostream &os, int link_id, const PolarizedChannelGrid &grid, bool components,
                         bool header = true);
void write_covariance_csv(std::ostream &os, const Eigen::MatrixXcd &k);
void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceRow> &rows);

enum class Subcommand
{
    simulate,
    bench,
    covariance,
    convergence
};

std::optional<Subcommand> parse_subcommand(const std::string &name);

struct RunOptions
{
    std::filesystem::path out; // directory; for bench a *.csv path names the report file
    bool full = false;         // bench only
};

// Executes a subcommand, writing its CSV outputs plus manifest.json under
// `out`. Returns the list of files written.
std::vector<std::filesystem::path> run(Subcommand cmd, const RunConfig &cfg, const RunOptions &opts);

} // namespace gbscm
