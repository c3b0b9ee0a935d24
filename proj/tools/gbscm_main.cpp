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

#include "gbscm/cli_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <utility>

namespace
{
constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Geometry-based stochastic MIMO channel simulator", "gbscm"};
    app.set_version_flag("--version", GBSCM_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool print_config = false;
    bool full = false;

    const std::pair<const char *, const char *> subcommands[] = {
        {"simulate", "write the channel grid of every link to channel.csv"},
        {"bench", "time baseline against precomputed generation and write bench.csv"},
        {"covariance", "theoretical, time-averaged and ensemble spatial covariance"},
        {"convergence", "error of time and ensemble estimators against sample budget"},
    };
    for (const auto &[name, description] : subcommands)
    {
        auto *sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (bench also accepts a .csv file)");
        sub->add_option("--seed", seed, "override the configuration seed");
        sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
        if (std::string(name) == "bench")
            sub->add_flag("--full", full, "run the complete antenna and frequency sweep");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const auto cmd = gbscm::parse_subcommand(app.get_subcommands().front()->get_name());

    gbscm::RunConfig cfg;
    try
    {
        cfg = gbscm::load_config(config_path);
        if (app.get_subcommands().front()->count("--seed"))
            cfg.set_seed(seed);
    }
    catch (const gbscm::config_error &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }

    if (print_config)
    {
        std::cout << gbscm::print_config(cfg);
        return exit_ok;
    }

    try
    {
        const auto files = gbscm::run(*cmd, cfg, {out_dir, full});
        for (const auto &f : files)
            std::cout << f.string() << '\n';
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}
