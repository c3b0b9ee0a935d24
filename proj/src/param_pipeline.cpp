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

#include "gbscm/param_pipeline.hpp"
#include "gbscm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gbscm
{

namespace
{
constexpr double deg = pi / 180.0;

void require(bool ok, const char *field, const char *constraint)
{
    if (!ok)
        throw invalid_parameter("param_pipeline", std::string(field) + " " + constraint);
}

double uniform_phase(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0.0, two_pi);
    return wrap_phase(u(rng));
}

Vec3 horizontal_velocity(std::mt19937_64 &rng, double vmin, double vmax)
{
    std::uniform_real_distribution<double> speed_dist(vmin, vmax);
    std::uniform_real_distribution<double> heading_dist(-pi, pi);
    const double speed = vmax > vmin ? speed_dist(rng) : vmin;
    const double heading = heading_dist(rng);
    return {speed * std::cos(heading), speed * std::sin(heading), 0.0};
}

Angles offset_angles(std::mt19937_64 &rng, const Angles &mean, double az_sigma, double el_sigma)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    const double dphi = az_sigma * n01(rng);
    const double dtheta = el_sigma * n01(rng);
    return normalize({mean.theta + dtheta, mean.phi + dphi});
}
} // namespace

void ScenarioConfig::validate() const
{
    require(f0 > 0.0 && std::isfinite(f0), "f0", "must be > 0");
    require(link_count >= 1, "link_count", "must be >= 1");
    require(cluster_count >= 1, "cluster_count", "must be >= 1");
    require(subpaths_per_cluster >= 1, "subpaths_per_cluster", "must be >= 1");
    require(delay_spread > 0.0, "delay_spread", "must be > 0");
    require(azimuth_spread_deg > 0.0, "azimuth_spread_deg", "must be > 0");
    require(elevation_spread_deg > 0.0, "elevation_spread_deg", "must be > 0");
    require(cluster_elevation_spread_deg > 0.0, "cluster_elevation_spread_deg", "must be > 0");
    require(power_decay >= 0.0, "power_decay", "must be >= 0");
    require(shadowing_std_db >= 0.0, "shadowing_std_db", "must be >= 0");
    require(rx_speed_min >= 0.0 && rx_speed_max >= rx_speed_min, "rx_speed", "needs 0 <= min <= max");
    require(tx_speed_min >= 0.0 && tx_speed_max >= tx_speed_min, "tx_speed", "needs 0 <= min <= max");
    require(std::isfinite(xpr_db), "xpr_db", "must be finite");
    require(xpr_std_db >= 0.0, "xpr_std_db", "must be >= 0");
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(master) ^ mix(stream + 0x632be59bd9b4e019ULL));
}

LinkDraw generate_link(const ScenarioConfig &config, int link_index)
{
    config.validate();
    if (link_index < 0)
        throw invalid_parameter("param_pipeline", "link index must be >= 0");

    std::mt19937_64 rng(substream_seed(config.rng_seed, static_cast<std::uint64_t>(link_index)));
    std::normal_distribution<double> n01(0.0, 1.0);
    LinkDraw draw;

    // Large-scale parameters
    auto &lsp = draw.large_scale;
    lsp.power_scale = std::pow(10.0, config.shadowing_std_db * n01(rng) / 10.0);
    lsp.delay_spread = config.delay_spread;
    lsp.azimuth_spread_deg = config.azimuth_spread_deg;
    lsp.elevation_spread_deg = config.elevation_spread_deg;
    lsp.v_rx = horizontal_velocity(rng, config.rx_speed_min, config.rx_speed_max);
    lsp.v_tx = horizontal_velocity(rng, config.tx_speed_min, config.tx_speed_max);

    // Clusters
    const int n_clusters = config.cluster_count;
    std::exponential_distribution<double> delay_dist(1.0 / lsp.delay_spread);
    std::vector<double> delays(n_clusters);
    for (auto &d : delays)
        d = delay_dist(rng);
    std::sort(delays.begin(), delays.end());

    std::uniform_real_distribution<double> azimuth_dist(-pi, pi);
    const double cluster_el_sigma = config.cluster_elevation_spread_deg * deg;
    draw.clusters.resize(n_clusters);
    double cluster_power_sum = 0.0;
    for (int n = 0; n < n_clusters; ++n)
    {
        auto &c = draw.clusters[n];
        c.delay = delays[n];
        c.power = std::exp(-config.power_decay * c.delay / lsp.delay_spread);
        cluster_power_sum += c.power;
        c.arrival = normalize({pi / 2 + cluster_el_sigma * n01(rng), azimuth_dist(rng)});
        c.departure = normalize({pi / 2 + cluster_el_sigma * n01(rng), azimuth_dist(rng)});
    }
    for (auto &c : draw.clusters)
        c.power /= cluster_power_sum;

    // Subpaths
    const int per_cluster = config.subpaths_per_cluster;
    const double az_sigma = lsp.azimuth_spread_deg * deg;
    const double el_sigma = lsp.elevation_spread_deg * deg;
    auto &link = draw.link;
    link.f0 = config.f0;
    link.v_rx = lsp.v_rx;
    link.v_tx = lsp.v_tx;
    link.subpaths.reserve(static_cast<std::size_t>(n_clusters) * per_cluster);
    for (int n = 0; n < n_clusters; ++n)
    {
        const auto &c = draw.clusters[n];
        for (int k = 0; k < per_cluster; ++k)
        {
            Subpath sp;
            sp.power = c.power / per_cluster;
            sp.delay = c.delay;
            sp.cluster_index = n;
            if (per_cluster == 1)
            {
                sp.arrival = c.arrival;
                sp.departure = c.departure;
            }
            else
            {
                sp.arrival = offset_angles(rng, c.arrival, az_sigma, el_sigma);
                sp.departure = offset_angles(rng, c.departure, az_sigma, el_sigma);
            }
            link.subpaths.push_back(sp);
        }
    }
    const double total = std::accumulate(link.subpaths.begin(), link.subpaths.end(), 0.0,
                                         [](double acc, const Subpath &s) { return acc + s.power; });
    for (auto &sp : link.subpaths)
        sp.power *= lsp.power_scale / total;

    // Initial phases
    for (auto &sp : link.subpaths)
        sp.phase = uniform_phase(rng);

    if (config.polarized)
    {
        link.polarization.resize(link.subpaths.size());
        for (auto &p : link.polarization)
        {
            p.phase_vv = uniform_phase(rng);
            p.phase_vh = uniform_phase(rng);
            p.phase_hv = uniform_phase(rng);
            p.phase_hh = uniform_phase(rng);
            p.kappa = std::pow(10.0, (config.xpr_db + config.xpr_std_db * n01(rng)) / 10.0);
        }
    }
    return draw;
}

std::vector<LinkMultipath> generate_links(const ScenarioConfig &config)
{
    config.validate();
    std::vector<LinkMultipath> links(config.link_count);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < config.link_count; ++i)
        links[i] = generate_link(config, i).link;
    return links;
}

void draw_phases(std::uint64_t rng_seed, std::vector<double> &phases)
{
    std::mt19937_64 rng(substream_seed(rng_seed, 0x70686173ULL));
    for (auto &p : phases)
        p = uniform_phase(rng);
}

LinkMultipath redraw_phases(const LinkMultipath &link, std::uint64_t rng_seed)
{
    LinkMultipath out = link;
    std::vector<double> phases(link.size());
    draw_phases(rng_seed, phases);
    for (std::size_t m = 0; m < phases.size(); ++m)
        out.subpaths[m].phase = phases[m];

    if (link.polarized())
    {
        std::mt19937_64 rng(substream_seed(rng_seed, 0x706f6c32ULL));
        for (auto &p : out.polarization)
        {
            p.phase_vv = uniform_phase(rng);
            p.phase_vh = uniform_phase(rng);
            p.phase_hv = uniform_phase(rng);
            p.phase_hh = uniform_phase(rng);
        }
    }
    return out;
}

} // namespace gbscm
