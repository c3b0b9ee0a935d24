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

#include "gbscm/core_model.hpp"

#include <cstdint>
#include <vector>

namespace gbscm
{

// Scenario-level knobs of the stochastic parameter generator. Distributions
// are deliberately simple:
//   - link power scale: log-normal shadowing, 10^(N(0, shadowing_std_db)/10)
//   - endpoint speeds: uniform in [min, max], heading uniform in the x-y plane
//   - cluster delays: i.i.d. exponential, mean (= rms) delay_spread, sorted ascending
//   - cluster powers: exp(-power_decay * tau_n / delay_spread), normalized
//   - cluster mean azimuths: uniform on the circle; mean zeniths 90 deg + N(0, cluster_elevation_spread_deg)
//   - subpath angles: cluster mean + wrapped-Gaussian offsets (azimuth_spread_deg, elevation_spread_deg)
//   - subpath delay equals its cluster delay; cluster power is split evenly
//   - phases: i.i.d. uniform on [0, 2pi)
//   - polarized links: four uniform phases per subpath and kappa = 10^(N(xpr_db, xpr_std_db)/10)
// Cross-link correlation of large-scale parameters is not modeled.
struct ScenarioConfig
{
    double f0 = 3.0e9;
    int link_count = 1;
    int cluster_count = 24;
    int subpaths_per_cluster = 10;
    double delay_spread = 100e-9;
    double azimuth_spread_deg = 5.0;
    double elevation_spread_deg = 3.0;
    double cluster_elevation_spread_deg = 10.0;
    double power_decay = 1.0;
    double shadowing_std_db = 0.0;
    double rx_speed_min = 1.0;
    double rx_speed_max = 1.0;
    double tx_speed_min = 0.0;
    double tx_speed_max = 0.0;
    bool polarized = false;
    double xpr_db = 9.0;
    double xpr_std_db = 3.0;
    std::uint64_t rng_seed = 1;

    void validate() const;

    friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;
};

struct LargeScaleParams
{
    double power_scale = 1.0;
    double delay_spread = 0.0;
    double azimuth_spread_deg = 0.0;
    double elevation_spread_deg = 0.0;
    Vec3 v_tx;
    Vec3 v_rx;
};

struct ClusterParams
{
    double delay = 0.0;
    double power = 0.0;
    Angles arrival;
    Angles departure;
};

// Every intermediate stage of one link's generation.
struct LinkDraw
{
    LargeScaleParams large_scale;
    std::vector<ClusterParams> clusters;
    LinkMultipath link;
};

// Seed of an independent RNG substream (SplitMix64 finalizer over both inputs).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream);

// Generates link `link_index` of the scenario from its own substream.
LinkDraw generate_link(const ScenarioConfig &config, int link_index);

// All L links. Link i depends only on (config, rng_seed, i), so the per-link
// work can run in parallel without changing the result.
std::vector<LinkMultipath> generate_links(const ScenarioConfig &config);

// Copy of `link` with every initial phase redrawn i.i.d. uniform on [0, 2pi).
// Powers, delays, angles, velocities and kappa are left untouched.
LinkMultipath redraw_phases(const LinkMultipath &link, std::uint64_t rng_seed);

// The phase draw used by redraw_phases for the scalar model, exposed so that
// ensemble kernels can skip copying the link.
void draw_phases(std::uint64_t rng_seed, std::vector<double> &phases);

} // namespace gbscm
