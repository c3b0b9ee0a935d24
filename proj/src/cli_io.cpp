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
#include "gbscm/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#ifndef GBSCM_VERSION
#define GBSCM_VERSION "0.0.0"
#endif

namespace gbscm
{

using json = nlohmann::json;

namespace
{
// Typed access to one JSON object that remembers which keys were consumed,
// so that leftovers can be reported as unknown.
class Section
{
public:
    Section(const json &node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object())
            throw config_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string &key) const { return node_.contains(key); }

    template <typename T>
    T get(const std::string &key, const T &fallback)
    {
        if (!node_.contains(key))
            return fallback;
        used_.insert(key);
        return convert<T>(node_.at(key), key_path(key));
    }

    template <typename T>
    T required(const std::string &key)
    {
        if (!node_.contains(key))
            throw config_error(key_path(key), "required key is missing");
        used_.insert(key);
        return convert<T>(node_.at(key), key_path(key));
    }

    const json *child(const std::string &key)
    {
        if (!node_.contains(key))
            return nullptr;
        used_.insert(key);
        return &node_.at(key);
    }

    void finish() const
    {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!used_.count(it.key()))
                throw config_error(key_path(it.key()), "unknown key");
    }

private:
    template <typename T>
    static T convert(const json &v, const std::string &where)
    {
        if constexpr (std::is_same_v<T, bool>)
        {
            if (!v.is_boolean())
                throw config_error(where, "expected a boolean");
            return v.get<bool>();
        }
        else if constexpr (std::is_same_v<T, std::string>)
        {
            if (!v.is_string())
                throw config_error(where, "expected a string");
            return v.get<std::string>();
        }
        else if constexpr (std::is_floating_point_v<T>)
        {
            if (!v.is_number())
                throw config_error(where, "expected a number");
            return v.get<T>();
        }
        else if constexpr (std::is_integral_v<T>)
        {
            if (!v.is_number_integer())
                throw config_error(where, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                    throw config_error(where, "must be >= 0");
            return v.get<T>();
        }
        else
        {
            if (!v.is_array())
                throw config_error(where, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
            return out;
        }
    }

    const json &node_;
    std::string path_;
    std::set<std::string> used_;
};

void check(bool ok, const std::string &key, const std::string &constraint)
{
    if (!ok)
        throw config_error(key, constraint);
}

std::string fmt_num(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- patterns

ElementPattern parse_element_pattern(const json &node, const std::string &path)
{
    Section s(node, path);
    const auto kind = s.required<std::string>("kind");
    ElementPattern out;
    if (kind == "isotropic")
        out = Isotropic{};
    else if (kind == "none")
        out = NoResponse{};
    else if (kind == "cosine")
    {
        CosinePower p;
        p.exponent = s.get("exponent", p.exponent);
        p.boresight.theta = s.get("boresight_theta", p.boresight.theta);
        p.boresight.phi = s.get("boresight_phi", p.boresight.phi);
        check(p.exponent > 0.0, s.key_path("exponent"), "must be > 0");
        check(p.boresight.theta >= 0.0 && p.boresight.theta <= pi, s.key_path("boresight_theta"),
              "zenith angle must lie in [0, pi]");
        out = p;
    }
    else if (kind == "sectorized")
    {
        Sectorized p;
        p.azimuth_beamwidth_deg = s.get("azimuth_beamwidth_deg", p.azimuth_beamwidth_deg);
        p.elevation_beamwidth_deg = s.get("elevation_beamwidth_deg", p.elevation_beamwidth_deg);
        p.max_attenuation_db = s.get("max_attenuation_db", p.max_attenuation_db);
        check(p.azimuth_beamwidth_deg > 0.0, s.key_path("azimuth_beamwidth_deg"), "must be > 0");
        check(p.elevation_beamwidth_deg > 0.0, s.key_path("elevation_beamwidth_deg"), "must be > 0");
        check(p.max_attenuation_db >= 0.0, s.key_path("max_attenuation_db"), "must be >= 0");
        out = p;
    }
    else
        throw config_error(s.key_path("kind"), "unknown pattern kind '" + kind + "'");
    s.finish();
    return out;
}

ArrayPattern parse_pattern(const json &node, const std::string &path)
{
    if (node.is_object() && node.contains("kind") && node.at("kind") == "polarized")
    {
        Section s(node, path);
        s.required<std::string>("kind");
        PolarizedPattern p;
        if (const json *v = s.child("vertical"))
            p.vertical = parse_element_pattern(*v, s.key_path("vertical"));
        if (const json *h = s.child("horizontal"))
            p.horizontal = parse_element_pattern(*h, s.key_path("horizontal"));
        s.finish();
        return p;
    }
    return parse_element_pattern(node, path);
}

json element_pattern_json(const ElementPattern &p)
{
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Isotropic>)
                return {{"kind", "isotropic"}};
            else if constexpr (std::is_same_v<T, NoResponse>)
                return {{"kind", "none"}};
            else if constexpr (std::is_same_v<T, CosinePower>)
                return {{"kind", "cosine"},
                        {"exponent", v.exponent},
                        {"boresight_theta", v.boresight.theta},
                        {"boresight_phi", v.boresight.phi}};
            else
                return {{"kind", "sectorized"},
                        {"azimuth_beamwidth_deg", v.azimuth_beamwidth_deg},
                        {"elevation_beamwidth_deg", v.elevation_beamwidth_deg},
                        {"max_attenuation_db", v.max_attenuation_db}};
        },
        p);
}

json pattern_json(const ArrayPattern &p)
{
    if (const auto *pol = std::get_if<PolarizedPattern>(&p))
        return {{"kind", "polarized"},
                {"vertical", element_pattern_json(pol->vertical)},
                {"horizontal", element_pattern_json(pol->horizontal)}};
    return element_pattern_json(std::get<ElementPattern>(p));
}

// ------------------------------------------------------------------ arrays

ArrayConfig parse_array(const json *node, const std::string &path, bool polarized)
{
    ArrayConfig a;
    bool explicit_pattern = false;
    if (node)
    {
        Section s(*node, path);
        a.kind = s.get("kind", a.kind);
        a.count = s.get("count", a.count);
        a.rows = s.get("rows", a.rows);
        a.cols = s.get("cols", a.cols);
        a.spacing = s.get("spacing", a.spacing);
        const auto axis = s.get("axis", std::vector<double>{a.axis.x, a.axis.y, a.axis.z});
        check(axis.size() == 3, s.key_path("axis"), "expected 3 components");
        a.axis = {axis[0], axis[1], axis[2]};
        if (const json *p = s.child("pattern"))
        {
            a.pattern = parse_pattern(*p, s.key_path("pattern"));
            explicit_pattern = true;
        }
        s.finish();
        check(a.kind == "ula" || a.kind == "upa", path + ".kind", "must be 'ula' or 'upa'");
        check(a.count >= 1, path + ".count", "must be >= 1");
        check(a.rows >= 1, path + ".rows", "must be >= 1");
        check(a.cols >= 1, path + ".cols", "must be >= 1");
        check(a.spacing > 0.0, path + ".spacing", "must be > 0");
        check(std::abs(norm(a.axis) - 1.0) <= 1e-9, path + ".axis", "must be a unit vector");
    }
    const bool pattern_polarized = std::holds_alternative<PolarizedPattern>(a.pattern);
    if (polarized && !pattern_polarized)
    {
        check(!explicit_pattern, path + ".pattern", "the polarized engine needs a 'polarized' pattern");
        a.pattern = PolarizedPattern{};
    }
    check(polarized || !pattern_polarized, path + ".pattern", "a polarized pattern needs polarized = true");
    return a;
}

json array_json(const ArrayConfig &a)
{
    return {{"kind", a.kind},       {"count", a.count},
            {"rows", a.rows},       {"cols", a.cols},
            {"spacing", a.spacing}, {"axis", {a.axis.x, a.axis.y, a.axis.z}},
            {"pattern", pattern_json(a.pattern)}};
}

// --------------------------------------------------------------- sections

void parse_scenario(const json *node, ScenarioConfig &sc)
{
    if (!node)
        return;
    Section s(*node, "scenario");
    sc.link_count = s.get("links", sc.link_count);
    sc.cluster_count = s.get("clusters", sc.cluster_count);
    sc.subpaths_per_cluster = s.get("subpaths_per_cluster", sc.subpaths_per_cluster);
    sc.delay_spread = s.get("delay_spread", sc.delay_spread);
    sc.azimuth_spread_deg = s.get("azimuth_spread_deg", sc.azimuth_spread_deg);
    sc.elevation_spread_deg = s.get("elevation_spread_deg", sc.elevation_spread_deg);
    sc.cluster_elevation_spread_deg = s.get("cluster_elevation_spread_deg", sc.cluster_elevation_spread_deg);
    sc.power_decay = s.get("power_decay", sc.power_decay);
    sc.shadowing_std_db = s.get("shadowing_std_db", sc.shadowing_std_db);
    sc.rx_speed_min = s.get("rx_speed_min", sc.rx_speed_min);
    sc.rx_speed_max = s.get("rx_speed_max", sc.rx_speed_max);
    sc.tx_speed_min = s.get("tx_speed_min", sc.tx_speed_min);
    sc.tx_speed_max = s.get("tx_speed_max", sc.tx_speed_max);
    sc.xpr_db = s.get("xpr_db", sc.xpr_db);
    sc.xpr_std_db = s.get("xpr_std_db", sc.xpr_std_db);
    s.finish();
}

json scenario_json(const ScenarioConfig &sc)
{
    return {{"links", sc.link_count},
            {"clusters", sc.cluster_count},
            {"subpaths_per_cluster", sc.subpaths_per_cluster},
            {"delay_spread", sc.delay_spread},
            {"azimuth_spread_deg", sc.azimuth_spread_deg},
            {"elevation_spread_deg", sc.elevation_spread_deg},
            {"cluster_elevation_spread_deg", sc.cluster_elevation_spread_deg},
            {"power_decay", sc.power_decay},
            {"shadowing_std_db", sc.shadowing_std_db},
            {"rx_speed_min", sc.rx_speed_min},
            {"rx_speed_max", sc.rx_speed_max},
            {"tx_speed_min", sc.tx_speed_min},
            {"tx_speed_max", sc.tx_speed_max},
            {"xpr_db", sc.xpr_db},
            {"xpr_std_db", sc.xpr_std_db}};
}

void parse_grid(const json *node, GridSpec &g)
{
    if (!node)
        return;
    Section s(*node, "grid");
    g.times = s.get("times", g.times);
    g.time_count = s.get("time_count", g.time_count);
    g.time_step = s.get("time_step", g.time_step);
    g.freq_offsets = s.get("freq_offsets", g.freq_offsets);
    g.freq_count = s.get("freq_count", g.freq_count);
    g.freq_spacing = s.get("freq_spacing", g.freq_spacing);
    s.finish();
    check(g.time_count >= 1, "grid.time_count", "must be >= 1");
    check(g.time_step >= 0.0, "grid.time_step", "must be >= 0");
    check(g.freq_count >= 1, "grid.freq_count", "must be >= 1");
    check(g.freq_spacing >= 0.0, "grid.freq_spacing", "must be >= 0");
}

json grid_json(const GridSpec &g)
{
    return {{"times", g.times},
            {"time_count", g.time_count},
            {"time_step", g.time_step},
            {"freq_offsets", g.freq_offsets},
            {"freq_count", g.freq_count},
            {"freq_spacing", g.freq_spacing}};
}

Side parse_side(const std::string &v, const std::string &key)
{
    if (v == "receive")
        return Side::receive;
    if (v == "transmit")
        return Side::transmit;
    throw config_error(key, "must be 'receive' or 'transmit'");
}

void parse_covariance(const json *node, CovarianceSettings &c)
{
    if (!node)
        return;
    Section s(*node, "covariance");
    c.side = parse_side(s.get<std::string>("side", to_string(c.side)), "covariance.side");
    c.link = s.get("link", c.link);
    c.time = s.get("time", c.time);
    c.time_samples = s.get("time_samples", c.time_samples);
    c.time_step = s.get("time_step", c.time_step);
    c.n_draws = s.get("n_draws", c.n_draws);
    c.nu_tolerance = s.get("nu_tolerance", c.nu_tolerance);
    s.finish();
    check(c.time_samples >= 1, "covariance.time_samples", "must be >= 1");
    check(c.time_step > 0.0, "covariance.time_step", "must be > 0");
    check(c.n_draws >= 1, "covariance.n_draws", "must be >= 1");
    check(c.nu_tolerance >= 0.0, "covariance.nu_tolerance", "must be >= 0");
}

json covariance_json(const CovarianceSettings &c)
{
    return {{"side", to_string(c.side)},       {"link", c.link},
            {"time", c.time},                  {"time_samples", c.time_samples},
            {"time_step", c.time_step},        {"n_draws", c.n_draws},
            {"nu_tolerance", c.nu_tolerance}};
}

void parse_convergence(const json *node, ConvergenceSettings &c)
{
    if (!node)
        return;
    Section s(*node, "convergence");
    c.link = s.get("link", c.link);
    c.time_step = s.get("time_step", c.time_step);
    c.horizons = s.get("horizons", c.horizons);
    c.n_draws = s.get("n_draws", c.n_draws);
    s.finish();
    check(c.time_step > 0.0, "convergence.time_step", "must be > 0");
    check(!c.horizons.empty() || !c.n_draws.empty(), "convergence", "needs horizons or n_draws");
    for (auto h : c.horizons)
        check(h >= 1, "convergence.horizons", "entries must be >= 1");
    for (auto n : c.n_draws)
        check(n >= 1, "convergence.n_draws", "entries must be >= 1");
}

json convergence_json(const ConvergenceSettings &c)
{
    return {{"link", c.link}, {"time_step", c.time_step}, {"horizons", c.horizons}, {"n_draws", c.n_draws}};
}

void parse_bench(const json *node, BenchConfig &b)
{
    if (node)
    {
        Section s(*node, "bench");
        b.tx_antenna_sweep = s.get("tx_antenna_sweep", b.tx_antenna_sweep);
        b.rx_antennas = s.get("rx_antennas", b.rx_antennas);
        b.freq_point_sweep = s.get("freq_point_sweep", b.freq_point_sweep);
        b.links = s.get("links", b.links);
        b.clusters = s.get("clusters", b.clusters);
        b.subpaths_per_cluster = s.get("subpaths_per_cluster", b.subpaths_per_cluster);
        b.repetitions = s.get("repetitions", b.repetitions);
        b.warmup = s.get("warmup", b.warmup);
        b.subcarrier_spacing = s.get("subcarrier_spacing", b.subcarrier_spacing);
        b.time = s.get("time", b.time);
        b.desk_max_tx = s.get("desk_max_tx", b.desk_max_tx);
        b.desk_max_freqs = s.get("desk_max_freqs", b.desk_max_freqs);
        b.min_sample_seconds = s.get("min_sample_seconds", b.min_sample_seconds);
        b.gate_cells = s.get("gate_cells", b.gate_cells);
        const auto extra = s.get("extra_cells", std::vector<std::vector<int>>{});
        b.extra_cells.clear();
        for (const auto &cell : extra)
        {
            check(cell.size() == 2, "bench.extra_cells", "entries are [tx_antennas, freq_points]");
            b.extra_cells.emplace_back(cell[0], cell[1]);
        }
        s.finish();
    }
    try
    {
        b.validate();
    }
    catch (const invalid_parameter &e)
    {
        throw config_error("bench", e.what());
    }
}

json bench_json(const BenchConfig &b)
{
    json extra = json::array();
    for (const auto &[tx, nf] : b.extra_cells)
        extra.push_back({tx, nf});
    return {{"tx_antenna_sweep", b.tx_antenna_sweep},
            {"rx_antennas", b.rx_antennas},
            {"freq_point_sweep", b.freq_point_sweep},
            {"links", b.links},
            {"clusters", b.clusters},
            {"subpaths_per_cluster", b.subpaths_per_cluster},
            {"repetitions", b.repetitions},
            {"warmup", b.warmup},
            {"subcarrier_spacing", b.subcarrier_spacing},
            {"time", b.time},
            {"desk_max_tx", b.desk_max_tx},
            {"desk_max_freqs", b.desk_max_freqs},
            {"min_sample_seconds", b.min_sample_seconds},
            {"gate_cells", b.gate_cells},
            {"extra_cells", extra}};
}

// ------------------------------------------------------------------ output

void write_real(std::ostream &os, double v)
{
    os << std::scientific << std::setprecision(16) << v;
}

std::filesystem::path prepare_dir(const std::filesystem::path &dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::runtime_error("cli_io: cannot create output directory " + dir.string());
    return dir;
}

std::ofstream open_out(const std::filesystem::path &p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw std::runtime_error("cli_io: cannot write " + p.string());
    return os;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::uint64_t ensemble_seed(std::uint64_t seed)
{
    return substream_seed(seed, 0x656e73ULL);
}
} // namespace

// -------------------------------------------------------------- RunConfig

ArrayDescriptor ArrayConfig::build(double f0) const
{
    if (kind == "upa")
        return make_upa(rows, cols, spacing, f0, pattern);
    return make_ula(count, spacing, f0, axis, pattern);
}

std::vector<double> GridSpec::resolve_times() const
{
    if (!times.empty())
        return times;
    std::vector<double> out(time_count);
    for (int i = 0; i < time_count; ++i)
        out[i] = i * time_step;
    return out;
}

std::vector<double> GridSpec::resolve_freqs(double f0) const
{
    std::vector<double> out;
    if (!freq_offsets.empty())
    {
        for (double off : freq_offsets)
            out.push_back(f0 + off);
        return out;
    }
    const double center = 0.5 * (freq_count - 1);
    for (int k = 0; k < freq_count; ++k)
        out.push_back(f0 + (k - center) * freq_spacing);
    return out;
}

void RunConfig::set_seed(std::uint64_t s)
{
    seed = s;
    scenario.rng_seed = s;
    bench.seed = s;
}

RunConfig parse_config(const std::string &text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw config_error("<document>", std::string("malformed JSON: ") + e.what());
    }

    Section s(root, "");
    RunConfig cfg;
    const double f0 = s.required<double>("f0");
    check(std::isfinite(f0) && f0 > 0.0, "f0", "must be > 0 (got " + fmt_num(f0) + ")");
    cfg.scenario.f0 = f0;
    cfg.bench.f0 = f0;
    cfg.set_seed(s.required<std::uint64_t>("seed"));
    cfg.polarized = s.get("polarized", false);
    cfg.scenario.polarized = cfg.polarized;
    cfg.bench.polarized = cfg.polarized;
    cfg.components = s.get("components", false);

    parse_scenario(s.child("scenario"), cfg.scenario);
    cfg.tx_array = parse_array(s.child("tx_array"), "tx_array", cfg.polarized);
    cfg.rx_array = parse_array(s.child("rx_array"), "rx_array", cfg.polarized);
    parse_grid(s.child("grid"), cfg.grid);
    parse_covariance(s.child("covariance"), cfg.covariance);
    parse_convergence(s.child("convergence"), cfg.convergence);
    parse_bench(s.child("bench"), cfg.bench);
    s.finish();

    try
    {
        cfg.scenario.validate();
    }
    catch (const invalid_parameter &e)
    {
        throw config_error("scenario", e.what());
    }
    check(cfg.covariance.link >= 0 && cfg.covariance.link < cfg.scenario.link_count, "covariance.link",
          "must index an existing link");
    check(cfg.convergence.link >= 0 && cfg.convergence.link < cfg.scenario.link_count, "convergence.link",
          "must index an existing link");
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("--config", "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string print_config(const RunConfig &cfg)
{
    json root = {{"f0", cfg.scenario.f0},
                 {"seed", cfg.seed},
                 {"polarized", cfg.polarized},
                 {"components", cfg.components},
                 {"scenario", scenario_json(cfg.scenario)},
                 {"tx_array", array_json(cfg.tx_array)},
                 {"rx_array", array_json(cfg.rx_array)},
                 {"grid", grid_json(cfg.grid)},
                 {"covariance", covariance_json(cfg.covariance)},
                 {"convergence", convergence_json(cfg.convergence)},
                 {"bench", bench_json(cfg.bench)}};
    return root.dump(2) + "\n";
}

// -------------------------------------------------------------------- CSV

void write_channel_csv(std::ostream &os, int link_id, const ChannelGrid &grid, bool header)
{
    if (header)
        os << "link_id,t_index,f_index,rx,tx,real,imag\n";
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (std::size_t k = 0; k < grid.freqs.size(); ++k)
        {
            const auto &H = grid.at(i, k);
            for (Eigen::Index r = 0; r < H.rows(); ++r)
                for (Eigen::Index s = 0; s < H.cols(); ++s)
                {
                    os << link_id << ',' << i << ',' << k << ',' << r << ',' << s << ',';
                    write_real(os, H(r, s).real());
                    os << ',';
                    write_real(os, H(r, s).imag());
                    os << '\n';
                }
        }
}

void write_polarized_csv(std::ostream &os, int link_id, const PolarizedChannelGrid &grid, bool components,
                         bool header)
{
    if (header)
        os << "link_id,t_index,f_index,rx,tx," << (components ? "pol_term," : "") << "real,imag\n";
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (std::size_t k = 0; k < grid.freqs.size(); ++k)
        {
            const auto &cell = grid.at(i, k);
            std::vector<std::pair<const char *, const Eigen::MatrixXcd *>> terms{{"sum", &cell.sum}};
            if (components)
                terms = {{"VV", &cell.vv}, {"VH", &cell.vh}, {"HV", &cell.hv}, {"HH", &cell.hh}, {"sum", &cell.sum}};
            for (Eigen::Index r = 0; r < cell.sum.rows(); ++r)
                for (Eigen::Index s = 0; s < cell.sum.cols(); ++s)
                    for (const auto &[name, H] : terms)
                    {
                        os << link_id << ',' << i << ',' << k << ',' << r << ',' << s << ',';
                        if (components)
                            os << name << ',';
                        write_real(os, (*H)(r, s).real());
                        os << ',';
                        write_real(os, (*H)(r, s).imag());
                        os << '\n';
                    }
        }
}

void write_covariance_csv(std::ostream &os, const Eigen::MatrixXcd &k)
{
    os << "row,col,real,imag\n";
    for (Eigen::Index r = 0; r < k.rows(); ++r)
        for (Eigen::Index c = 0; c < k.cols(); ++c)
        {
            os << r << ',' << c << ',';
            write_real(os, k(r, c).real());
            os << ',';
            write_real(os, k(r, c).imag());
            os << '\n';
        }
}

void write_convergence_csv(std::ostream &os, const std::vector<ConvergenceRow> &rows)
{
    os << "estimator,budget,error\n";
    for (const auto &row : rows)
    {
        os << row.estimator << ',' << row.budget << ',';
        write_real(os, row.error);
        os << '\n';
    }
}

// -------------------------------------------------------------------- run

std::optional<Subcommand> parse_subcommand(const std::string &name)
{
    if (name == "simulate")
        return Subcommand::simulate;
    if (name == "bench")
        return Subcommand::bench;
    if (name == "covariance")
        return Subcommand::covariance;
    if (name == "convergence")
        return Subcommand::convergence;
    return std::nullopt;
}

std::vector<std::filesystem::path> run(Subcommand cmd, const RunConfig &cfg, const RunOptions &opts)
{
    const auto start = std::chrono::steady_clock::now();
    const double f0 = cfg.scenario.f0;
    std::vector<std::filesystem::path> written;
    json extra = json::object();
    std::string name;

    std::filesystem::path dir = opts.out.empty() ? std::filesystem::path("out") : opts.out;
    std::filesystem::path bench_file;
    if (cmd == Subcommand::bench && dir.extension() == ".csv")
    {
        bench_file = dir;
        dir = dir.has_parent_path() ? dir.parent_path() : std::filesystem::path(".");
    }
    prepare_dir(dir);

    if (cfg.polarized && (cmd == Subcommand::covariance || cmd == Subcommand::convergence))
        throw invalid_parameter("covariance_lab", "covariance analysis is only defined for the scalar engine");

    switch (cmd)
    {
    case Subcommand::simulate:
    {
        name = "simulate";
        const auto links = generate_links(cfg.scenario);
        const auto tx = cfg.tx_array.build(f0);
        const auto rx = cfg.rx_array.build(f0);
        const auto freqs = cfg.grid.resolve_freqs(f0);
        const auto times = cfg.grid.resolve_times();
        const auto path = dir / "channel.csv";
        auto os = open_out(path);
        for (std::size_t l = 0; l < links.size(); ++l)
        {
            if (cfg.polarized)
                write_polarized_csv(os, static_cast<int>(l),
                                    polarized_grid(precompute_polarized(links[l], tx, rx), freqs, times,
                                                   cfg.components),
                                    cfg.components, l == 0);
            else
                write_channel_csv(os, static_cast<int>(l), channel_grid(precompute_spatial(links[l], tx, rx), freqs, times),
                                  l == 0);
        }
        written.push_back(path);
        extra["links"] = links.size();
        extra["freq_points"] = freqs.size();
        extra["time_points"] = times.size();
        break;
    }
    case Subcommand::bench:
    {
        name = "bench";
        BenchConfig b = cfg.bench;
        b.full = opts.full;
        const BenchReport report = run_bench(b);
        const auto path = bench_file.empty() ? dir / "bench.csv" : bench_file;
        auto os = open_out(path);
        write_bench_csv(os, report);
        written.push_back(path);
        extra["cpu"] = report.cpu;
        extra["build_flags"] = report.build_flags;
        extra["gate_max_relative_error"] = report.gate_max_error;
        extra["full"] = opts.full;
        json cells = json::array();
        for (const auto &c : report.cells)
            cells.push_back({{"tx_antennas", c.tx_antennas},
                             {"freq_points", c.freq_points},
                             {"baseline_inner_iterations", c.baseline_inner_iterations},
                             {"optimized_inner_iterations", c.optimized_inner_iterations}});
        extra["cells"] = cells;
        break;
    }
    case Subcommand::covariance:
    {
        name = "covariance";
        const auto &cs = cfg.covariance;
        const auto link = generate_link(cfg.scenario, cs.link).link;
        const auto sp = precompute_spatial(link, cfg.tx_array.build(f0), cfg.rx_array.build(f0));
        const auto theory = theoretical_covariance(sp, cs.side, cs.nu_tolerance);
        const auto time = sample_covariance_time(sp, f0, 0.0, cs.time_step, cs.time_samples, cs.side);
        const auto ens = sample_covariance_ensemble(sp, f0, cs.time, cs.n_draws, ensemble_seed(cfg.seed), cs.side);

        const std::pair<const char *, const Eigen::MatrixXcd *> outputs[] = {
            {"covariance_theoretical.csv", &theory.matrix},
            {"covariance_time.csv", &time.matrix},
            {"covariance_ensemble.csv", &ens.matrix}};
        for (const auto &[file, k] : outputs)
        {
            auto os = open_out(dir / file);
            write_covariance_csv(os, *k);
            written.push_back(dir / file);
        }
        extra["side"] = to_string(cs.side);
        extra["time_error"] = frobenius_relative_error(time.matrix, theory.matrix);
        extra["ensemble_error"] = frobenius_relative_error(ens.matrix, theory.matrix);
        extra["doppler_distinct"] = doppler_gram(sp, cs.nu_tolerance, cs.side).diagonal;
        break;
    }
    case Subcommand::convergence:
    {
        name = "convergence";
        const auto &cv = cfg.convergence;
        const auto link = generate_link(cfg.scenario, cv.link).link;
        const auto sp = precompute_spatial(link, cfg.tx_array.build(f0), cfg.rx_array.build(f0));
        ConvergenceConfig cc;
        cc.f = f0;
        cc.time_step = cv.time_step;
        cc.horizons = cv.horizons;
        cc.n_draws = cv.n_draws;
        cc.seed = ensemble_seed(cfg.seed);
        cc.side = cfg.covariance.side;
        cc.nu_tolerance = cfg.covariance.nu_tolerance;
        const auto rows = convergence_experiment(sp, cc);
        const auto path = dir / "convergence.csv";
        auto os = open_out(path);
        write_convergence_csv(os, rows);
        written.push_back(path);
        for (const char *est : {"time", "ensemble"})
        {
            const auto reach = samples_to_reach(rows, est, 0.05);
            extra[std::string(est) + "_samples_to_5pct"] = reach ? json(*reach) : json(nullptr);
        }
        break;
    }
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"subcommand", name},
                     {"version", GBSCM_VERSION},
                     {"seed", cfg.seed},
                     {"timestamp", utc_timestamp()},
                     {"wall_time_s", wall},
                     {"config", json::parse(print_config(cfg))},
                     {"results", extra}};
    json outputs = json::array();
    for (const auto &p : written)
        outputs.push_back(p.filename().string());
    manifest["outputs"] = outputs;
    const auto mpath = dir / "manifest.json";
    auto os = open_out(mpath);
    os << manifest.dump(2) << '\n';
    written.push_back(mpath);
    return written;
}

} // namespace gbscm
