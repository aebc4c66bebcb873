#pragma once

/**
 * \file config.hpp
 *
 * Simulation configuration: a flat key=value table layered as
 * defaults < config file < MODESEL_* environment < command-line overrides,
 * then validated into typed settings. Unknown keys and out-of-range values
 * are rejected with the key named in the message.
 *
 * Environment overrides: MODESEL_<KEY> with '.' written as "__", e.g.
 * MODESEL_ENGINE__RUNS=20 sets engine.runs.
 */

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "error.hpp"
#include "kv.hpp"
#include "radio.hpp"
#include "selection.hpp"
#include "slices.hpp"

extern char** environ;

namespace modesel {

inline constexpr const char* kResultsSchema = "modesel-results v1";

enum class SweepVar { speed, users };

inline constexpr std::string_view to_string(SweepVar v) { return v == SweepVar::speed ? "speed" : "users"; }

struct EngineConfig {
    std::uint64_t seed = 1;
    int runs = 10;
    int steps = 100;
    double dt_s = 1.0;
    double area_m = 1000.0;
    int n_enb = 1;
    int n_gnb = 2;
    int users = 60;         // fixed population for the speed sweep
    double speed_mps = 6.0; // fixed speed for the users sweep
    int node_capacity = 50;
    int packet_bytes = 1500;
    int workers = 0; // 0: one per hardware thread
    SweepVar sweep = SweepVar::speed;
    std::vector<double> speeds{2, 4, 6, 8, 10};
    std::vector<int> user_counts{20, 40, 60, 80, 100};
    Slice slice = Slice::embb;
    std::vector<Selector> selectors{kAllSelectors.begin(), kAllSelectors.end()};
    bool step_log = false;
    double max_d2d_distance_m = 80.0;
    Level1Source level1_source = Level1Source::printed;
    int jitter_window = 20;
};

struct CalibConfig {
    std::size_t n = 512;
    double rate = 0.5;
    std::uint64_t code_seed = 7;
    int max_iters = ldpc::kDefaultMaxIters;
    double snr_min_db = -4.0;
    double snr_max_db = 24.0;
    double snr_step_db = 1.0;
    int trials = 1000;
    std::uint64_t seed = 1;
    std::string file = "calibration.txt";
    bool per_packet_decode = false;

    std::vector<double> grid() const { return snr_grid(snr_min_db, snr_max_db, snr_step_db); }
};

struct SimConfig {
    EngineConfig engine;
    PhyParams phy;
    SelectParams select;
    CalibConfig calib;
    AhpData ahp = default_ahp_data();
    kv::Table effective; // every key with its effective value, for echo and hashing

    std::string echo() const
    {
        std::string out = "# effective configuration\n";
        for (const auto& [k, v] : effective)
            out += k + " = " + v + "\n";
        return out;
    }
    std::uint64_t hash() const { return kv::fnv1a(echo()); }
    std::string hash_hex() const
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
        return buf;
    }
};

namespace detail {

using Setter = std::function<void(SimConfig&, const std::string& key, const std::string& value)>;

struct KeySpec {
    std::string key;
    std::string default_value;
    Setter apply;
};

inline std::string fmt_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

[[noreturn]] inline void out_of_range(const std::string& key, const std::string& value, const std::string& what)
{
    throw config_error("'" + key + "' = " + value + " is out of range: " + what);
}

inline double real_in(const std::string& key, const std::string& value, double lo, double hi, bool lo_open = false)
{
    const double v = kv::to_double(key, value);
    if (!std::isfinite(v) || (lo_open ? !(v > lo) : !(v >= lo)) || !(v <= hi))
        out_of_range(key, value, std::string("expected ") + (lo_open ? "(" : "[") + fmt_num(lo) + ", " +
                                     fmt_num(hi) + "]");
    return v;
}

inline std::int64_t int_in(const std::string& key, const std::string& value, std::int64_t lo, std::int64_t hi)
{
    const auto v = kv::to_int(key, value);
    if (v < lo || v > hi)
        out_of_range(key, value, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

inline std::uint64_t seed_value(const std::string& key, const std::string& value)
{
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw config_error("malformed seed for '" + key + "': '" + value + "'");
    return v;
}

inline ModulationScheme modulation_value(const std::string& key, const std::string& value)
{
    const auto m = parse_modulation(value);
    if (!m)
        throw config_error("'" + key + "': unknown modulation '" + value + "'");
    return *m;
}

template <typename T>
std::string join(const std::vector<T>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i)
            out += ",";
        if constexpr (std::is_same_v<T, Selector>)
            out += to_string(xs[i]);
        else
            out += fmt_num(static_cast<double>(xs[i]));
    }
    return out;
}

inline void add_rat_keys(std::vector<KeySpec>& specs, RatId id)
{
    const std::string p = "phy." + std::string(to_string(id)) + ".";
    const Rat r = default_rat(id);
    const auto idx = static_cast<std::size_t>(id);
    specs.push_back({p + "carrier_ghz", fmt_num(r.carrier_ghz), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].carrier_ghz = real_in(k, v, 0.1, 100.0);
                     }});
    specs.push_back({p + "bandwidth_hz", fmt_num(r.bandwidth_hz), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].bandwidth_hz = real_in(k, v, 1e3, 1e10);
                     }});
    specs.push_back({p + "scs_khz", fmt_num(r.scs_khz), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].scs_khz = real_in(k, v, 1.0, 1000.0);
                     }});
    specs.push_back({p + "tx_power_dbm", fmt_num(r.tx_power_dbm), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].tx_power_dbm = real_in(k, v, -50.0, 80.0);
                     }});
    specs.push_back({p + "noise_figure_db", fmt_num(r.noise_figure_db), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].noise_figure_db = real_in(k, v, 0.0, 30.0);
                     }});
    specs.push_back({p + "max_modulation", std::string(to_string(r.max_modulation)),
                     [idx](SimConfig& c, auto& k, auto& v) { c.phy.rats[idx].max_modulation = modulation_value(k, v); }});
    specs.push_back({p + "diversity_bonus_db", fmt_num(r.diversity_bonus_db), [idx](SimConfig& c, auto& k, auto& v) {
                         c.phy.rats[idx].diversity_bonus_db = real_in(k, v, -20.0, 20.0);
                     }});
}

inline const std::vector<KeySpec>& key_specs()
{
    static const std::vector<KeySpec> specs = [] {
        const EngineConfig e;
        const PhyParams ph;
        const SelectParams s;
        const CalibConfig cal;
        std::vector<KeySpec> v;
        auto add = [&v](std::string key, std::string def, Setter f) { v.push_back({std::move(key), std::move(def), std::move(f)}); };

        // engine
        add("engine.seed", std::to_string(e.seed), [](SimConfig& c, auto& k, auto& x) { c.engine.seed = seed_value(k, x); });
        add("engine.runs", std::to_string(e.runs), [](SimConfig& c, auto& k, auto& x) {
            c.engine.runs = static_cast<int>(int_in(k, x, 2, 100000));
        });
        add("engine.steps", std::to_string(e.steps), [](SimConfig& c, auto& k, auto& x) {
            c.engine.steps = static_cast<int>(int_in(k, x, 1, 10000000));
        });
        add("engine.dt_s", fmt_num(e.dt_s), [](SimConfig& c, auto& k, auto& x) { c.engine.dt_s = real_in(k, x, 0.0, 3600.0, true); });
        add("engine.area_m", fmt_num(e.area_m), [](SimConfig& c, auto& k, auto& x) { c.engine.area_m = real_in(k, x, 0.0, 1e6, true); });
        add("engine.n_enb", std::to_string(e.n_enb), [](SimConfig& c, auto& k, auto& x) {
            c.engine.n_enb = static_cast<int>(int_in(k, x, 1, 1000));
        });
        add("engine.n_gnb", std::to_string(e.n_gnb), [](SimConfig& c, auto& k, auto& x) {
            c.engine.n_gnb = static_cast<int>(int_in(k, x, 1, 1000));
        });
        add("engine.users", std::to_string(e.users), [](SimConfig& c, auto& k, auto& x) {
            c.engine.users = static_cast<int>(int_in(k, x, 2, 100000));
        });
        add("engine.speed_mps", fmt_num(e.speed_mps), [](SimConfig& c, auto& k, auto& x) {
            c.engine.speed_mps = real_in(k, x, 0.0, 100.0);
        });
        add("engine.node_capacity", std::to_string(e.node_capacity), [](SimConfig& c, auto& k, auto& x) {
            c.engine.node_capacity = static_cast<int>(int_in(k, x, 1, 1000000));
        });
        add("engine.packet_bytes", std::to_string(e.packet_bytes), [](SimConfig& c, auto& k, auto& x) {
            c.engine.packet_bytes = static_cast<int>(int_in(k, x, 1, 1000000));
        });
        add("engine.workers", std::to_string(e.workers), [](SimConfig& c, auto& k, auto& x) {
            c.engine.workers = static_cast<int>(int_in(k, x, 0, 1024));
        });
        add("engine.sweep", "speed", [](SimConfig& c, auto& k, auto& x) {
            if (x == "speed")
                c.engine.sweep = SweepVar::speed;
            else if (x == "users")
                c.engine.sweep = SweepVar::users;
            else
                throw config_error("'" + k + "' must be 'speed' or 'users', got '" + x + "'");
        });
        add("engine.speeds", join(e.speeds), [](SimConfig& c, auto& k, auto& x) {
            c.engine.speeds.clear();
            for (const auto& item : kv::split(x, ','))
                c.engine.speeds.push_back(real_in(k, item, 0.0, 100.0));
            if (c.engine.speeds.empty())
                throw config_error("'" + k + "' needs at least one value");
        });
        add("engine.user_counts", join(e.user_counts), [](SimConfig& c, auto& k, auto& x) {
            c.engine.user_counts.clear();
            for (const auto& item : kv::split(x, ','))
                c.engine.user_counts.push_back(static_cast<int>(int_in(k, item, 2, 100000)));
            if (c.engine.user_counts.empty())
                throw config_error("'" + k + "' needs at least one value");
        });
        add("engine.slice", "embb", [](SimConfig& c, auto& k, auto& x) {
            const auto s = parse_slice(x);
            if (!s)
                throw config_error("'" + k + "': unknown slice '" + x + "' (embb, urllc, mmtc)");
            c.engine.slice = *s;
        });
        add("engine.selectors", join(e.selectors), [](SimConfig& c, auto& k, auto& x) {
            c.engine.selectors.clear();
            for (const auto& item : kv::split(x, ',')) {
                const auto s = parse_selector(item);
                if (!s)
                    throw config_error("'" + k + "': unknown selector '" + item + "'");
                if (std::find(c.engine.selectors.begin(), c.engine.selectors.end(), *s) == c.engine.selectors.end())
                    c.engine.selectors.push_back(*s);
            }
            if (c.engine.selectors.empty())
                throw config_error("'" + k + "' needs at least one selector");
        });
        add("engine.step_log", "false", [](SimConfig& c, auto& k, auto& x) { c.engine.step_log = kv::to_bool(k, x); });
        add("engine.max_d2d_distance_m", fmt_num(e.max_d2d_distance_m), [](SimConfig& c, auto& k, auto& x) {
            c.engine.max_d2d_distance_m = real_in(k, x, 0.0, 1e5);
        });
        add("engine.level1_source", "printed", [](SimConfig& c, auto& k, auto& x) {
            const auto s = parse_level1_source(x);
            if (!s)
                throw config_error("'" + k + "' must be 'printed' or 'recomputed', got '" + x + "'");
            c.engine.level1_source = *s;
        });
        add("engine.jitter_window", std::to_string(e.jitter_window), [](SimConfig& c, auto& k, auto& x) {
            c.engine.jitter_window = static_cast<int>(int_in(k, x, 2, 100000));
        });

        // phy
        for (const auto id : {RatId::nr, RatId::lte, RatId::d2d})
            add_rat_keys(v, id);
        add("phy.bs_height_m", fmt_num(ph.bs_height_m), [](SimConfig& c, auto& k, auto& x) { c.phy.bs_height_m = real_in(k, x, 1.0, 500.0); });
        add("phy.ue_height_m", fmt_num(ph.ue_height_m), [](SimConfig& c, auto& k, auto& x) { c.phy.ue_height_m = real_in(k, x, 1.0, 22.5); });
        add("phy.shadow_sigma_db", fmt_num(ph.shadow_sigma_db), [](SimConfig& c, auto& k, auto& x) {
            c.phy.shadow_sigma_db = real_in(k, x, 0.0, 30.0);
        });
        add("phy.speed_penalty_db_per_mps", fmt_num(ph.speed_penalty_db_per_mps), [](SimConfig& c, auto& k, auto& x) {
            c.phy.speed_penalty_db_per_mps = real_in(k, x, 0.0, 10.0);
        });
        for (const auto m : kAllModulations) {
            const auto i = static_cast<std::size_t>(modulation_index(m));
            add("phy.mod_penalty_db." + std::string(to_string(m)), fmt_num(ph.modulation_penalty_db[i]),
                [i](SimConfig& c, auto& k, auto& x) { c.phy.modulation_penalty_db[i] = real_in(k, x, 0.0, 30.0); });
        }
        add("phy.overhead", fmt_num(ph.overhead), [](SimConfig& c, auto& k, auto& x) { c.phy.overhead = real_in(k, x, 0.0, 0.99); });
        add("phy.bler_target", fmt_num(ph.bler_target), [](SimConfig& c, auto& k, auto& x) {
            c.phy.bler_target = real_in(k, x, 0.0, 1.0, true);
        });
        add("phy.latency.sched_tti", fmt_num(ph.sched_tti), [](SimConfig& c, auto& k, auto& x) { c.phy.sched_tti = real_in(k, x, 0.0, 100.0); });
        add("phy.latency.decode_tti", fmt_num(ph.decode_tti), [](SimConfig& c, auto& k, auto& x) { c.phy.decode_tti = real_in(k, x, 0.0, 100.0); });
        add("phy.latency.harq_rtt_tti", fmt_num(ph.harq_rtt_tti), [](SimConfig& c, auto& k, auto& x) {
            c.phy.harq_rtt_tti = real_in(k, x, 0.0, 100.0);
        });
        add("phy.latency.queue_base_ms", fmt_num(ph.queue_base_ms), [](SimConfig& c, auto& k, auto& x) {
            c.phy.queue_base_ms = real_in(k, x, 0.0, 1000.0);
        });
        add("phy.latency.queue_speed_ref_mps", fmt_num(ph.queue_speed_ref_mps), [](SimConfig& c, auto& k, auto& x) {
            c.phy.queue_speed_ref_mps = real_in(k, x, 0.0, 1000.0, true);
        });
        add("phy.latency.cap_ms", fmt_num(ph.latency_cap_ms), [](SimConfig& c, auto& k, auto& x) {
            c.phy.latency_cap_ms = real_in(k, x, 0.0, 1e6, true);
        });
        add("phy.calibration_file", cal.file, [](SimConfig& c, auto& k, auto& x) {
            if (x.empty())
                throw config_error("'" + k + "' must not be empty");
            c.calib.file = x;
        });
        add("phy.per_packet_decode", "false", [](SimConfig& c, auto& k, auto& x) { c.calib.per_packet_decode = kv::to_bool(k, x); });

        // ldpc / calibration
        add("ldpc.n", std::to_string(cal.n), [](SimConfig& c, auto& k, auto& x) {
            const auto n = int_in(k, x, 16, 1 << 16);
            if (n % 2)
                out_of_range(k, x, "block length must be even");
            c.calib.n = static_cast<std::size_t>(n);
        });
        add("ldpc.rate", fmt_num(cal.rate), [](SimConfig& c, auto& k, auto& x) { c.calib.rate = real_in(k, x, 0.05, 0.95); });
        add("ldpc.seed", std::to_string(cal.code_seed), [](SimConfig& c, auto& k, auto& x) { c.calib.code_seed = seed_value(k, x); });
        add("ldpc.max_iters", std::to_string(cal.max_iters), [](SimConfig& c, auto& k, auto& x) {
            c.calib.max_iters = static_cast<int>(int_in(k, x, 1, 1000));
        });
        add("calib.snr_min_db", fmt_num(cal.snr_min_db), [](SimConfig& c, auto& k, auto& x) { c.calib.snr_min_db = real_in(k, x, -50.0, 80.0); });
        add("calib.snr_max_db", fmt_num(cal.snr_max_db), [](SimConfig& c, auto& k, auto& x) { c.calib.snr_max_db = real_in(k, x, -50.0, 80.0); });
        add("calib.snr_step_db", fmt_num(cal.snr_step_db), [](SimConfig& c, auto& k, auto& x) {
            c.calib.snr_step_db = real_in(k, x, 0.01, 20.0);
        });
        add("calib.trials", std::to_string(cal.trials), [](SimConfig& c, auto& k, auto& x) {
            c.calib.trials = static_cast<int>(int_in(k, x, 100, 10000000));
        });
        add("calib.seed", std::to_string(cal.seed), [](SimConfig& c, auto& k, auto& x) { c.calib.seed = seed_value(k, x); });

        // selection
        add("select.hysteresis_db", fmt_num(s.hysteresis_db), [](SimConfig& c, auto& k, auto& x) {
            c.select.hysteresis_db = real_in(k, x, 0.0, std::numeric_limits<double>::max());
        });
        add("select.sigmoid.center", fmt_num(s.sigmoid_center_dbm), [](SimConfig& c, auto& k, auto& x) {
            c.select.sigmoid_center_dbm = real_in(k, x, -200.0, 50.0);
        });
        add("select.sigmoid.scale", fmt_num(s.sigmoid_scale_db), [](SimConfig& c, auto& k, auto& x) {
            c.select.sigmoid_scale_db = real_in(k, x, 0.0, 100.0, true);
        });
        add("select.sdn.hom_cqi", std::to_string(s.sdn_hom_cqi), [](SimConfig& c, auto& k, auto& x) {
            c.select.sdn_hom_cqi = static_cast<int>(int_in(k, x, 0, 15));
        });
        add("select.sdn.ttt_steps", std::to_string(s.sdn_ttt_steps), [](SimConfig& c, auto& k, auto& x) {
            c.select.sdn_ttt_steps = static_cast<int>(int_in(k, x, 1, 100000));
        });
        add("select.jmsra.ber_threshold", fmt_num(s.jmsra_ber_threshold), [](SimConfig& c, auto& k, auto& x) {
            c.select.jmsra_ber_threshold = real_in(k, x, 0.0, 1.0, true);
        });
        add("select.jmsra.rate_min_bps", fmt_num(s.jmsra_rate_min_bps), [](SimConfig& c, auto& k, auto& x) {
            c.select.jmsra_rate_min_bps = real_in(k, x, 0.0, 1e12, true);
        });
        add("select.jmsra.hysteresis_db", fmt_num(s.jmsra_hysteresis_db), [](SimConfig& c, auto& k, auto& x) {
            c.select.jmsra_hysteresis_db = real_in(k, x, 0.0, std::numeric_limits<double>::max());
        });
        return v;
    }();
    return specs;
}

inline const KeySpec* find_spec(const std::string& key)
{
    for (const auto& s : key_specs())
        if (s.key == key)
            return &s;
    return nullptr;
}

} // namespace detail

inline kv::Table default_config_table()
{
    kv::Table t;
    for (const auto& s : detail::key_specs())
        t[s.key] = s.default_value;
    return t;
}

/// MODESEL_ENGINE__RUNS=20 -> {"engine.runs", "20"}. Variables without "__" are not config keys.
inline kv::Table environment_overrides(char** env = environ)
{
    kv::Table t;
    if (!env)
        return t;
    constexpr std::string_view prefix = "MODESEL_";
    for (char** e = env; *e; ++e) {
        const std::string_view entry(*e);
        if (!entry.starts_with(prefix))
            continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos)
            continue;
        std::string name(entry.substr(prefix.size(), eq - prefix.size()));
        if (name.find("__") == std::string::npos)
            continue;
        std::string key;
        for (std::size_t i = 0; i < name.size(); ++i) {
            if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
                key += '.';
                ++i;
            } else {
                key += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
            }
        }
        t[key] = std::string(entry.substr(eq + 1));
    }
    return t;
}

/// Merge layers left to right (later wins) and validate into a SimConfig.
inline SimConfig build_config(const std::vector<kv::Table>& layers)
{
    SimConfig cfg;
    kv::Table merged = default_config_table();
    kv::Table ahp_keys;
    for (const auto& layer : layers) {
        for (const auto& [k, v] : layer) {
            if (detail::find_spec(k))
                merged[k] = v;
            else if (is_ahp_key(k))
                ahp_keys[k] = v;
            else
                throw config_error("unknown key '" + k + "'");
        }
    }
    for (const auto& s : detail::key_specs())
        s.apply(cfg, s.key, merged.at(s.key));

    if (cfg.calib.snr_max_db < cfg.calib.snr_min_db)
        throw config_error("'calib.snr_max_db' must be >= 'calib.snr_min_db'");
    if (cfg.phy.bler_target >= 1.0)
        throw config_error("'phy.bler_target' must be < 1");

    cfg.ahp = apply_ahp_overrides(default_ahp_data(), ahp_keys);
    cfg.effective = std::move(merged);
    for (const auto& [k, v] : ahp_keys)
        cfg.effective[k] = v;
    return cfg;
}

inline SimConfig load_config(const std::string& path, const kv::Table& overrides = {},
                             const kv::Table& env = environment_overrides())
{
    std::vector<kv::Table> layers;
    if (!path.empty())
        layers.push_back(kv::parse_file(path));
    layers.push_back(env);
    layers.push_back(overrides);
    return build_config(layers);
}

} // namespace modesel
