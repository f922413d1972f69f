// Copyright 2026 The greensched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace greensched {

/**
 * Linear deployment: base stations sit at fixed coordinates on a line and
 * the user moves along the same line.  Distances below min_distance_m are
 * clamped before the path-loss law is applied so the near-field singularity
 * never enters a gain.
 */
struct Geometry {
    std::vector<double> bs_positions_m{0.0, 500.0};
    double cell_radius_m = 250.0;
    double min_distance_m = 10.0;
};

/**
 * Latency-critical request traffic at each base station: Poisson arrivals
 * per slot, geometric service times, and a hard cap on simultaneous
 * requests.  Every admitted request reserves a fixed power and bandwidth
 * share for as long as it is in service.
 */
struct BackgroundConfig {
    std::vector<double> arrival_rates_per_slot{0.2, 0.2};
    double mean_service_slots = 2.0;
    int request_capacity = 5;
    double request_power_w = 8.0;
    double request_bandwidth_hz = 2e6;
};

/**
 * Everything a single experiment needs: deployment geometry, radio and
 * power-consumption parameters, the delivery contract (b_bits by t_slots),
 * background traffic, and Monte-Carlo controls.  Defaults reproduce the
 * reference evaluation setup.
 */
struct ScenarioConfig {
    Geometry geometry;
    BackgroundConfig background;

    int nt_antennas = 4;          // transmit antennas (MRT beamforming)
    double pmax_w = 40.0;         // per-BS transmit power budget
    double wmax_hz = 1e7;         // per-BS bandwidth
    double slot_s = 1.0;          // slot length

    long long t_slots = 1000;     // delivery horizon in slots
    double b_bits = 5e9;          // bits owed to the user by the deadline

    double snr_gap_db = 0.0;      // coding-gap factor, dB (0 = capacity)
    double cell_edge_snr_db = 5.0;  // full-power SNR at cell_radius_m
    double noise_w = 0.0;         // receiver noise power; 0 = calibrate
                                  // from cell_edge_snr_db

    double pa_efficiency = 0.213;   // power-amplifier drain efficiency
    double p_active_w = 233.2;      // non-PA draw of an active BS
    double p_sleep_w = 150.0;       // draw of a sleeping BS

    double epsilon = 0.05;        // delivery-failure budget for the online policy
    double v_max_mps = 5.0;       // user speed is uniform on [0, v_max_mps]
    double user_start_m = 0.0;    // user position at slot 0

    int trials = 100;             // Monte-Carlo repetitions per horizon
    std::uint64_t base_seed = 1;  // master seed; everything derives from it
    std::vector<long long> t_sweep;  // horizons to sweep; empty = {t_slots}

    int num_bs() const { return static_cast<int>(geometry.bs_positions_m.size()); }

    /** Coding-gap factor as a linear ratio (>= 1 for real coders). */
    double snr_gap_linear() const { return std::pow(10.0, snr_gap_db / 10.0); }

    /**
     * Cross-field sanity checks.  Throws std::invalid_argument naming the
     * offending key, so a bad file fails loudly before any simulation runs.
     */
    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
        if (geometry.bs_positions_m.empty()) fail("bs_positions_m must list at least one station");
        for (double x : geometry.bs_positions_m)
            if (!std::isfinite(x)) fail("bs_positions_m entries must be finite");
        if (!(geometry.cell_radius_m > 0)) fail("cell_radius_m must be positive");
        if (!(geometry.min_distance_m > 0) || geometry.min_distance_m > geometry.cell_radius_m)
            fail("min_distance_m must lie in (0, cell_radius_m]");
        if (nt_antennas < 1) fail("nt_antennas must be at least 1");
        if (!(pmax_w > 0)) fail("pmax_w must be positive");
        if (!(wmax_hz > 0)) fail("wmax_hz must be positive");
        if (!(slot_s > 0)) fail("slot_s must be positive");
        if (t_slots < 1) fail("t_slots must be at least 1");
        if (b_bits < 0 || !std::isfinite(b_bits)) fail("b_bits must be finite and non-negative");
        if (noise_w < 0) fail("noise_w must be non-negative (0 means calibrate)");
        if (!(pa_efficiency > 0) || pa_efficiency > 1) fail("pa_efficiency must lie in (0, 1]");
        if (p_sleep_w < 0 || p_active_w < p_sleep_w)
            fail("p_active_w must be at least p_sleep_w, both non-negative");
        if (!(epsilon > 0) || !(epsilon < 1)) fail("epsilon must lie in (0, 1)");
        if (v_max_mps < 0) fail("v_max_mps must be non-negative");
        if (static_cast<int>(background.arrival_rates_per_slot.size()) != num_bs())
            fail("arrival_rates_per_slot needs one rate per base station");
        for (double r : background.arrival_rates_per_slot)
            if (r < 0 || !std::isfinite(r)) fail("arrival_rates_per_slot entries must be finite and non-negative");
        if (background.mean_service_slots < 1)
            fail("mean_service_slots must be at least 1 (service lasts whole slots)");
        if (background.request_capacity < 0) fail("request_capacity must be non-negative");
        if (background.request_power_w < 0) fail("request_power_w must be non-negative");
        if (background.request_bandwidth_hz < 0) fail("request_bandwidth_hz must be non-negative");
        if (background.request_capacity * background.request_power_w > pmax_w * (1 + 1e-12))
            fail("request_capacity * request_power_w exceeds pmax_w");
        if (background.request_capacity * background.request_bandwidth_hz > wmax_hz * (1 + 1e-12))
            fail("request_capacity * request_bandwidth_hz exceeds wmax_hz");
        if (trials < 1) fail("trials must be at least 1");
        for (long long t : t_sweep)
            if (t < 1) fail("t_sweep entries must be at least 1");
    }

    /** The horizons an experiment runs: the sweep list, or just t_slots. */
    std::vector<long long> sweep_or_default() const {
        return t_sweep.empty() ? std::vector<long long>{t_slots} : t_sweep;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string{s.substr(begin, end - begin + 1)};
}

inline double parse_double(const std::string& value, const std::string& where) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": '" + value + "' is not a number");
    }
    if (used != value.size())
        throw std::invalid_argument(where + ": trailing characters after number in '" + value + "'");
    return out;
}

inline long long parse_int(const std::string& value, const std::string& where) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": '" + value + "' is not an integer");
    }
    if (used != value.size())
        throw std::invalid_argument(where + ": trailing characters after integer in '" + value + "'");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), where));
    if (out.empty()) throw std::invalid_argument(where + ": empty list");
    return out;
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string format_double_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_double(xs[i]);
    }
    return out;
}

}  // namespace detail

/**
 * Parses a flat key=value stream ('#' starts a comment, blank lines are
 * ignored).  Unknown keys and malformed values raise std::invalid_argument
 * prefixed with "<name>:<line>:".  Keys may appear in any order; missing
 * keys keep their defaults.  The result is validated before it is returned.
 */
inline ScenarioConfig load_config(std::istream& in, const std::string& name = "<config>") {
    ScenarioConfig cfg;
    using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"bs_positions_m", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.geometry.bs_positions_m = detail::parse_double_list(v, w);
         }},
        {"cell_radius_m", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.geometry.cell_radius_m = detail::parse_double(v, w);
         }},
        {"min_distance_m", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.geometry.min_distance_m = detail::parse_double(v, w);
         }},
        {"nt_antennas", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.nt_antennas = static_cast<int>(detail::parse_int(v, w));
         }},
        {"pmax_w", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.pmax_w = detail::parse_double(v, w);
         }},
        {"wmax_hz", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.wmax_hz = detail::parse_double(v, w);
         }},
        {"slot_s", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.slot_s = detail::parse_double(v, w);
         }},
        {"t_slots", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.t_slots = detail::parse_int(v, w);
         }},
        {"b_bits", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.b_bits = detail::parse_double(v, w);
         }},
        {"snr_gap_db", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.snr_gap_db = detail::parse_double(v, w);
         }},
        {"cell_edge_snr_db", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.cell_edge_snr_db = detail::parse_double(v, w);
         }},
        {"noise_w", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.noise_w = detail::parse_double(v, w);
         }},
        {"pa_efficiency", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.pa_efficiency = detail::parse_double(v, w);
         }},
        {"p_active_w", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.p_active_w = detail::parse_double(v, w);
         }},
        {"p_sleep_w", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.p_sleep_w = detail::parse_double(v, w);
         }},
        {"epsilon", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.epsilon = detail::parse_double(v, w);
         }},
        {"v_max_mps", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.v_max_mps = detail::parse_double(v, w);
         }},
        {"user_start_m", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.user_start_m = detail::parse_double(v, w);
         }},
        {"arrival_rates_per_slot", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.background.arrival_rates_per_slot = detail::parse_double_list(v, w);
         }},
        {"mean_service_slots", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.background.mean_service_slots = detail::parse_double(v, w);
         }},
        {"request_capacity", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.background.request_capacity = static_cast<int>(detail::parse_int(v, w));
         }},
        {"request_power_w", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.background.request_power_w = detail::parse_double(v, w);
         }},
        {"request_bandwidth_hz", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.background.request_bandwidth_hz = detail::parse_double(v, w);
         }},
        {"trials", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.trials = static_cast<int>(detail::parse_int(v, w));
         }},
        {"base_seed", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.base_seed = static_cast<std::uint64_t>(detail::parse_int(v, w));
         }},
        {"t_sweep", [](ScenarioConfig& c, const std::string& v, const std::string& w) {
             c.t_sweep.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ','))
                 c.t_sweep.push_back(detail::parse_int(detail::trim(item), w));
         }},
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = name + ":" + std::to_string(line_no);
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value, got '" + stripped + "'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
        it->second(cfg, value, where);
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    return load_config(in, path);
}

/**
 * The configuration as ordered (key, value) pairs in the same format the
 * parser accepts.  Feeding the result back through load_config reproduces
 * the configuration exactly; run metadata embeds it for provenance.
 */
inline std::vector<std::pair<std::string, std::string>> to_key_values(const ScenarioConfig& c) {
    using detail::format_double;
    using detail::format_double_list;
    std::vector<std::pair<std::string, std::string>> out = {
        {"bs_positions_m", format_double_list(c.geometry.bs_positions_m)},
        {"cell_radius_m", format_double(c.geometry.cell_radius_m)},
        {"min_distance_m", format_double(c.geometry.min_distance_m)},
        {"nt_antennas", std::to_string(c.nt_antennas)},
        {"pmax_w", format_double(c.pmax_w)},
        {"wmax_hz", format_double(c.wmax_hz)},
        {"slot_s", format_double(c.slot_s)},
        {"t_slots", std::to_string(c.t_slots)},
        {"b_bits", format_double(c.b_bits)},
        {"snr_gap_db", format_double(c.snr_gap_db)},
        {"cell_edge_snr_db", format_double(c.cell_edge_snr_db)},
        {"noise_w", format_double(c.noise_w)},
        {"pa_efficiency", format_double(c.pa_efficiency)},
        {"p_active_w", format_double(c.p_active_w)},
        {"p_sleep_w", format_double(c.p_sleep_w)},
        {"epsilon", format_double(c.epsilon)},
        {"v_max_mps", format_double(c.v_max_mps)},
        {"user_start_m", format_double(c.user_start_m)},
        {"arrival_rates_per_slot", format_double_list(c.background.arrival_rates_per_slot)},
        {"mean_service_slots", format_double(c.background.mean_service_slots)},
        {"request_capacity", std::to_string(c.background.request_capacity)},
        {"request_power_w", format_double(c.background.request_power_w)},
        {"request_bandwidth_hz", format_double(c.background.request_bandwidth_hz)},
        {"trials", std::to_string(c.trials)},
        {"base_seed", std::to_string(c.base_seed)},
    };
    if (!c.t_sweep.empty()) {
        std::string sweep;
        for (std::size_t i = 0; i < c.t_sweep.size(); ++i) {
            if (i) sweep += ",";
            sweep += std::to_string(c.t_sweep[i]);
        }
        out.emplace_back("t_sweep", sweep);
    }
    return out;
}

}  // namespace greensched
