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
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "greensched/config.hpp"
#include "greensched/rng.hpp"

namespace greensched {

// Urban-macro distance law: PL(d) = 15.3 + 37.6 log10(d[m]) dB.
inline constexpr double kPathLossInterceptDb = 15.3;
inline constexpr double kPathLossSlopeDb = 37.6;

/** User trajectory plus the serving station chosen in every slot. */
struct MobilityTrace {
    std::vector<double> positions_m;  // one entry per slot
    std::vector<double> speeds_mps;   // speed magnitude drawn for the slot
    std::vector<int> serving_bs;      // nearest station (ties to lower index)
};

/**
 * Per-slot link state between the user and its serving station:
 * the deterministic large-scale gain alpha, the beamforming-combined
 * fading power |h|^2, and the equivalent gain g = alpha |h|^2 / (G sigma^2)
 * that converts transmit watts into received SNR per the rate law.
 */
struct ChannelTrace {
    std::vector<double> alpha;          // distance-based channel gain
    std::vector<double> fading_power;   // |h|^2, Gamma(nt_antennas, 1)
    std::vector<double> g;              // equivalent gain, 1/W
};

/**
 * Distance-based channel gain (linear).  Distances below the configured
 * minimum are clamped so the law is never evaluated in its singular region.
 */
inline double path_loss_gain(double distance_m, const ScenarioConfig& cfg) {
    const double d = std::max(distance_m, cfg.geometry.min_distance_m);
    const double pl_db = kPathLossInterceptDb + kPathLossSlopeDb * std::log10(d);
    return std::pow(10.0, -pl_db / 10.0);
}

/**
 * Resolves the receiver noise power.  An explicit noise_w wins; otherwise
 * the noise is set so that full transmit power at the cell edge yields
 * exactly cell_edge_snr_db: sigma^2 = pmax * gain(radius) / 10^(snr/10).
 * The resolved value is written back into the configuration and returned.
 */
inline double calibrate_noise(ScenarioConfig& cfg) {
    if (cfg.noise_w > 0.0) return cfg.noise_w;
    cfg.noise_w = cfg.pmax_w * path_loss_gain(cfg.geometry.cell_radius_m, cfg) /
                  std::pow(10.0, cfg.cell_edge_snr_db / 10.0);
    return cfg.noise_w;
}

/** Index of the station nearest to x; ties resolve to the lower index. */
inline int nearest_bs(double x_m, const Geometry& geom) {
    int best = 0;
    double best_d = std::fabs(x_m - geom.bs_positions_m[0]);
    for (int i = 1; i < static_cast<int>(geom.bs_positions_m.size()); ++i) {
        const double d = std::fabs(x_m - geom.bs_positions_m[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

namespace detail {

/** Reflects x into [lo, hi] (handles multiple folds for large excursions). */
inline double reflect_into(double x, double lo, double hi) {
    const double span = hi - lo;
    if (span <= 0.0) return lo;
    double y = std::fmod(x - lo, 2.0 * span);
    if (y < 0.0) y += 2.0 * span;
    return lo + (y <= span ? y : 2.0 * span - y);
}

/**
 * Shared trajectory builder: starting from the configured position, each
 * slot advances by that slot's (signed) velocity and reflects off the ends
 * of the corridor covered by the deployment.
 */
template <class VelocityFn>
MobilityTrace roll_trajectory(const ScenarioConfig& cfg, long long t_slots, VelocityFn&& velocity) {
    const auto& pos = cfg.geometry.bs_positions_m;
    double lo = pos.front(), hi = pos.front();
    for (double p : pos) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    lo -= cfg.geometry.cell_radius_m;
    hi += cfg.geometry.cell_radius_m;

    MobilityTrace trace;
    trace.positions_m.reserve(t_slots);
    trace.speeds_mps.reserve(t_slots);
    trace.serving_bs.reserve(t_slots);
    double x = reflect_into(cfg.user_start_m, lo, hi);
    for (long long t = 0; t < t_slots; ++t) {
        const double v = velocity(t);  // signed velocity for this slot
        trace.positions_m.push_back(x);
        trace.speeds_mps.push_back(std::fabs(v));
        trace.serving_bs.push_back(nearest_bs(x, cfg.geometry));
        x = reflect_into(x + v * cfg.slot_s, lo, hi);
    }
    return trace;
}

}  // namespace detail

/**
 * Random user trajectory: every slot draws an independent speed uniform on
 * [0, v_max_mps] and an equiprobable direction along the line; the user
 * reflects at the ends of the deployment's coverage span.
 */
inline MobilityTrace generate_mobility(const ScenarioConfig& cfg, long long t_slots,
                                       std::uint64_t seed) {
    if (t_slots < 1) throw std::invalid_argument("generate_mobility: t_slots must be positive");
    std::mt19937_64 rng{seed};
    std::uniform_real_distribution<double> speed(0.0, cfg.v_max_mps);
    std::bernoulli_distribution forward(0.5);
    return detail::roll_trajectory(cfg, t_slots, [&](long long) {
        const double u = speed(rng);
        return forward(rng) ? u : -u;
    });
}

/**
 * Deterministic trajectory a scheduler can compute in advance: the user is
 * assumed to keep moving forward at the mean speed v_max_mps / 2.  This is
 * the mobility knowledge available to the online policies.
 */
inline MobilityTrace average_speed_rollout(const ScenarioConfig& cfg, long long t_slots) {
    if (t_slots < 1) throw std::invalid_argument("average_speed_rollout: t_slots must be positive");
    const double v = 0.5 * cfg.v_max_mps;
    return detail::roll_trajectory(cfg, t_slots, [v](long long) { return v; });
}

/** Distance-based gains toward the serving station, one per slot. */
inline std::vector<double> large_scale_gains(const MobilityTrace& mobility,
                                             const ScenarioConfig& cfg) {
    std::vector<double> alpha;
    alpha.reserve(mobility.positions_m.size());
    for (std::size_t t = 0; t < mobility.positions_m.size(); ++t) {
        const double bs_x = cfg.geometry.bs_positions_m[mobility.serving_bs[t]];
        alpha.push_back(path_loss_gain(std::fabs(mobility.positions_m[t] - bs_x), cfg));
    }
    return alpha;
}

/**
 * Draws the fading realization on top of a trajectory and assembles the
 * equivalent gains.  With maximum-ratio transmission over nt_antennas
 * i.i.d. unit-variance Rayleigh branches, the combined fading power |h|^2
 * is Gamma(nt_antennas, 1).  Requires the noise power to be resolved first
 * (call calibrate_noise); throws std::logic_error otherwise.
 */
inline ChannelTrace generate_channel(const MobilityTrace& mobility, const ScenarioConfig& cfg,
                                     std::uint64_t seed) {
    if (cfg.noise_w <= 0.0)
        throw std::logic_error("generate_channel: noise power unresolved; call calibrate_noise first");
    std::mt19937_64 rng{seed};
    std::gamma_distribution<double> fading(static_cast<double>(cfg.nt_antennas), 1.0);
    const double denom = cfg.snr_gap_linear() * cfg.noise_w;

    ChannelTrace trace;
    const std::size_t n = mobility.positions_m.size();
    trace.alpha = large_scale_gains(mobility, cfg);
    trace.fading_power.reserve(n);
    trace.g.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double h2 = fading(rng);
        trace.fading_power.push_back(h2);
        trace.g.push_back(trace.alpha[t] * h2 / denom);
    }
    return trace;
}

/** Per-slot channel dump: t, position_m, serving_bs, alpha, fading_power, g. */
inline void write_channel_csv(std::ostream& out, const MobilityTrace& mobility,
                              const ChannelTrace& channel) {
    out << "t,position_m,serving_bs,alpha,fading_power,g\n";
    char buf[160];
    for (std::size_t t = 0; t < mobility.positions_m.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%d,%.12g,%.12g,%.12g\n", t,
                      mobility.positions_m[t], mobility.serving_bs[t], channel.alpha[t],
                      channel.fading_power[t], channel.g[t]);
        out << buf;
    }
}

}  // namespace greensched
