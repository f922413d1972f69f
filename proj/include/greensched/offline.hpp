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

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "greensched/energy.hpp"
#include "greensched/waterfill.hpp"

namespace greensched {

/**
 * The two numbers the runtime allocation rule needs — the water level and
 * the idle-slot gain threshold — plus the slot sets behind them.  Produced
 * either by the clairvoyant optimizer below or, at the estimated level, by
 * the context pipeline.
 */
struct PolicyParams {
    double nu = 0.0;
    double gain_threshold = std::numeric_limits<double>::infinity();
    long long n_scheduled = 0;            // idle slots worth waking
    bool feasible = true;                 // target reachable at full power
    std::vector<long long> busy_slots;    // serving station busy with requests
    std::vector<long long> idle_slots;    // serving station otherwise asleep
    std::vector<long long> scheduled_idle;  // the chosen wake set (ascending)
};

/**
 * The gain value such that exactly `n` of the given idle-slot gains are at
 * or above it: the n-th largest entry.  This is the threshold the runtime
 * rule uses to recognize "one of the n best idle slots" on the fly.
 * Requires 1 <= n <= gains.size().
 */
inline double threshold_from_selection(std::span<const double> gains, long long n) {
    if (n < 1 || n > static_cast<long long>(gains.size()))
        throw std::invalid_argument("threshold_from_selection: n outside [1, gains.size()]");
    std::vector<double> sorted(gains.begin(), gains.end());
    std::nth_element(sorted.begin(), sorted.begin() + (n - 1), sorted.end(),
                     std::greater<double>());
    return sorted[n - 1];
}

/**
 * Outcome of the wake-count scan: how many candidate slots to wake, the
 * matching water level, and the per-slot powers of the best plan found.
 * Power vectors are aligned with the inputs (fixed[i] <-> fixed_power_w[i],
 * candidates[j] <-> candidate_power_w[j]); unselected candidates hold zero.
 */
struct WakeScanResult {
    long long n_scheduled = 0;
    double nu = 0.0;
    bool feasible = false;
    double objective_j = 0.0;  // amplifier energy + wake energy of the plan
    std::vector<double> fixed_power_w;
    std::vector<double> candidate_power_w;
    std::vector<std::size_t> selected;  // indices into `candidates`
};

/**
 * Exhaustive scan over how many candidate (sleeping) slots to wake.
 *
 * Waking a slot costs wake_cost_w for the whole slot but adds its capacity
 * to the delivery problem; for any fixed wake count n the cheapest choice
 * is the n highest-gain candidates, because candidates are interchangeable
 * in bandwidth and cap and a higher gain never needs more power for the
 * same bits.  So the two-level problem collapses to: sort candidates by
 * gain, water-fill for each prefix size n = 0..K, and keep the n whose
 * amplifier-plus-wake energy is smallest.  Near-ties (relative 1e-12, the
 * solver's own residue) prefer fewer woken slots, so a candidate that the
 * exact optimum leaves silent never gets woken for a rounding error.
 *
 * If even waking everything cannot reach the target, the result is the
 * full-power best effort with `feasible = false`.
 */
inline WakeScanResult scan_wake_count(const std::vector<WaterfillSlot>& fixed,
                                      const std::vector<WaterfillSlot>& candidates,
                                      double target_bits, double slot_s, double pa_efficiency,
                                      double wake_cost_w) {
    if (!(target_bits > 0)) throw std::invalid_argument("scan_wake_count: target must be positive");
    if (wake_cost_w < 0) throw std::invalid_argument("scan_wake_count: negative wake cost");

    // Candidate order: by gain, best first; equal gains keep input order so
    // the scan is deterministic.
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].gain > candidates[b].gain;
    });

    WakeScanResult best;
    best.fixed_power_w.assign(fixed.size(), 0.0);
    best.candidate_power_w.assign(candidates.size(), 0.0);
    double best_objective = std::numeric_limits<double>::infinity();
    WaterfillSolution last_solution;  // reused to keep the full-wake fallback

    WaterfillInstance inst;
    inst.target_bits = target_bits;
    inst.slot_s = slot_s;
    inst.pa_efficiency = pa_efficiency;
    for (long long n = 0; n <= static_cast<long long>(candidates.size()); ++n) {
        inst.slots = fixed;
        for (long long j = 0; j < n; ++j) inst.slots.push_back(candidates[order[j]]);
        if (inst.slots.empty()) continue;  // nothing to transmit with
        const WaterfillSolution sol = solve_waterfill(inst);
        last_solution = sol;
        if (!sol.feasible) continue;
        const double objective = transmit_energy_j(inst, sol.power_w) +
                                 static_cast<double>(n) * wake_cost_w * slot_s;
        if (!best.feasible ||
            objective < best_objective - 1e-12 * std::max(1.0, best_objective)) {
            best_objective = objective;
            best.n_scheduled = n;
            best.nu = sol.nu;
            best.feasible = true;
            best.objective_j = objective;
            std::fill(best.candidate_power_w.begin(), best.candidate_power_w.end(), 0.0);
            for (std::size_t i = 0; i < fixed.size(); ++i) best.fixed_power_w[i] = sol.power_w[i];
            best.selected.assign(order.begin(), order.begin() + n);
            for (long long j = 0; j < n; ++j)
                best.candidate_power_w[order[j]] = sol.power_w[fixed.size() + j];
        }
    }

    if (!best.feasible) {
        // Full-power best effort: wake every candidate, run everything at
        // its cap, and let the caller record the outage.
        best.n_scheduled = static_cast<long long>(candidates.size());
        best.nu = std::numeric_limits<double>::infinity();
        best.objective_j =
            last_solution.power_w.empty()
                ? 0.0
                : transmit_energy_j(inst, last_solution.power_w) +
                      static_cast<double>(candidates.size()) * wake_cost_w * slot_s;
        for (std::size_t i = 0; i < fixed.size(); ++i) best.fixed_power_w[i] = fixed[i].cap_w;
        for (std::size_t j = 0; j < candidates.size(); ++j)
            best.candidate_power_w[j] = candidates[j].cap_w;
        best.selected = order;
    }
    return best;
}

/** Everything the clairvoyant optimizer produces for one realization. */
struct OfflineResult {
    PolicyParams params;
    std::vector<AllocationDecision> decisions;
    EnergyReport report;
};

/**
 * Clairvoyant minimum-energy plan for one realization: sees the whole
 * channel and occupancy ahead of time, keeps busy slots (station already
 * awake, no wake cost) always eligible, and picks how many idle slots to
 * wake via scan_wake_count.  Busy slots enter with the bandwidth and power
 * left over by the requests; slots with nothing left are unusable and get
 * zero.  The result is the energy lower bound the online policies chase.
 */
inline OfflineResult optimize_offline(const MobilityTrace& mobility, const ChannelTrace& channel,
                                      const OccupancyTrace& occupancy,
                                      const ScenarioConfig& cfg) {
    const long long t_slots = occupancy.t_slots;
    if (static_cast<long long>(mobility.positions_m.size()) != t_slots ||
        static_cast<long long>(channel.g.size()) != t_slots)
        throw std::invalid_argument("optimize_offline: trace lengths disagree");

    OfflineResult out;
    out.decisions.resize(t_slots);
    std::vector<WaterfillSlot> fixed, candidates;
    std::vector<long long> fixed_t, candidate_t;
    for (long long t = 0; t < t_slots; ++t) {
        out.decisions[t].t = t;
        const int serving = mobility.serving_bs[t];
        if (occupancy.busy(t, serving)) {
            out.params.busy_slots.push_back(t);
            const double w = cfg.wmax_hz - occupancy.rt_bandwidth_hz(t, serving);
            const double cap = cfg.pmax_w - occupancy.rt_power_w(t, serving);
            if (w > 0 && cap > 0) {
                fixed.push_back({channel.g[t], w, cap});
                fixed_t.push_back(t);
            }
        } else {
            out.params.idle_slots.push_back(t);
            candidates.push_back({channel.g[t], cfg.wmax_hz, cfg.pmax_w});
            candidate_t.push_back(t);
        }
    }

    if (cfg.b_bits > 0) {
        const WakeScanResult scan =
            scan_wake_count(fixed, candidates, cfg.b_bits, cfg.slot_s, cfg.pa_efficiency,
                            cfg.p_active_w - cfg.p_sleep_w);
        out.params.nu = scan.nu;
        out.params.n_scheduled = scan.n_scheduled;
        out.params.feasible = scan.feasible;
        if (scan.n_scheduled > 0) {
            std::vector<double> gains;
            gains.reserve(candidates.size());
            for (const auto& c : candidates) gains.push_back(c.gain);
            out.params.gain_threshold = threshold_from_selection(gains, scan.n_scheduled);
        }
        for (std::size_t i = 0; i < fixed.size(); ++i) {
            const long long t = fixed_t[i];
            out.decisions[t].power_w = scan.fixed_power_w[i];
            out.decisions[t].rate_bits = shannon_bits(fixed[i].gain, scan.fixed_power_w[i],
                                                      fixed[i].bandwidth_hz, cfg.slot_s);
        }
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            const long long t = candidate_t[j];
            out.decisions[t].power_w = scan.candidate_power_w[j];
            out.decisions[t].rate_bits = shannon_bits(candidates[j].gain,
                                                      scan.candidate_power_w[j],
                                                      candidates[j].bandwidth_hz, cfg.slot_s);
        }
        for (std::size_t j : scan.selected) out.params.scheduled_idle.push_back(candidate_t[j]);
        std::sort(out.params.scheduled_idle.begin(), out.params.scheduled_idle.end());
    } else {
        out.params.nu = 0.0;
        out.params.n_scheduled = 0;
        out.params.feasible = true;
    }

    for (long long t = 0; t < t_slots; ++t) {
        auto& d = out.decisions[t];
        d.scheduled = d.power_w > 0;
        d.bs_active = d.scheduled || occupancy.busy(t, mobility.serving_bs[t]);
    }
    out.report = accumulate_energy(out.decisions, mobility, channel, occupancy, cfg);
    return out;
}

}  // namespace greensched
