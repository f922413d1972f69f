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

#include <array>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "greensched/context.hpp"
#include "greensched/energy.hpp"
#include "greensched/offline.hpp"
#include "greensched/waterfill.hpp"

namespace greensched {

/**
 * The five evaluated approaches:
 *  - UpperBound: clairvoyant offline optimum (energy lower bound).
 *  - AllContext: online rule parameterized from user, channel, and request-
 *    traffic context.
 *  - UAContext: same, but blind to request traffic (assumes every slot
 *    could be idle).
 *  - SEMax: throughput-greedy baseline, full power whenever bits remain.
 *  - EEMax: per-slot rate-per-joule baseline with a delivery floor.
 */
enum class PolicyKind { UpperBound, AllContext, UAContext, SEMax, EEMax };

inline constexpr std::array<PolicyKind, 5> kAllPolicies = {
    PolicyKind::UpperBound, PolicyKind::AllContext, PolicyKind::UAContext, PolicyKind::SEMax,
    PolicyKind::EEMax};

inline std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::UpperBound: return "UpperBound";
        case PolicyKind::AllContext: return "AllContext";
        case PolicyKind::UAContext: return "UAContext";
        case PolicyKind::SEMax: return "SEMax";
        case PolicyKind::EEMax: return "EEMax";
    }
    return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (PolicyKind k : kAllPolicies)
        if (policy_name(k) == name) return k;
    return std::nullopt;
}

/** What any runtime rule may look at when slot t opens. */
struct SlotState {
    long long t = 0;
    double gain = 0.0;          // realized equivalent gain this slot
    double bandwidth_hz = 0.0;  // bandwidth left by request traffic
    double cap_w = 0.0;         // power budget left by request traffic
    bool idle = false;          // serving station free of requests
};

/** Throughput-greedy step: all the power the budget allows. */
inline double se_max_step(const SlotState& s) { return std::max(s.cap_w, 0.0); }

/**
 * Rate-per-joule step: maximizes rate(p) / (p / pa_efficiency + wake_cost)
 * over p in [0, cap].  wake_cost_w is the active/sleep gap when the slot is
 * idle (transmitting would wake the station) and 0 when it is already busy.
 *
 * With a wake cost the ratio is unimodal with an interior maximum; without
 * one it only improves as p shrinks, which would starve the transfer — so
 * the step also enforces a delivery floor: at least min_rate_bits this slot
 * (the residual spread over the remaining slots), budget permitting.
 */
inline double ee_max_step(const SlotState& s, double wake_cost_w, double min_rate_bits,
                          const ScenarioConfig& cfg) {
    if (s.gain <= 0 || s.bandwidth_hz <= 0 || s.cap_w <= 0) return 0.0;
    double p_ee = 0.0;
    if (wake_cost_w > 0) {
        p_ee = golden_section_max(
            [&](double p) {
                return shannon_bits(s.gain, p, s.bandwidth_hz, cfg.slot_s) /
                       (p * cfg.slot_s / cfg.pa_efficiency + wake_cost_w * cfg.slot_s);
            },
            0.0, s.cap_w);
    }
    const double p_floor =
        std::min(power_for_bits(min_rate_bits, s.gain, s.bandwidth_hz, cfg.slot_s), s.cap_w);
    return std::clamp(std::max(p_ee, p_floor), 0.0, s.cap_w);
}

/**
 * Cuts a tentative power down so the slot delivers no more than
 * residual_bits: whichever is smaller of the proposed power and the power
 * that finishes the transfer exactly.  Keeps every policy from paying for
 * bits past the target in its final transmitting slot.
 */
inline double throttle_to_residual(double power_w, const SlotState& s, double residual_bits,
                                   double slot_s) {
    if (power_w <= 0) return 0.0;
    const double exact = power_for_bits(residual_bits, s.gain, s.bandwidth_hz, slot_s);
    return std::min(power_w, exact);
}

/** One evaluated run: the slot-by-slot decisions and their energy bill. */
struct PolicyRun {
    std::vector<AllocationDecision> decisions;
    EnergyReport report;
};

/**
 * Executes one policy causally over a realization: each slot sees only the
 * current channel/occupancy state and the bits still owed.  All policies
 * share the stopping discipline — no transmission once the target is met,
 * and the final slot is throttled to finish exactly.  UpperBound expects
 * the clairvoyant parameters, AllContext/UAContext the estimated ones.
 */
inline PolicyRun run_policy(PolicyKind kind, const MobilityTrace& mobility,
                            const ChannelTrace& channel, const OccupancyTrace& occupancy,
                            const ScenarioConfig& cfg, const PolicyParams* clairvoyant = nullptr,
                            const EstimatedParams* estimated = nullptr) {
    const long long t_slots = occupancy.t_slots;
    if (static_cast<long long>(mobility.positions_m.size()) != t_slots ||
        static_cast<long long>(channel.g.size()) != t_slots)
        throw std::invalid_argument("run_policy: trace lengths disagree");
    if (kind == PolicyKind::UpperBound && clairvoyant == nullptr)
        throw std::logic_error("run_policy: UpperBound needs clairvoyant parameters");
    if ((kind == PolicyKind::AllContext || kind == PolicyKind::UAContext) && estimated == nullptr)
        throw std::logic_error("run_policy: context policies need estimated parameters");

    PolicyRun run;
    run.decisions.resize(t_slots);
    const double wake_cost_w = cfg.p_active_w - cfg.p_sleep_w;
    double residual = cfg.b_bits;
    for (long long t = 0; t < t_slots; ++t) {
        auto& d = run.decisions[t];
        d.t = t;
        const int serving = mobility.serving_bs[t];
        const bool busy = occupancy.busy(t, serving);
        SlotState s{t, channel.g[t], cfg.wmax_hz - occupancy.rt_bandwidth_hz(t, serving),
                    cfg.pmax_w - occupancy.rt_power_w(t, serving), !busy};

        double p = 0.0;
        if (residual > cfg.b_bits * kDeliveryRelTol && s.gain > 0 && s.bandwidth_hz > 0 &&
            s.cap_w > 0) {
            switch (kind) {
                case PolicyKind::UpperBound:
                    p = evaluate_policy_power(s.gain, s.bandwidth_hz, s.cap_w, clairvoyant->nu,
                                              clairvoyant->gain_threshold, s.idle,
                                              cfg.pa_efficiency);
                    break;
                case PolicyKind::AllContext:
                case PolicyKind::UAContext:
                    p = evaluate_policy_power(s.gain, s.bandwidth_hz, s.cap_w, estimated->nu,
                                              estimated->gain_threshold, s.idle,
                                              cfg.pa_efficiency);
                    break;
                case PolicyKind::SEMax:
                    p = se_max_step(s);
                    break;
                case PolicyKind::EEMax:
                    p = ee_max_step(s, s.idle ? wake_cost_w : 0.0,
                                    residual / static_cast<double>(t_slots - t), cfg);
                    break;
            }
            p = throttle_to_residual(p, s, residual, cfg.slot_s);
        }
        if (p > 0) {
            d.rate_bits = shannon_bits(s.gain, p, s.bandwidth_hz, cfg.slot_s);
            residual = std::max(0.0, residual - d.rate_bits);
        }
        d.power_w = p;
        d.scheduled = p > 0;
        d.bs_active = busy || d.scheduled;
    }
    run.report = accumulate_energy(run.decisions, mobility, channel, occupancy, cfg);
    return run;
}

}  // namespace greensched
