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
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "greensched/energy.hpp"
#include "greensched/numeric.hpp"

namespace greensched {

/** One usable slot of a minimum-energy transmission problem. */
struct WaterfillSlot {
    double gain = 0.0;          // equivalent channel gain, 1/W
    double bandwidth_hz = 0.0;  // bandwidth left for the bulk transfer
    double cap_w = 0.0;         // transmit power left under the budget
};

/**
 * Minimum-transmit-energy delivery problem over a fixed set of slots:
 * choose per-slot powers within [0, cap] so that total delivered bits reach
 * target_bits while the summed transmit power is as small as possible.
 */
struct WaterfillInstance {
    std::vector<WaterfillSlot> slots;
    double target_bits = 0.0;
    double slot_s = 1.0;
    double pa_efficiency = 1.0;
};

/**
 * Solution of a WaterfillInstance.  When the instance is infeasible even at
 * full power, `feasible` is false, every power sits at its cap, and the
 * multiplier is +infinity (the "fill everything" limit).
 */
struct WaterfillSolution {
    std::vector<double> power_w;
    double nu = 0.0;            // water-level multiplier
    bool feasible = false;
    double delivered_bits = 0.0;
    std::vector<std::size_t> capped;    // slots pinned at their cap
    std::vector<std::size_t> interior;  // slots strictly between 0 and cap
};

/**
 * Power the water level `nu` assigns to one slot before feasibility is
 * known: clamp(pa_efficiency * nu * W * log2(e) - 1/g, 0, cap).  Monotone
 * nondecreasing in nu, which is what makes the one-dimensional search work.
 */
inline double waterfill_power(double nu, const WaterfillSlot& slot, double pa_efficiency) {
    const double demand = pa_efficiency * nu * slot.bandwidth_hz * std::numbers::log2e -
                          1.0 / slot.gain;
    return std::clamp(demand, 0.0, slot.cap_w);
}

namespace detail {

inline double waterfill_bits(double nu, const WaterfillInstance& inst) {
    double bits = 0.0;
    for (const auto& s : inst.slots)
        bits += shannon_bits(s.gain, waterfill_power(nu, s, inst.pa_efficiency), s.bandwidth_hz,
                             inst.slot_s);
    return bits;
}

inline void validate_instance(const WaterfillInstance& inst) {
    if (inst.slots.empty()) throw std::invalid_argument("waterfill: no slots");
    if (!(inst.target_bits > 0) || !std::isfinite(inst.target_bits))
        throw std::invalid_argument("waterfill: target_bits must be positive and finite");
    if (!(inst.slot_s > 0)) throw std::invalid_argument("waterfill: slot_s must be positive");
    if (!(inst.pa_efficiency > 0) || inst.pa_efficiency > 1)
        throw std::invalid_argument("waterfill: pa_efficiency must lie in (0, 1]");
    for (const auto& s : inst.slots) {
        if (!(s.gain > 0) || !std::isfinite(s.gain))
            throw std::invalid_argument("waterfill: slot gain must be positive and finite");
        if (!(s.bandwidth_hz > 0) || !std::isfinite(s.bandwidth_hz))
            throw std::invalid_argument("waterfill: slot bandwidth must be positive and finite");
        if (s.cap_w < 0 || !std::isfinite(s.cap_w))
            throw std::invalid_argument("waterfill: slot cap must be non-negative and finite");
    }
}

}  // namespace detail

/**
 * Solves the capped water-filling problem by bisecting the water level.
 *
 * Delivered bits are continuous and nondecreasing in nu, zero at nu = 0,
 * and equal to the full-power throughput once nu reaches the level at
 * which every slot is pinned at its cap — so when the instance is feasible
 * a bracket is known in closed form and bisection converges
 * unconditionally.  The returned level is the upper end of the final
 * bracket, so delivered_bits never undershoots the target by more than the
 * bracket's width (relative 1e-12, well inside kDeliveryRelTol).
 */
inline WaterfillSolution solve_waterfill(const WaterfillInstance& inst) {
    detail::validate_instance(inst);
    WaterfillSolution sol;
    sol.power_w.resize(inst.slots.size());

    double bits_max = 0.0;
    for (std::size_t i = 0; i < inst.slots.size(); ++i) {
        const auto& s = inst.slots[i];
        bits_max += shannon_bits(s.gain, s.cap_w, s.bandwidth_hz, inst.slot_s);
    }
    if (bits_max < inst.target_bits * (1.0 - kDeliveryRelTol)) {
        // Even full power everywhere cannot make the deadline: report the
        // best effort so the caller can count the outage.
        sol.feasible = false;
        sol.nu = std::numeric_limits<double>::infinity();
        sol.delivered_bits = bits_max;
        for (std::size_t i = 0; i < inst.slots.size(); ++i) {
            sol.power_w[i] = inst.slots[i].cap_w;
            if (inst.slots[i].cap_w > 0) sol.capped.push_back(i);
        }
        return sol;
    }

    // nu at which slot i hits its cap; the max over slots brackets the root.
    double hi = 0.0;
    for (const auto& s : inst.slots) {
        const double nu_cap = (s.cap_w + 1.0 / s.gain) /
                              (inst.pa_efficiency * s.bandwidth_hz * std::numbers::log2e);
        hi = std::max(hi, nu_cap);
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double bits = detail::waterfill_bits(mid, inst);
        if (bits < inst.target_bits) {
            lo = mid;
        } else {
            hi = mid;
        }
        // Stop on either a pinned level or a met bit constraint; the level
        // is driven to machine precision because the bits residual scales
        // like (capacity / target) times the level's relative error.
        if (hi - lo <= 4e-16 * hi) break;
        if (std::fabs(bits - inst.target_bits) <= 1e-12 * inst.target_bits && bits >= inst.target_bits)
            break;
    }
    sol.nu = hi;
    sol.feasible = true;
    for (std::size_t i = 0; i < inst.slots.size(); ++i) {
        const auto& s = inst.slots[i];
        const double demand = inst.pa_efficiency * sol.nu * s.bandwidth_hz * std::numbers::log2e -
                              1.0 / s.gain;
        sol.power_w[i] = std::clamp(demand, 0.0, s.cap_w);
        sol.delivered_bits += shannon_bits(s.gain, sol.power_w[i], s.bandwidth_hz, inst.slot_s);
        // Slots with no cap never join the plan, whatever their demand.
        if (s.cap_w > 0 && demand >= s.cap_w) {
            sol.capped.push_back(i);
        } else if (s.cap_w > 0 && demand > 0) {
            sol.interior.push_back(i);
        }
    }
    return sol;
}

/**
 * Closed-form water level implied by a solution's slot classification:
 * with S = sum of interior bandwidth-time and bits_capped the throughput of
 * the capped slots,
 *
 *   nu = 2^((target - bits_capped) / S) * ln2 / pa_efficiency
 *        * prod_interior (W_i g_i)^(-W_i dt / S),
 *
 * evaluated in log space so huge bit counts cannot overflow.  Returns
 * nullopt when no slot is interior (then the classification pins no level).
 * Agreement with the bisection's nu is a strong end-to-end check that the
 * solver landed on the right active sets.
 */
inline std::optional<double> multiplier_closed_form(const WaterfillSolution& sol,
                                                    const WaterfillInstance& inst) {
    if (!sol.feasible || sol.interior.empty()) return std::nullopt;
    double bits_capped = 0.0;
    for (std::size_t i : sol.capped) {
        const auto& s = inst.slots[i];
        bits_capped += shannon_bits(s.gain, s.cap_w, s.bandwidth_hz, inst.slot_s);
    }
    double bw_time = 0.0;
    for (std::size_t i : sol.interior) bw_time += inst.slots[i].bandwidth_hz * inst.slot_s;
    double log_nu = std::numbers::ln2 * (inst.target_bits - bits_capped) / bw_time +
                    std::log(std::numbers::ln2 / inst.pa_efficiency);
    for (std::size_t i : sol.interior) {
        const auto& s = inst.slots[i];
        log_nu -= (s.bandwidth_hz * inst.slot_s / bw_time) * std::log(s.bandwidth_hz * s.gain);
    }
    return std::exp(log_nu);
}

/**
 * The shared runtime allocation rule: given the water level and (for idle
 * slots) the gain threshold, the power for the current slot is the water-
 * filling demand clamped into [0, cap].  Idle slots below the threshold are
 * skipped outright — waking the station for them is not worth the circuit
 * energy.  Busy slots are already awake, so they face no threshold.  An
 * infinite level degenerates to "fill every allowed slot to its cap".
 */
inline double evaluate_policy_power(double gain, double bandwidth_hz, double cap_w, double nu,
                                    double gain_threshold, bool idle_slot,
                                    double pa_efficiency) {
    if (gain <= 0 || bandwidth_hz <= 0 || cap_w <= 0) return 0.0;
    if (idle_slot && gain < gain_threshold) return 0.0;
    const double demand = pa_efficiency * nu * bandwidth_hz * std::numbers::log2e - 1.0 / gain;
    return std::clamp(demand, 0.0, cap_w);
}

/** Amplifier energy of a power vector under an instance's slot length. */
inline double transmit_energy_j(const WaterfillInstance& inst, std::span<const double> power_w) {
    double sum = 0.0;
    for (double p : power_w) sum += p;
    return sum * inst.slot_s / inst.pa_efficiency;
}

}  // namespace greensched
