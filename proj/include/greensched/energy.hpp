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
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "greensched/channel.hpp"
#include "greensched/config.hpp"
#include "greensched/numeric.hpp"
#include "greensched/traffic.hpp"

namespace greensched {

/**
 * Relative slack used whenever delivered bits are compared against the
 * target: a run counts as complete when it is within this fraction of the
 * target, so bisection residue never flips a success into an outage.
 */
inline constexpr double kDeliveryRelTol = 1e-9;

/** One slot of a policy's output at the user's serving station. */
struct AllocationDecision {
    long long t = 0;
    bool scheduled = false;   // transmit indicator; invariant: scheduled == (power_w > 0)
    double power_w = 0.0;     // bulk-transfer transmit power
    double rate_bits = 0.0;   // bits delivered this slot
    bool bs_active = false;   // serving station awake (request traffic or us)
};

/**
 * Energy totals over one run, split into what the network pays regardless
 * of the bulk transfer (basic), and what the transfer adds: amplifier
 * energy for its transmit power, plus the active/sleep gap for slots where
 * it alone keeps the station awake.  nrt_energy_j is the policy's score.
 */
struct EnergyReport {
    double basic_energy_j = 0.0;
    double nrt_transmit_energy_j = 0.0;
    double nrt_circuit_energy_j = 0.0;
    double delivered_bits = 0.0;
    double target_bits = 0.0;
    bool outage = false;

    double nrt_energy_j() const { return nrt_transmit_energy_j + nrt_circuit_energy_j; }
    double total_energy_j() const { return basic_energy_j + nrt_energy_j(); }
};

/**
 * Network power draw for one slot: every station pays its sleep draw, adds
 * the active/sleep gap whenever it transmits anything, and amplifies all
 * transmit power (request traffic plus, at the serving station, the bulk
 * transfer) at efficiency pa_efficiency.  Throws std::invalid_argument if
 * the serving station's combined transmit power exceeds its budget.
 */
inline double slot_power(std::span<const double> rt_power_w, int serving_bs, bool scheduled,
                         double nrt_power_w, const ScenarioConfig& cfg) {
    if (serving_bs < 0 || serving_bs >= static_cast<int>(rt_power_w.size()))
        throw std::invalid_argument("slot_power: serving_bs out of range");
    if (nrt_power_w < 0) throw std::invalid_argument("slot_power: negative transmit power");
    const double budget_tol = 1e-9 * cfg.pmax_w;
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(rt_power_w.size()); ++i) {
        double tx = rt_power_w[i];
        if (tx < 0) throw std::invalid_argument("slot_power: negative request power");
        if (i == serving_bs && scheduled) tx += nrt_power_w;
        if (tx > cfg.pmax_w + budget_tol)
            throw std::invalid_argument("slot_power: transmit power exceeds pmax_w");
        total += tx / cfg.pa_efficiency + sign01(tx) * (cfg.p_active_w - cfg.p_sleep_w) +
                 cfg.p_sleep_w;
    }
    return total;
}

/**
 * Folds a full run of decisions into an energy report.  Enforces the run
 * invariants as it goes — scheduled == (power > 0), power within the
 * per-slot budget left over by request traffic — so a buggy policy fails
 * loudly here rather than producing a plausible-looking number.
 */
inline EnergyReport accumulate_energy(const std::vector<AllocationDecision>& decisions,
                                      const MobilityTrace& mobility, const ChannelTrace& channel,
                                      const OccupancyTrace& occupancy,
                                      const ScenarioConfig& cfg) {
    const long long t_slots = occupancy.t_slots;
    if (static_cast<long long>(decisions.size()) != t_slots ||
        static_cast<long long>(mobility.positions_m.size()) != t_slots ||
        static_cast<long long>(channel.g.size()) != t_slots)
        throw std::invalid_argument("accumulate_energy: trace lengths disagree");

    const double gap_w = cfg.p_active_w - cfg.p_sleep_w;
    const double budget_tol = 1e-9 * cfg.pmax_w;
    EnergyReport report;
    report.target_bits = cfg.b_bits;
    double basic_w_sum = 0.0, transmit_w_sum = 0.0, circuit_w_sum = 0.0;
    for (long long t = 0; t < t_slots; ++t) {
        const auto& d = decisions[t];
        if (d.scheduled != (d.power_w > 0))
            throw std::invalid_argument("accumulate_energy: transmit indicator disagrees with power");
        const int serving = mobility.serving_bs[t];
        const double rt_serving = occupancy.rt_power_w(t, serving);
        if (d.power_w < 0 || d.power_w + rt_serving > cfg.pmax_w + budget_tol)
            throw std::invalid_argument("accumulate_energy: decision breaks the power budget");

        for (int i = 0; i < occupancy.num_bs; ++i) {
            const double rt = occupancy.rt_power_w(t, i);
            basic_w_sum += rt / cfg.pa_efficiency + sign01(rt) * gap_w + cfg.p_sleep_w;
        }
        if (d.power_w > 0) {
            transmit_w_sum += d.power_w / cfg.pa_efficiency;
            if (rt_serving <= 0) circuit_w_sum += gap_w;  // we alone keep it awake
        }
        report.delivered_bits += d.rate_bits;
    }
    report.basic_energy_j = basic_w_sum * cfg.slot_s;
    report.nrt_transmit_energy_j = transmit_w_sum * cfg.slot_s;
    report.nrt_circuit_energy_j = circuit_w_sum * cfg.slot_s;
    report.outage = report.delivered_bits < cfg.b_bits * (1.0 - kDeliveryRelTol);
    return report;
}

/** Per-slot decision dump: t, policy, scheduled, power_w, rate_bits, bs_active. */
inline void write_decisions_csv(std::ostream& out, std::string_view policy,
                                const std::vector<AllocationDecision>& decisions) {
    out << "t,policy,scheduled,power_w,rate_bits,bs_active\n";
    char buf[160];
    for (const auto& d : decisions) {
        std::snprintf(buf, sizeof(buf), "%lld,%.*s,%d,%.12g,%.12g,%d\n", d.t,
                      static_cast<int>(policy.size()), policy.data(), d.scheduled ? 1 : 0,
                      d.power_w, d.rate_bits, d.bs_active ? 1 : 0);
        out << buf;
    }
}

}  // namespace greensched
