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

// Capped water-filling: bisection solver vs. the dense-grid oracle, KKT
// structure of the returned allocation, and the closed-form level identity.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "greensched/oracle.hpp"
#include "greensched/waterfill.hpp"

using namespace greensched;

namespace {

WaterfillInstance single_slot(double gain, double bw, double cap, double target, double xi) {
    WaterfillInstance inst;
    inst.slots = {{gain, bw, cap}};
    inst.target_bits = target;
    inst.slot_s = 1.0;
    inst.pa_efficiency = xi;
    return inst;
}

/**
 * Largest relative violation of the optimality conditions: every interior
 * slot sits exactly at the common water level, capped slots are at or above
 * it, and silent slots at or below their activation level.
 */
double kkt_residual(const WaterfillInstance& inst, const WaterfillSolution& sol) {
    double worst = 0.0;
    const double level = inst.pa_efficiency * sol.nu;
    for (std::size_t i = 0; i < inst.slots.size(); ++i) {
        const auto& s = inst.slots[i];
        if (s.cap_w <= 0) continue;
        // Marginal transmit power per nat at this slot's allocation.
        const double marginal =
            (1.0 + s.gain * sol.power_w[i]) / (s.gain * s.bandwidth_hz * std::numbers::log2e);
        if (sol.power_w[i] <= 0.0) {
            worst = std::max(worst, (marginal - level) < 0 ? (level - marginal) / level : 0.0);
        } else if (sol.power_w[i] >= s.cap_w) {
            worst = std::max(worst, (marginal - level) > 0 ? (marginal - level) / level : 0.0);
        } else {
            worst = std::max(worst, std::fabs(marginal - level) / level);
        }
    }
    return worst;
}

}  // namespace

TEST(Waterfill, SingleSlotClosedForm) {
    // gain 1, 10 MHz, one second: 1e7 bits needs log2(1 + p) = 1, so p = 1 W
    // and the level is (p + 1/g) / (xi * W * log2 e).
    const WaterfillInstance inst = single_slot(1.0, 1e7, 40.0, 1e7, 0.213);
    const WaterfillSolution sol = solve_waterfill(inst);
    ASSERT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.power_w[0], 1.0, 1e-9);
    EXPECT_NEAR(sol.nu, 6.508424230609815e-07, 1e-9 * 6.5e-7);
    EXPECT_GE(sol.delivered_bits, 1e7 * (1.0 - 1e-12));
    ASSERT_EQ(sol.interior.size(), 1u);
    EXPECT_TRUE(sol.capped.empty());
    EXPECT_NEAR(transmit_energy_j(inst, sol.power_w), 1.0 / 0.213, 1e-8);
}

TEST(Waterfill, InfeasibleTargetReportsBestEffortAtTheCaps) {
    WaterfillInstance inst = single_slot(1.0, 1e6, 0.5, 0.0, 0.5);
    const double bits_max = shannon_bits(1.0, 0.5, 1e6, 1.0);
    inst.target_bits = 2.0 * bits_max;
    inst.slots.push_back({1.0, 1e6, 0.0});  // dead slot never joins the plan

    const WaterfillSolution sol = solve_waterfill(inst);
    EXPECT_FALSE(sol.feasible);
    EXPECT_TRUE(std::isinf(sol.nu));
    EXPECT_DOUBLE_EQ(sol.power_w[0], 0.5);
    EXPECT_DOUBLE_EQ(sol.power_w[1], 0.0);
    EXPECT_NEAR(sol.delivered_bits, bits_max, 1e-6);
    ASSERT_EQ(sol.capped, (std::vector<std::size_t>{0}));  // dead slot excluded
}

TEST(Waterfill, RejectsDegenerateInstances) {
    EXPECT_THROW(solve_waterfill(WaterfillInstance{}), std::invalid_argument);
    EXPECT_THROW(solve_waterfill(single_slot(1.0, 1e6, 1.0, 0.0, 0.5)), std::invalid_argument);
    EXPECT_THROW(solve_waterfill(single_slot(0.0, 1e6, 1.0, 1.0, 0.5)), std::invalid_argument);
    EXPECT_THROW(solve_waterfill(single_slot(1.0, 0.0, 1.0, 1.0, 0.5)), std::invalid_argument);
    EXPECT_THROW(solve_waterfill(single_slot(1.0, 1e6, -1.0, 1.0, 0.5)), std::invalid_argument);
    EXPECT_THROW(solve_waterfill(single_slot(1.0, 1e6, 1.0, 1.0, 1.5)), std::invalid_argument);
}

TEST(Waterfill, MatchesDenseGridOracleOnRandomInstances) {
    std::mt19937_64 rng{20260819};
    int feasible_seen = 0, infeasible_seen = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const WaterfillInstance inst = oracle::random_instance(rng);
        const WaterfillSolution fast = solve_waterfill(inst);
        const oracle::GridSolution slow = oracle::waterfill_grid(inst);
        ASSERT_EQ(fast.feasible, slow.feasible) << "trial " << trial;
        if (!fast.feasible) {
            ++infeasible_seen;
            continue;
        }
        ++feasible_seen;
        const double fast_energy = transmit_energy_j(inst, fast.power_w);
        EXPECT_LE(fast_energy, slow.objective_j * (1.0 + 1e-6)) << "trial " << trial;
        EXPECT_GE(fast_energy, slow.objective_j * (1.0 - 1e-6)) << "trial " << trial;
        EXPECT_GE(fast.delivered_bits, inst.target_bits * (1.0 - 1e-9)) << "trial " << trial;
        EXPECT_LT(kkt_residual(inst, fast), 1e-9) << "trial " << trial;
    }
    // The generator's target fractions reach above capacity, so both
    // branches must actually have been exercised.
    EXPECT_GT(feasible_seen, 60);
    EXPECT_GT(infeasible_seen, 3);
}

TEST(Waterfill, ClassificationPartitionsTheTransmittingSlots) {
    std::mt19937_64 rng{7};
    for (int trial = 0; trial < 60; ++trial) {
        const WaterfillInstance inst = oracle::random_instance(rng);
        const WaterfillSolution sol = solve_waterfill(inst);
        if (!sol.feasible) continue;
        std::vector<bool> seen(inst.slots.size(), false);
        for (std::size_t i : sol.capped) {
            EXPECT_FALSE(seen[i]);
            seen[i] = true;
            EXPECT_GT(inst.slots[i].cap_w, 0.0);
            EXPECT_DOUBLE_EQ(sol.power_w[i], inst.slots[i].cap_w);
        }
        for (std::size_t i : sol.interior) {
            EXPECT_FALSE(seen[i]);
            seen[i] = true;
            EXPECT_GT(sol.power_w[i], 0.0);
            EXPECT_LT(sol.power_w[i], inst.slots[i].cap_w);
        }
        for (std::size_t i = 0; i < inst.slots.size(); ++i)
            if (!seen[i]) EXPECT_DOUBLE_EQ(sol.power_w[i], 0.0);
    }
}

TEST(MultiplierClosedForm, MatchesBisectionOnInteriorInstances) {
    std::mt19937_64 rng{99};
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 50; ++trial) {
        const WaterfillInstance inst = oracle::random_instance(rng);
        const WaterfillSolution sol = solve_waterfill(inst);
        const auto closed = multiplier_closed_form(sol, inst);
        if (!sol.feasible || sol.interior.empty()) {
            EXPECT_FALSE(closed.has_value());
            continue;
        }
        ASSERT_TRUE(closed.has_value());
        EXPECT_NEAR(*closed, sol.nu, 1e-9 * sol.nu) << "trial " << trial;
        ++checked;
    }
    EXPECT_EQ(checked, 50);
}

TEST(MultiplierClosedForm, TwoEqualBandwidthSlotsSymbolicValue) {
    // Equal bandwidths, nothing capped: the level is
    //   2^(B / (2 W dt)) * ln2 / xi / (W sqrt(g1 g2)).
    WaterfillInstance inst;
    inst.slots = {{0.1, 1e6, 1e3}, {10.0, 1e6, 1e3}};
    inst.target_bits = 1.2e7;
    inst.slot_s = 1.0;
    inst.pa_efficiency = 0.5;
    const WaterfillSolution sol = solve_waterfill(inst);
    ASSERT_TRUE(sol.feasible);
    ASSERT_EQ(sol.interior.size(), 2u);

    const double expected = std::pow(2.0, inst.target_bits / 2e6) * std::numbers::ln2 / 0.5 /
                            (1e6 * std::sqrt(0.1 * 10.0));
    EXPECT_NEAR(sol.nu, expected, 1e-9 * expected);
    const auto closed = multiplier_closed_form(sol, inst);
    ASSERT_TRUE(closed.has_value());
    EXPECT_NEAR(*closed, expected, 1e-10 * expected);
}

TEST(MultiplierClosedForm, CapacityBoundaryEitherPinsNothingOrStillAgrees) {
    // Target equal to full capacity parks the level exactly where the only
    // slot caps out.  Whether the last bit of rounding calls that slot
    // capped (no interior, no pinned level) or interior is immaterial; what
    // matters is that the identity never returns a *wrong* level.
    WaterfillInstance inst = single_slot(1.0, 1e6, 2.0, 0.0, 0.5);
    inst.target_bits = shannon_bits(1.0, 2.0, 1e6, 1.0);
    const WaterfillSolution sol = solve_waterfill(inst);
    ASSERT_TRUE(sol.feasible);
    EXPECT_NEAR(sol.power_w[0], 2.0, 1e-9);
    const auto closed = multiplier_closed_form(sol, inst);
    if (sol.interior.empty()) {
        EXPECT_FALSE(closed.has_value());
    } else {
        ASSERT_TRUE(closed.has_value());
        EXPECT_NEAR(*closed, sol.nu, 1e-9 * sol.nu);
    }
    // The unambiguous no-interior case: infeasible instances pin no level.
    inst.target_bits = 10 * inst.target_bits;
    const WaterfillSolution infs = solve_waterfill(inst);
    EXPECT_FALSE(infs.feasible);
    EXPECT_FALSE(multiplier_closed_form(infs, inst).has_value());
}

TEST(EvaluatePolicyPower, ThresholdGatesIdleSlotsOnly) {
    const double xi = 0.213;
    const double nu = 1e-6;
    const double demand = xi * nu * 1e7 * std::numbers::log2e - 1.0 / 1.0;
    ASSERT_GT(demand, 0.0);
    // Idle slot below the threshold stays silent; at or above it transmits.
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 1e7, 40.0, nu, 2.0, true, xi), 0.0);
    EXPECT_NEAR(evaluate_policy_power(1.0, 1e7, 40.0, nu, 1.0, true, xi), demand, 1e-12);
    EXPECT_NEAR(evaluate_policy_power(1.0, 1e7, 40.0, nu, 0.5, true, xi), demand, 1e-12);
    // Busy slots ignore the threshold entirely.
    EXPECT_NEAR(evaluate_policy_power(1.0, 1e7, 40.0, nu, 2.0, false, xi), demand, 1e-12);
}

TEST(EvaluatePolicyPower, DegenerateLevelsAndResources) {
    const double inf = std::numeric_limits<double>::infinity();
    // Infinite level: fill to the cap (unless the threshold gate blocks it).
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 1e7, 7.5, inf, 0.0, true, 0.213), 7.5);
    EXPECT_DOUBLE_EQ(evaluate_policy_power(0.1, 1e7, 7.5, inf, 0.2, true, 0.213), 0.0);
    // Infinite threshold: idle slots never wake, busy ones still transmit.
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 1e7, 7.5, inf, inf, true, 0.213), 0.0);
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 1e7, 7.5, inf, inf, false, 0.213), 7.5);
    // Exhausted resources or a dead channel produce no transmission.
    EXPECT_DOUBLE_EQ(evaluate_policy_power(0.0, 1e7, 7.5, 1.0, 0.0, false, 0.213), 0.0);
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 0.0, 7.5, 1.0, 0.0, false, 0.213), 0.0);
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1.0, 1e7, 0.0, 1.0, 0.0, false, 0.213), 0.0);
    // A level below the slot's activation point keeps it silent.
    EXPECT_DOUBLE_EQ(evaluate_policy_power(1e-6, 1e3, 7.5, 1e-9, 0.0, false, 0.213), 0.0);
}
