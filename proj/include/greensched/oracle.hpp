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

// Reference implementations that deliberately avoid the production code
// paths: a dense-grid water-filling solver, an exhaustive-subset wake
// planner, and a continued-fraction incomplete gamma.  They are slow and
// simple on purpose — the test suite and the `oracle` CLI subcommand trust
// them as ground truth for the fast solvers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "greensched/numeric.hpp"
#include "greensched/waterfill.hpp"

namespace greensched::oracle {

struct GridSolution {
    bool feasible = false;
    double nu = 0.0;
    double objective_j = 0.0;  // amplifier energy of the allocation
    double delivered_bits = 0.0;
    std::vector<double> power_w;
};

/**
 * Water-filling by brute search: sweep the level on a log-spaced grid
 * between the first activation level (below it nothing transmits) and the
 * level at which every slot caps out, keep the smallest level whose
 * allocation delivers the target, and refine around it.  No KKT reasoning,
 * no bisection invariants — just monotonicity and lots of evaluations.
 * Log spacing keeps the resolution *relative*, so the answer is accurate
 * even when the optimum sits orders of magnitude below the upper bracket;
 * with `passes` refinements of `points` points the relative level error is
 * about log(hi/lo) / points^passes.
 */
inline GridSolution waterfill_grid(const WaterfillInstance& inst, int points = 2000,
                                   int passes = 3) {
    GridSolution sol;
    const std::size_t n = inst.slots.size();
    auto alloc_at = [&](double nu, std::vector<double>& p) {
        double bits = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = inst.slots[i];
            const double demand =
                inst.pa_efficiency * nu * s.bandwidth_hz * std::numbers::log2e - 1.0 / s.gain;
            p[i] = std::clamp(demand, 0.0, s.cap_w);
            bits += shannon_bits(s.gain, p[i], s.bandwidth_hz, inst.slot_s);
        }
        return bits;
    };

    std::vector<double> p(n);
    double lo_nu = std::numeric_limits<double>::infinity(), hi_nu = 0.0;
    for (const auto& s : inst.slots) {
        const double scale = inst.pa_efficiency * s.bandwidth_hz * std::numbers::log2e;
        lo_nu = std::min(lo_nu, (1.0 / s.gain) / scale);          // slot starts transmitting
        hi_nu = std::max(hi_nu, (s.cap_w + 1.0 / s.gain) / scale);  // slot hits its cap
    }
    if (alloc_at(hi_nu, p) < inst.target_bits * (1.0 - kDeliveryRelTol)) {
        sol.feasible = false;
        sol.nu = std::numeric_limits<double>::infinity();
        sol.delivered_bits = alloc_at(hi_nu, p);
        sol.power_w = p;
        sol.objective_j = transmit_energy_j(inst, p);
        return sol;
    }

    double llo = std::log(lo_nu), lhi = std::log(hi_nu);
    for (int pass = 0; pass < passes && lhi > llo; ++pass) {
        const double step = (lhi - llo) / points;
        for (int i = 1; i <= points; ++i) {
            if (alloc_at(std::exp(llo + step * i), p) >= inst.target_bits) {
                lhi = llo + step * i;
                llo = lhi - step;
                break;
            }
        }
    }
    sol.feasible = true;
    sol.nu = std::exp(lhi);
    sol.delivered_bits = alloc_at(sol.nu, p);
    sol.power_w = p;
    sol.objective_j = transmit_energy_j(inst, p);
    return sol;
}

struct SubsetSolution {
    bool feasible = false;
    double objective_j = 0.0;  // amplifier energy + wake energy
    std::uint32_t best_mask = 0;
    long long n_scheduled = 0;
};

/**
 * Wake planning by exhaustive enumeration: try every subset of the
 * candidate slots (so at most ~20 candidates), water-fill on fixed +
 * subset, and keep the cheapest feasible plan.  Ties prefer fewer woken
 * slots, then the earlier enumeration order.  This checks the production
 * scan's claim that "top-n by gain, best n" is optimal.
 */
inline SubsetSolution wake_bruteforce(const std::vector<WaterfillSlot>& fixed,
                                      const std::vector<WaterfillSlot>& candidates,
                                      double target_bits, double slot_s, double pa_efficiency,
                                      double wake_cost_w) {
    if (candidates.size() > 20)
        throw std::invalid_argument("wake_bruteforce: too many candidates to enumerate");
    SubsetSolution best;
    double best_objective = std::numeric_limits<double>::infinity();
    long long best_count = std::numeric_limits<long long>::max();

    WaterfillInstance inst;
    inst.target_bits = target_bits;
    inst.slot_s = slot_s;
    inst.pa_efficiency = pa_efficiency;
    const std::uint32_t limit = 1u << candidates.size();
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        inst.slots = fixed;
        long long count = 0;
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (mask & (1u << j)) {
                inst.slots.push_back(candidates[j]);
                ++count;
            }
        if (inst.slots.empty()) continue;
        const WaterfillSolution sol = solve_waterfill(inst);
        if (!sol.feasible) continue;
        const double objective = transmit_energy_j(inst, sol.power_w) +
                                 static_cast<double>(count) * wake_cost_w * slot_s;
        // Strictly better, or equal cost with fewer woken slots.
        if (objective < best_objective - 1e-12 * std::max(1.0, best_objective) ||
            (objective <= best_objective + 1e-12 * std::max(1.0, best_objective) &&
             count < best_count)) {
            best_objective = objective;
            best_count = count;
            best.feasible = true;
            best.objective_j = objective;
            best.best_mask = mask;
            best.n_scheduled = count;
        }
    }
    return best;
}

/**
 * Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a) via
 * the classic series (x < a + 1) / continued fraction (x >= a + 1) pair.
 * Independent of the finite-sum form used in production; for integer a the
 * two must agree to near machine precision.
 */
inline double regularized_gamma_q(double a, double x) {
    if (a <= 0) throw std::invalid_argument("regularized_gamma_q: a must be positive");
    if (x < 0) throw std::invalid_argument("regularized_gamma_q: x must be non-negative");
    if (x == 0) return 1.0;
    const double log_gamma_a = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a, x) by series, then complement.
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - log_gamma_a);
        return 1.0 - p;
    }
    // Q(a, x) by Lentz continued fraction.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return h * std::exp(-x + a * std::log(x) - log_gamma_a);
}

/**
 * Random delivery problem for cross-checking the fast solver: gains and
 * bandwidths span several orders of magnitude, some caps are zero (dead
 * slots), and the target is a random fraction of full-power capacity —
 * mostly feasible, occasionally (fraction > 1) deliberately infeasible.
 */
inline WaterfillInstance random_instance(std::mt19937_64& rng, int max_slots = 10) {
    std::uniform_int_distribution<int> n_slots(1, max_slots);
    std::uniform_real_distribution<double> log_gain(std::log(1e-4), std::log(1e2));
    std::uniform_real_distribution<double> log_bw(std::log(1e3), std::log(1e7));
    std::uniform_real_distribution<double> cap(0.0, 50.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> frac(0.05, 1.10);

    WaterfillInstance inst;
    inst.slot_s = uni(rng) < 0.5 ? 1.0 : 0.25;
    inst.pa_efficiency = 0.1 + 0.9 * uni(rng);
    const int n = n_slots(rng);
    double bits_max = 0.0;
    for (int i = 0; i < n; ++i) {
        WaterfillSlot s;
        s.gain = std::exp(log_gain(rng));
        s.bandwidth_hz = std::exp(log_bw(rng));
        s.cap_w = uni(rng) < 0.1 ? 0.0 : cap(rng);  // occasional dead slot
        bits_max += shannon_bits(s.gain, s.cap_w, s.bandwidth_hz, inst.slot_s);
        inst.slots.push_back(s);
    }
    // Degenerate all-dead instances can't take a positive target; give the
    // single slot a real cap instead.
    if (bits_max <= 0.0) {
        inst.slots[0].cap_w = 1.0 + cap(rng);
        bits_max = shannon_bits(inst.slots[0].gain, inst.slots[0].cap_w,
                                inst.slots[0].bandwidth_hz, inst.slot_s);
    }
    inst.target_bits = bits_max * frac(rng);
    return inst;
}

struct WakeProblem {
    std::vector<WaterfillSlot> fixed;
    std::vector<WaterfillSlot> candidates;
    double target_bits = 0.0;
    double slot_s = 1.0;
    double pa_efficiency = 0.2;
    double wake_cost_w = 0.0;
};

/**
 * Random wake-planning problem small enough to enumerate: a handful of
 * busy slots with leftover resources plus candidate idle slots that share
 * one bandwidth and cap, exactly the structure the production scan
 * exploits.  Targets range from easy to (sometimes) infeasible.
 */
inline WakeProblem random_wake_problem(std::mt19937_64& rng, int max_slots = 8) {
    std::uniform_int_distribution<int> n_slots(1, max_slots);
    std::uniform_real_distribution<double> log_gain(std::log(1e-3), std::log(1e1));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> frac(0.05, 1.05);

    WakeProblem prob;
    prob.slot_s = 1.0;
    prob.pa_efficiency = 0.1 + 0.9 * uni(rng);
    prob.wake_cost_w = uni(rng) < 0.15 ? 0.0 : 100.0 * uni(rng);
    const double wmax = 1e6, pmax = 40.0;
    const int n = n_slots(rng);
    double bits_max = 0.0;
    for (int i = 0; i < n; ++i) {
        const double gain = std::exp(log_gain(rng));
        if (uni(rng) < 0.4) {
            // Busy slot: requests take a random share of bandwidth and power.
            const double share = uni(rng) * 0.9;
            WaterfillSlot s{gain, wmax * (1.0 - share), pmax * (1.0 - share)};
            bits_max += shannon_bits(s.gain, s.cap_w, s.bandwidth_hz, prob.slot_s);
            prob.fixed.push_back(s);
        } else {
            WaterfillSlot s{gain, wmax, pmax};
            bits_max += shannon_bits(s.gain, s.cap_w, s.bandwidth_hz, prob.slot_s);
            prob.candidates.push_back(s);
        }
    }
    prob.target_bits = std::max(1.0, bits_max * frac(rng));
    return prob;
}

}  // namespace greensched::oracle
