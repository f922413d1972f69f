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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "greensched/channel.hpp"
#include "greensched/config.hpp"
#include "greensched/numeric.hpp"
#include "greensched/offline.hpp"
#include "greensched/rng.hpp"
#include "greensched/traffic.hpp"

namespace greensched {

/**
 * Runtime-rule parameters derived before the horizon starts, from context
 * alone: predicted large-scale gains, the expected number of idle slots,
 * and a probabilistic gain threshold that makes enough good idle slots
 * show up with probability 1 - epsilon.  Mirrors PolicyParams, with the
 * clairvoyant sets replaced by what was assumed.
 */
struct EstimatedParams {
    double nu = 0.0;
    double gain_threshold = std::numeric_limits<double>::infinity();
    long long n_scheduled = 0;         // planned wake count
    double exceed_q = 0.0;             // per-slot P[gain >= threshold] at the answer
    bool feasible = true;              // planning problem solvable at full power
    bool threshold_reachable = true;   // delivery probability target attainable
    double expected_idle_slots = 0.0;  // real-valued idle-slot forecast
    std::vector<long long> assumed_idle;  // guessed idle subset (ascending)
};

/**
 * Expected equivalent gains along a predicted trajectory: the fading power
 * averages to nt_antennas, so E[g] = nt * alpha / (gap * noise).  Requires
 * the noise power to be resolved (calibrate_noise).
 */
inline std::vector<double> predict_gains(std::span<const double> alpha_hat,
                                         const ScenarioConfig& cfg) {
    if (cfg.noise_w <= 0.0)
        throw std::logic_error("predict_gains: noise power unresolved; call calibrate_noise first");
    const double scale = cfg.nt_antennas / (cfg.snr_gap_linear() * cfg.noise_w);
    std::vector<double> g;
    g.reserve(alpha_hat.size());
    for (double a : alpha_hat) g.push_back(a * scale);
    return g;
}

/**
 * Uniformly random guess of which `idle_count` of the T slots will be idle.
 * The scheduler cannot know where the idle slots fall, only (roughly) how
 * many there are, so it plans on a random placement.  Returns ascending
 * slot indices; idle_count is clamped into [0, t_slots].
 */
inline std::vector<long long> guess_idle_set(long long t_slots, long long idle_count,
                                             std::uint64_t seed) {
    if (t_slots < 0) throw std::invalid_argument("guess_idle_set: negative horizon");
    idle_count = std::clamp(idle_count, 0LL, t_slots);
    std::vector<long long> slots(t_slots);
    std::iota(slots.begin(), slots.end(), 0LL);
    std::mt19937_64 rng{seed};
    // Partial Fisher-Yates: after i steps the first i entries are a uniform
    // sample without replacement.
    for (long long i = 0; i < idle_count; ++i) {
        std::uniform_int_distribution<long long> pick(i, t_slots - 1);
        std::swap(slots[i], slots[pick(rng)]);
    }
    slots.resize(idle_count);
    std::sort(slots.begin(), slots.end());
    return slots;
}

/**
 * Average probability, over the horizon, that one slot's realized gain
 * reaches `gain_threshold`: fading is Gamma(nt, 1), so slot t exceeds the
 * threshold iff its fading power reaches gap * noise * threshold / alpha_t.
 */
inline double exceed_probability(double gain_threshold, std::span<const double> alpha_hat,
                                 const ScenarioConfig& cfg) {
    if (alpha_hat.empty()) throw std::invalid_argument("exceed_probability: empty trajectory");
    if (gain_threshold <= 0.0) return 1.0;
    const double denom = cfg.snr_gap_linear() * cfg.noise_w;
    double sum = 0.0;
    for (double a : alpha_hat) {
        if (std::isinf(gain_threshold)) continue;  // unreachable threshold
        sum += gamma_integer_sf(cfg.nt_antennas, denom * gain_threshold / a);
    }
    return sum / static_cast<double>(alpha_hat.size());
}

namespace detail {

/**
 * Slots that must clear the threshold so that the realized usable idle
 * slots cover the planned wake count: scale the plan, made against
 * expected_idle forecast slots, up to the full horizon.  Computed with a
 * tiny downward nudge so an exactly integral ratio is not pushed up by
 * floating-point residue.
 */
inline long long required_exceed_count(long long n_scheduled, double expected_idle,
                                       long long t_slots) {
    if (expected_idle <= 0.0)
        throw std::invalid_argument("required_exceed_count: expected idle count must be positive");
    const double ratio =
        static_cast<double>(n_scheduled) * static_cast<double>(t_slots) / expected_idle;
    return static_cast<long long>(std::ceil(ratio * (1.0 - 1e-12)));
}

}  // namespace detail

/**
 * Probability that at least enough slots clear the gain threshold for the
 * planned wake count to fit: a binomial tail over the horizon with the
 * averaged per-slot exceedance probability.
 */
inline double schedule_probability(double gain_threshold, long long n_scheduled,
                                   double expected_idle, long long t_slots,
                                   std::span<const double> alpha_hat,
                                   const ScenarioConfig& cfg) {
    if (n_scheduled <= 0) return 1.0;
    const long long k = detail::required_exceed_count(n_scheduled, expected_idle, t_slots);
    return binomial_upper_tail(t_slots, k, exceed_probability(gain_threshold, alpha_hat, cfg));
}

/**
 * The gain threshold the runtime rule should use so that the schedule
 * succeeds with probability exactly 1 - epsilon.
 *
 * Solved in two nested monotone stages: first the per-slot exceedance
 * probability q* with binomial tail 1 - epsilon (tail is increasing in q),
 * then the threshold whose averaged exceedance equals q* (exceedance is
 * decreasing in the threshold).  A zero wake count needs no slots, so the
 * threshold degenerates to +infinity (never wake).  If even a zero
 * threshold cannot reach the target (the required count exceeds the
 * horizon), returns 0 — wake at every opportunity — and clears *reachable.
 */
inline double estimate_threshold(long long n_scheduled, double expected_idle, long long t_slots,
                                 std::span<const double> alpha_hat, double epsilon,
                                 const ScenarioConfig& cfg, bool* reachable = nullptr) {
    if (reachable) *reachable = true;
    if (!(epsilon > 0) || !(epsilon < 1))
        throw std::invalid_argument("estimate_threshold: epsilon must lie in (0, 1)");
    if (n_scheduled <= 0) return std::numeric_limits<double>::infinity();
    const long long k = detail::required_exceed_count(n_scheduled, expected_idle, t_slots);
    if (k > t_slots) {
        if (reachable) *reachable = false;
        return 0.0;
    }

    const double target_tail = 1.0 - epsilon;
    const double q_star = bisect_nondecreasing(
        [&](double q) { return binomial_upper_tail(t_slots, k, q); }, 0.0, 1.0, target_tail,
        1e-13, 200);

    // Bracket the threshold: exceedance is 1 at zero and decays to 0.
    double hi = 1.0;
    for (int i = 0; i < 200 && exceed_probability(hi, alpha_hat, cfg) > q_star; ++i) hi *= 2.0;
    return bisect_nondecreasing(
        [&](double g) { return -exceed_probability(g, alpha_hat, cfg); }, 0.0, hi, -q_star,
        1e-13, 200);
}

/**
 * The full planning pipeline an online policy runs before slot 0:
 *
 *   1. Predict the trajectory (forward at the mean speed) and from it the
 *      expected gains.
 *   2. Forecast how many slots will be idle — from the request-traffic
 *      statistics when those are known, else assume every slot is idle.
 *   3. Guess which slots those are (uniformly at random), and solve the
 *      planning problem on the guess under worst-case resources to get the
 *      wake count and water level.
 *   4. Turn the wake count into a runtime gain threshold via the
 *      probabilistic sizing above.
 *
 * `use_traffic_context` false gives the variant that knows the user and
 * channel statistics but nothing about request traffic.
 */
inline EstimatedParams estimate_policy_params(const ScenarioConfig& cfg, long long t_slots,
                                              double target_bits, bool use_traffic_context,
                                              std::uint64_t guess_seed) {
    EstimatedParams est;
    const MobilityTrace rollout = average_speed_rollout(cfg, t_slots);
    const std::vector<double> alpha_hat = large_scale_gains(rollout, cfg);

    est.expected_idle_slots =
        use_traffic_context ? estimate_idle_count(cfg, rollout) : static_cast<double>(t_slots);
    const long long idle_count = std::clamp(std::llround(est.expected_idle_slots), 0LL, t_slots);
    est.assumed_idle = guess_idle_set(t_slots, idle_count, guess_seed);

    if (target_bits <= 0) {
        est.nu = 0.0;
        return est;  // nothing to deliver: never wake anything
    }

    const std::vector<double> g_hat = predict_gains(alpha_hat, cfg);
    std::vector<WaterfillSlot> candidates;
    candidates.reserve(est.assumed_idle.size());
    for (long long t : est.assumed_idle)
        candidates.push_back({g_hat[t], cfg.wmax_hz, cfg.pmax_w});
    const WakeScanResult scan = scan_wake_count({}, candidates, target_bits, cfg.slot_s,
                                                cfg.pa_efficiency,
                                                cfg.p_active_w - cfg.p_sleep_w);
    est.nu = scan.nu;
    est.n_scheduled = scan.n_scheduled;
    est.feasible = scan.feasible;
    est.gain_threshold =
        estimate_threshold(est.n_scheduled, est.expected_idle_slots, t_slots, alpha_hat,
                           cfg.epsilon, cfg, &est.threshold_reachable);
    est.exceed_q = exceed_probability(est.gain_threshold, alpha_hat, cfg);
    return est;
}

}  // namespace greensched
