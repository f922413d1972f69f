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
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "greensched/channel.hpp"
#include "greensched/config.hpp"
#include "greensched/context.hpp"
#include "greensched/energy.hpp"
#include "greensched/offline.hpp"
#include "greensched/policies.hpp"
#include "greensched/rng.hpp"
#include "greensched/traffic.hpp"

namespace greensched {

/** One (policy, horizon, trial) evaluation. */
struct TrialRecord {
    PolicyKind policy{};
    long long t_slots = 0;
    int trial = 0;
    EnergyReport report;
    // Rule parameters, where the policy has them (NaN for the baselines).
    double nu = std::numeric_limits<double>::quiet_NaN();
    double gain_threshold = std::numeric_limits<double>::quiet_NaN();
    long long n_scheduled = 0;  // idle slots actually woken for the transfer
};

/** Per-(policy, horizon) summary across trials. */
struct AggregateRecord {
    PolicyKind policy{};
    long long t_slots = 0;
    int trials = 0;
    int outage_count = 0;
    double outage_fraction = 0.0;
    // Mean over trials that delivered in full; NaN when every trial failed
    // (then there is no meaningful energy to report).
    double mean_nrt_energy_j = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::vector<AggregateRecord> aggregates;
};

/** Execution knobs that do not affect the numbers, only how they're made. */
struct RunOptions {
    int threads = 1;
};

namespace detail {

/** Idle slots the run actually woke: scheduled with no request traffic. */
inline long long count_woken_idle(const std::vector<AllocationDecision>& decisions,
                                  const MobilityTrace& mobility,
                                  const OccupancyTrace& occupancy) {
    long long n = 0;
    for (const auto& d : decisions)
        if (d.scheduled && !occupancy.busy(d.t, mobility.serving_bs[d.t])) ++n;
    return n;
}

/** All records of one trial, policies in the order requested. */
inline std::vector<TrialRecord> evaluate_trial(const ScenarioConfig& cfg,
                                               std::span<const PolicyKind> policies,
                                               long long t_slots, int trial) {
    const std::uint64_t seed = cfg.base_seed;
    const auto horizon = static_cast<std::uint64_t>(t_slots);
    const auto trial_u = static_cast<std::uint64_t>(trial);
    const MobilityTrace mobility =
        generate_mobility(cfg, t_slots, substream_seed(seed, horizon, trial_u, "mobility"));
    const ChannelTrace channel =
        generate_channel(mobility, cfg, substream_seed(seed, horizon, trial_u, "fading"));
    const OccupancyTrace occupancy =
        simulate_background(cfg, t_slots, substream_seed(seed, horizon, trial_u, "background"));

    // Context estimation happens once, before slot 0, exactly like a real
    // scheduler would; both context policies share the idle-set guess stream.
    const std::uint64_t guess_seed = substream_seed(seed, horizon, trial_u, "idle-guess");
    bool need_all = false, need_ua = false, need_ub = false;
    for (PolicyKind k : policies) {
        need_all |= k == PolicyKind::AllContext;
        need_ua |= k == PolicyKind::UAContext;
        need_ub |= k == PolicyKind::UpperBound;
    }
    EstimatedParams est_all, est_ua;
    if (need_all) est_all = estimate_policy_params(cfg, t_slots, cfg.b_bits, true, guess_seed);
    if (need_ua) est_ua = estimate_policy_params(cfg, t_slots, cfg.b_bits, false, guess_seed);
    OfflineResult offline;
    if (need_ub) offline = optimize_offline(mobility, channel, occupancy, cfg);

    std::vector<TrialRecord> out;
    out.reserve(policies.size());
    for (PolicyKind kind : policies) {
        TrialRecord rec;
        rec.policy = kind;
        rec.t_slots = t_slots;
        rec.trial = trial;
        switch (kind) {
            case PolicyKind::UpperBound:
                rec.report = offline.report;
                rec.nu = offline.params.nu;
                rec.gain_threshold = offline.params.gain_threshold;
                rec.n_scheduled =
                    detail::count_woken_idle(offline.decisions, mobility, occupancy);
                break;
            case PolicyKind::AllContext:
            case PolicyKind::UAContext: {
                const EstimatedParams& est = kind == PolicyKind::AllContext ? est_all : est_ua;
                const PolicyRun run = run_policy(kind, mobility, channel, occupancy, cfg,
                                                 nullptr, &est);
                rec.report = run.report;
                rec.nu = est.nu;
                rec.gain_threshold = est.gain_threshold;
                rec.n_scheduled = detail::count_woken_idle(run.decisions, mobility, occupancy);
                break;
            }
            case PolicyKind::SEMax:
            case PolicyKind::EEMax: {
                const PolicyRun run = run_policy(kind, mobility, channel, occupancy, cfg);
                rec.report = run.report;
                rec.n_scheduled = detail::count_woken_idle(run.decisions, mobility, occupancy);
                break;
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace detail

/**
 * The full Monte-Carlo sweep: for every horizon in the sweep and every
 * trial, one realization (mobility, fading, occupancy) is generated from
 * seeds derived off (base_seed, horizon, trial, stream name), and every
 * requested policy runs on that same realization — so per-trial
 * comparisons are paired.  Trials are independent, so they may run on any
 * number of threads; records are assembled in a fixed order regardless,
 * and the output is sorted by (policy, horizon, trial).
 */
inline ExperimentResult run_experiment(ScenarioConfig cfg, std::vector<PolicyKind> policies,
                                       std::vector<long long> t_sweep,
                                       const RunOptions& opts = {}) {
    cfg.validate();
    calibrate_noise(cfg);
    if (policies.empty())
        policies.assign(kAllPolicies.begin(), kAllPolicies.end());
    if (t_sweep.empty()) t_sweep = cfg.sweep_or_default();

    ExperimentResult result;
    for (long long t_slots : t_sweep) {
        std::vector<std::vector<TrialRecord>> per_trial(cfg.trials);
        const int workers = std::clamp(opts.threads, 1, cfg.trials);
        if (workers <= 1) {
            for (int trial = 0; trial < cfg.trials; ++trial)
                per_trial[trial] = detail::evaluate_trial(cfg, policies, t_slots, trial);
        } else {
            std::atomic<int> next{0};
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (int trial = next.fetch_add(1); trial < cfg.trials;
                         trial = next.fetch_add(1))
                        per_trial[trial] = detail::evaluate_trial(cfg, policies, t_slots, trial);
                });
            }
            for (auto& th : pool) th.join();
        }
        for (auto& records : per_trial)
            for (auto& rec : records) result.records.push_back(std::move(rec));

        for (PolicyKind kind : policies) {
            AggregateRecord agg;
            agg.policy = kind;
            agg.t_slots = t_slots;
            double energy_sum = 0.0;
            int delivered = 0;
            for (const auto& records : per_trial)
                for (const auto& rec : records) {
                    if (rec.policy != kind) continue;
                    ++agg.trials;
                    if (rec.report.outage) {
                        ++agg.outage_count;
                    } else {
                        energy_sum += rec.report.nrt_energy_j();
                        ++delivered;
                    }
                }
            agg.outage_fraction =
                agg.trials > 0 ? static_cast<double>(agg.outage_count) / agg.trials : 0.0;
            if (delivered > 0) agg.mean_nrt_energy_j = energy_sum / delivered;
            result.aggregates.push_back(agg);
        }
    }

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const TrialRecord& a, const TrialRecord& b) {
                         if (a.policy != b.policy) return a.policy < b.policy;
                         if (a.t_slots != b.t_slots) return a.t_slots < b.t_slots;
                         return a.trial < b.trial;
                     });
    std::stable_sort(result.aggregates.begin(), result.aggregates.end(),
                     [](const AggregateRecord& a, const AggregateRecord& b) {
                         if (a.policy != b.policy) return a.policy < b.policy;
                         return a.t_slots < b.t_slots;
                     });
    return result;
}

/** results.csv: one row per (policy, T, trial), fixed column set. */
inline void write_results_csv(std::ostream& out, const ExperimentResult& result) {
    out << "policy,T,trial,nrt_energy_j,outage,delivered_bits,nu,g_th,n_sched\n";
    char buf[256];
    for (const auto& r : result.records) {
        const auto name = policy_name(r.policy);
        std::snprintf(buf, sizeof(buf), "%.*s,%lld,%d,%.12g,%d,%.12g,%.12g,%.12g,%lld\n",
                      static_cast<int>(name.size()), name.data(), r.t_slots, r.trial,
                      r.report.nrt_energy_j(), r.report.outage ? 1 : 0, r.report.delivered_bits,
                      r.nu, r.gain_threshold, r.n_scheduled);
        out << buf;
    }
}

/** aggregate.csv: one row per (policy, T). */
inline void write_aggregate_csv(std::ostream& out, const ExperimentResult& result) {
    out << "policy,T,trials,outage_count,outage_fraction,mean_nrt_energy_j\n";
    char buf[192];
    for (const auto& a : result.aggregates) {
        const auto name = policy_name(a.policy);
        std::snprintf(buf, sizeof(buf), "%.*s,%lld,%d,%d,%.12g,%.12g\n",
                      static_cast<int>(name.size()), name.data(), a.t_slots, a.trials,
                      a.outage_count, a.outage_fraction, a.mean_nrt_energy_j);
        out << buf;
    }
}

/** One grid point of the delivery-probability validation. */
struct Prop1Row {
    double gain_threshold = 0.0;
    double exceed_q = 0.0;       // averaged per-slot exceedance at this threshold
    double analytic = 0.0;       // binomial-tail prediction, exact trajectory forecast
    double simulated = 0.0;      // Monte-Carlo frequency over fading draws
    double analytic_erroneous = 0.0;  // prediction from a noisy trajectory forecast
};

struct Prop1Result {
    long long t_slots = 0;
    long long n_scheduled = 0;
    double expected_idle = 0.0;
    long long required_count = 0;  // slots that must clear the threshold
    std::vector<Prop1Row> rows;
};

/**
 * Validates the probabilistic sizing behind estimate_threshold: for a grid
 * of gain thresholds, compares the analytic probability that enough slots
 * clear the threshold against the Monte-Carlo frequency of that event over
 * fresh fading draws along the predicted trajectory.  A second analytic
 * column repeats the prediction with a log-normally perturbed trajectory
 * forecast, to show how forecast error moves the prediction.
 *
 * An empty grid picks 10 thresholds automatically, placed so the averaged
 * exceedance q sweeps through the critical ratio required_count / T — the
 * region where the tail transitions from ~1 to ~0.
 */
inline Prop1Result validate_proposition1(ScenarioConfig cfg, long long t_slots,
                                         double expected_idle, long long n_scheduled,
                                         std::vector<double> grid, long long draws,
                                         double alpha_error_db) {
    cfg.validate();
    calibrate_noise(cfg);
    if (t_slots < 1) throw std::invalid_argument("validate_proposition1: t_slots must be positive");
    if (draws < 1) throw std::invalid_argument("validate_proposition1: draws must be positive");
    if (!(expected_idle > 0))
        throw std::invalid_argument("validate_proposition1: expected_idle must be positive");

    const MobilityTrace rollout = average_speed_rollout(cfg, t_slots);
    const std::vector<double> alpha_hat = large_scale_gains(rollout, cfg);

    Prop1Result result;
    result.t_slots = t_slots;
    result.n_scheduled = n_scheduled;
    result.expected_idle = expected_idle;
    result.required_count = detail::required_exceed_count(n_scheduled, expected_idle, t_slots);
    const long long k = result.required_count;

    if (grid.empty()) {
        // Thresholds hit q = ratio * k/T for ratios straddling 1.
        const double q_crit = std::clamp(static_cast<double>(k) / t_slots, 1e-6, 1.0 - 1e-6);
        for (double ratio : {0.5, 0.7, 0.85, 0.95, 1.0, 1.05, 1.15, 1.3, 1.6, 2.0}) {
            const double q_target = std::clamp(ratio * q_crit, 1e-9, 1.0 - 1e-9);
            double hi = 1.0;
            for (int i = 0; i < 200 && exceed_probability(hi, alpha_hat, cfg) > q_target; ++i)
                hi *= 2.0;
            grid.push_back(bisect_nondecreasing(
                [&](double g) { return -exceed_probability(g, alpha_hat, cfg); }, 0.0, hi,
                -q_target, 1e-13, 200));
        }
        std::sort(grid.begin(), grid.end());
    }

    // Noisy forecast: each slot's predicted gain off by a log-normal factor.
    std::vector<double> alpha_err = alpha_hat;
    {
        std::mt19937_64 rng{substream_seed(cfg.base_seed, static_cast<std::uint64_t>(t_slots), 0,
                                           "prop1-alpha-error")};
        std::normal_distribution<double> err_db(0.0, alpha_error_db);
        for (double& a : alpha_err) a *= std::pow(10.0, err_db(rng) / 10.0);
    }

    result.rows.reserve(grid.size());
    for (double g_th : grid) {
        Prop1Row row;
        row.gain_threshold = g_th;
        row.exceed_q = exceed_probability(g_th, alpha_hat, cfg);
        row.analytic = binomial_upper_tail(t_slots, k, row.exceed_q);
        row.analytic_erroneous =
            binomial_upper_tail(t_slots, k, exceed_probability(g_th, alpha_err, cfg));
        result.rows.push_back(row);
    }

    // One pass of fading draws serves every grid point.
    std::mt19937_64 rng{substream_seed(cfg.base_seed, static_cast<std::uint64_t>(t_slots), 0,
                                       "prop1-fading")};
    std::gamma_distribution<double> fading(static_cast<double>(cfg.nt_antennas), 1.0);
    const double denom = cfg.snr_gap_linear() * cfg.noise_w;
    std::vector<long long> successes(grid.size(), 0);
    std::vector<long long> counts(grid.size());
    for (long long m = 0; m < draws; ++m) {
        std::fill(counts.begin(), counts.end(), 0);
        for (long long t = 0; t < t_slots; ++t) {
            const double g = alpha_hat[t] * fading(rng) / denom;
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (g >= grid[i]) ++counts[i];
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (counts[i] >= k) ++successes[i];
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        result.rows[i].simulated = static_cast<double>(successes[i]) / draws;
    return result;
}

/** prop1.csv: one row per threshold in the validation grid. */
inline void write_prop1_csv(std::ostream& out, const Prop1Result& result) {
    out << "g_th,q,analytic,simulated,analytic_erroneous\n";
    char buf[192];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", r.gain_threshold,
                      r.exceed_q, r.analytic, r.simulated, r.analytic_erroneous);
        out << buf;
    }
}

}  // namespace greensched
