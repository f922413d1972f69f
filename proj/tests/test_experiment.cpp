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

// Monte-Carlo sweep harness: reproducibility across thread counts, paired
// realizations, aggregation semantics, the CSV schemas, and the
// delivery-probability validation grid.

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "greensched/experiment.hpp"

using namespace greensched;

namespace {

ScenarioConfig sweep_cfg(int trials, double b_bits) {
    ScenarioConfig cfg;
    cfg.trials = trials;
    cfg.b_bits = b_bits;
    cfg.base_seed = 20260819;
    cfg.validate();
    return cfg;
}

std::vector<PolicyKind> all_policies() {
    return {kAllPolicies.begin(), kAllPolicies.end()};
}

std::string results_text(const ExperimentResult& r) {
    std::ostringstream out;
    write_results_csv(out, r);
    return out.str();
}

std::string aggregate_text(const ExperimentResult& r) {
    std::ostringstream out;
    write_aggregate_csv(out, r);
    return out.str();
}

}  // namespace

TEST(Experiment, ThreadCountNeverChangesTheBytes) {
    const ScenarioConfig cfg = sweep_cfg(6, 2e8);
    const std::vector<long long> sweep{12, 18};
    RunOptions serial, pooled;
    serial.threads = 1;
    pooled.threads = 4;
    const ExperimentResult a = run_experiment(cfg, all_policies(), sweep, serial);
    const ExperimentResult b = run_experiment(cfg, all_policies(), sweep, pooled);
    EXPECT_EQ(results_text(a), results_text(b));
    EXPECT_EQ(aggregate_text(a), aggregate_text(b));
    // And a repeat of the same serial run reproduces itself byte for byte.
    const ExperimentResult c = run_experiment(cfg, all_policies(), sweep, serial);
    EXPECT_EQ(results_text(a), results_text(c));
}

TEST(Experiment, PolicyListDoesNotPerturbTheRealizations) {
    // Each trial's realization derives from (seed, horizon, trial) alone, so
    // evaluating extra policies must leave every other policy's records
    // untouched — that is what makes the per-trial comparisons paired.
    const ScenarioConfig cfg = sweep_cfg(5, 2e8);
    const std::vector<long long> sweep{15};
    const ExperimentResult alone = run_experiment(cfg, {PolicyKind::SEMax}, sweep, {});
    const ExperimentResult together = run_experiment(
        cfg, {PolicyKind::UpperBound, PolicyKind::SEMax, PolicyKind::EEMax}, sweep, {});

    std::vector<TrialRecord> se_alone, se_together;
    for (const auto& r : alone.records)
        if (r.policy == PolicyKind::SEMax) se_alone.push_back(r);
    for (const auto& r : together.records)
        if (r.policy == PolicyKind::SEMax) se_together.push_back(r);
    ASSERT_EQ(se_alone.size(), 5u);
    ASSERT_EQ(se_together.size(), 5u);
    for (std::size_t i = 0; i < se_alone.size(); ++i) {
        EXPECT_EQ(se_alone[i].trial, se_together[i].trial);
        EXPECT_EQ(se_alone[i].report.nrt_energy_j(), se_together[i].report.nrt_energy_j());
        EXPECT_EQ(se_alone[i].report.delivered_bits, se_together[i].report.delivered_bits);
        EXPECT_EQ(se_alone[i].report.outage, se_together[i].report.outage);
        EXPECT_EQ(se_alone[i].n_scheduled, se_together[i].n_scheduled);
    }
}

TEST(Experiment, RecordsSortedAndAggregatesDerivedFromThem) {
    const ScenarioConfig cfg = sweep_cfg(6, 2e8);
    const std::vector<long long> sweep{12, 18};
    const ExperimentResult res = run_experiment(cfg, all_policies(), sweep, {});
    ASSERT_EQ(res.records.size(), 5u * 2u * 6u);
    ASSERT_EQ(res.aggregates.size(), 5u * 2u);

    for (std::size_t i = 1; i < res.records.size(); ++i) {
        const auto& p = res.records[i - 1];
        const auto& q = res.records[i];
        const bool ordered = p.policy < q.policy ||
                             (p.policy == q.policy && p.t_slots < q.t_slots) ||
                             (p.policy == q.policy && p.t_slots == q.t_slots &&
                              p.trial < q.trial);
        EXPECT_TRUE(ordered) << "records out of order at index " << i;
    }

    for (const auto& agg : res.aggregates) {
        EXPECT_EQ(agg.trials, 6);
        int outages = 0, delivered = 0;
        double energy = 0.0;
        for (const auto& r : res.records) {
            if (r.policy != agg.policy || r.t_slots != agg.t_slots) continue;
            if (r.report.outage) {
                ++outages;
            } else {
                energy += r.report.nrt_energy_j();
                ++delivered;
            }
        }
        EXPECT_EQ(agg.outage_count, outages);
        EXPECT_DOUBLE_EQ(agg.outage_fraction, outages / 6.0);
        if (delivered > 0) {
            EXPECT_DOUBLE_EQ(agg.mean_nrt_energy_j, energy / delivered);
        } else {
            EXPECT_TRUE(std::isnan(agg.mean_nrt_energy_j));
        }
        // The clairvoyant bound and both context policies report their rule
        // parameters; the baselines have none.
        for (const auto& r : res.records) {
            if (r.t_slots != agg.t_slots || r.policy != agg.policy) continue;
            const bool has_rule = r.policy == PolicyKind::UpperBound ||
                                  r.policy == PolicyKind::AllContext ||
                                  r.policy == PolicyKind::UAContext;
            EXPECT_EQ(!std::isnan(r.nu), has_rule);
        }
    }
}

TEST(Experiment, HopelessTargetYieldsAllOutagesAndNoMeanEnergy) {
    ScenarioConfig cfg = sweep_cfg(3, 1e15);
    const ExperimentResult res = run_experiment(cfg, {PolicyKind::SEMax}, {6}, {});
    ASSERT_EQ(res.aggregates.size(), 1u);
    const AggregateRecord& agg = res.aggregates.front();
    EXPECT_EQ(agg.outage_count, 3);
    EXPECT_DOUBLE_EQ(agg.outage_fraction, 1.0);
    EXPECT_TRUE(std::isnan(agg.mean_nrt_energy_j));
    // The CSV spells the undefined mean out as nan rather than inventing 0.
    const std::string csv = aggregate_text(res);
    EXPECT_NE(csv.find("SEMax,6,3,3,1,nan\n"), std::string::npos) << csv;
}

TEST(ResultsCsv, SchemaAndNumberFormatting) {
    ExperimentResult res;
    TrialRecord base;
    base.policy = PolicyKind::SEMax;
    base.t_slots = 5;
    base.trial = 0;
    base.report.nrt_transmit_energy_j = 1.5;
    base.report.nrt_circuit_energy_j = 0.5;
    base.report.delivered_bits = 1e6;
    base.n_scheduled = 2;
    res.records.push_back(base);

    TrialRecord ub;
    ub.policy = PolicyKind::UpperBound;
    ub.t_slots = 5;
    ub.trial = 1;
    ub.report.nrt_transmit_energy_j = 0.25;
    ub.report.delivered_bits = 12345.5;
    ub.report.outage = true;
    ub.nu = 6.5e-7;
    ub.gain_threshold = 2.5e-6;
    res.records.push_back(ub);

    EXPECT_EQ(results_text(res),
              "policy,T,trial,nrt_energy_j,outage,delivered_bits,nu,g_th,n_sched\n"
              "SEMax,5,0,2,0,1000000,nan,nan,2\n"
              "UpperBound,5,1,0.25,1,12345.5,6.5e-07,2.5e-06,0\n");

    AggregateRecord agg;
    agg.policy = PolicyKind::SEMax;
    agg.t_slots = 5;
    agg.trials = 6;
    agg.outage_count = 2;
    agg.outage_fraction = 2.0 / 6.0;
    agg.mean_nrt_energy_j = 123.456;
    res.aggregates.push_back(agg);
    EXPECT_EQ(aggregate_text(res),
              "policy,T,trials,outage_count,outage_fraction,mean_nrt_energy_j\n"
              "SEMax,5,6,2,0.333333333333,123.456\n");
}

TEST(Prop1, AnalyticTailTracksTheSimulatedFrequency) {
    ScenarioConfig cfg;
    cfg.base_seed = 7;
    // A stationary user keeps the per-slot exceedance homogeneous, so the
    // binomial tail is exact and only Monte-Carlo noise separates the two.
    cfg.v_max_mps = 0.0;
    cfg.user_start_m = 100.0;
    const Prop1Result res = validate_proposition1(cfg, 60, 30.0, 8, {}, 4000, 2.0);
    EXPECT_EQ(res.required_count, 16);  // 8 wakes out of a forecast half-idle horizon
    ASSERT_EQ(res.rows.size(), 10u);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const Prop1Row& row = res.rows[i];
        EXPECT_GE(row.exceed_q, 0.0);
        EXPECT_LE(row.exceed_q, 1.0);
        EXPECT_NEAR(row.analytic, row.simulated, 0.06) << "threshold " << row.gain_threshold;
        if (i > 0) {
            EXPECT_GE(row.gain_threshold, res.rows[i - 1].gain_threshold);
            EXPECT_LE(row.exceed_q, res.rows[i - 1].exceed_q + 1e-12);
            EXPECT_LE(row.analytic, res.rows[i - 1].analytic + 1e-12);
        }
    }
    // The auto grid straddles the transition: certain success at the low
    // end, near-certain failure at the high end.
    EXPECT_GT(res.rows.front().analytic, 0.9);
    EXPECT_LT(res.rows.back().analytic, 0.5);
}

TEST(Prop1, DegenerateThresholdsAndBadArguments) {
    ScenarioConfig cfg;
    cfg.base_seed = 7;
    const Prop1Result res = validate_proposition1(cfg, 40, 20.0, 5, {0.0, 1e12}, 500, 2.0);
    ASSERT_EQ(res.rows.size(), 2u);
    // Threshold zero: every slot clears it, analytically and in simulation.
    EXPECT_DOUBLE_EQ(res.rows[0].exceed_q, 1.0);
    EXPECT_DOUBLE_EQ(res.rows[0].analytic, 1.0);
    EXPECT_DOUBLE_EQ(res.rows[0].simulated, 1.0);
    // A threshold far above any attainable gain: nobody clears it.
    EXPECT_LT(res.rows[1].exceed_q, 1e-12);
    EXPECT_LT(res.rows[1].analytic, 1e-12);
    EXPECT_DOUBLE_EQ(res.rows[1].simulated, 0.0);

    EXPECT_THROW(validate_proposition1(cfg, 0, 20.0, 5, {}, 100, 2.0), std::invalid_argument);
    EXPECT_THROW(validate_proposition1(cfg, 40, 0.0, 5, {}, 100, 2.0), std::invalid_argument);
    EXPECT_THROW(validate_proposition1(cfg, 40, 20.0, 5, {}, 0, 2.0), std::invalid_argument);
}

TEST(Prop1, CsvShape) {
    Prop1Result res;
    Prop1Row row;
    row.gain_threshold = 2.5e-6;
    row.exceed_q = 0.25;
    row.analytic = 0.75;
    row.simulated = 0.7425;
    row.analytic_erroneous = 0.625;
    res.rows.push_back(row);
    std::ostringstream out;
    write_prop1_csv(out, res);
    EXPECT_EQ(out.str(),
              "g_th,q,analytic,simulated,analytic_erroneous\n"
              "2.5e-06,0.25,0.75,0.7425,0.625\n");
}
