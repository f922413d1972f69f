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

#include "greensched/channel.hpp"
#include "greensched/config.hpp"

namespace greensched {

/**
 * Number of latency-critical requests in service at every station in every
 * slot, plus the resources they pin down.  A station with a zero count is
 * idle for that slot; a positive count makes the slot busy and reserves
 * count * request_power_w watts and count * request_bandwidth_hz bandwidth.
 */
struct OccupancyTrace {
    long long t_slots = 0;
    int num_bs = 0;
    std::vector<int> active;  // flattened [t * num_bs + bs]
    double request_power_w = 0.0;
    double request_bandwidth_hz = 0.0;

    int active_count(long long t, int bs) const { return active[t * num_bs + bs]; }
    bool busy(long long t, int bs) const { return active_count(t, bs) > 0; }
    double rt_power_w(long long t, int bs) const { return active_count(t, bs) * request_power_w; }
    double rt_bandwidth_hz(long long t, int bs) const {
        return active_count(t, bs) * request_bandwidth_hz;
    }
};

/**
 * Simulates the request traffic at every station over the horizon.  Each
 * slot, in order: new Poisson(rate) arrivals are admitted up to the
 * capacity (excess is blocked), the occupancy is recorded, and then each
 * in-service request independently completes with probability
 * 1 / mean_service_slots.  Admission-before-recording means a request
 * occupies at least the slot it arrives in, and the recorded occupancy's
 * stationary idle fraction matches idle_probability below.
 * Stations start empty at t = 0.
 */
inline OccupancyTrace simulate_background(const ScenarioConfig& cfg, long long t_slots,
                                          std::uint64_t seed) {
    if (t_slots < 1) throw std::invalid_argument("simulate_background: t_slots must be positive");
    const auto& bg = cfg.background;
    std::mt19937_64 rng{seed};
    const double depart_prob = 1.0 / bg.mean_service_slots;

    OccupancyTrace trace;
    trace.t_slots = t_slots;
    trace.num_bs = cfg.num_bs();
    trace.active.assign(static_cast<std::size_t>(t_slots) * trace.num_bs, 0);
    trace.request_power_w = bg.request_power_w;
    trace.request_bandwidth_hz = bg.request_bandwidth_hz;

    std::vector<int> in_service(trace.num_bs, 0);
    for (long long t = 0; t < t_slots; ++t) {
        for (int i = 0; i < trace.num_bs; ++i) {
            const double rate = bg.arrival_rates_per_slot[i];
            if (rate > 0.0) {
                std::poisson_distribution<int> arrivals(rate);
                in_service[i] = std::min(in_service[i] + arrivals(rng), bg.request_capacity);
            }
            trace.active[t * trace.num_bs + i] = in_service[i];
            if (in_service[i] > 0 && depart_prob > 0.0) {
                std::binomial_distribution<int> departures(in_service[i], depart_prob);
                in_service[i] -= departures(rng);
            }
        }
    }
    return trace;
}

/**
 * Stationary probability that a station with Poisson arrival rate `lambda`
 * per slot, mean service time `v` slots, and room for `capacity` parallel
 * requests holds zero requests:
 *
 *   P[idle] = 1 / sum_{n=0}^{capacity} (lambda v)^n / n!
 *
 * This is the loss-system occupancy distribution evaluated at zero; the
 * slotted simulation above converges to it.
 */
inline double idle_probability(double lambda, double v, int capacity) {
    if (lambda < 0) throw std::invalid_argument("idle_probability: negative arrival rate");
    if (v < 1) throw std::invalid_argument("idle_probability: mean service below one slot");
    if (capacity < 0) throw std::invalid_argument("idle_probability: negative capacity");
    const double load = lambda * v;
    double term = 1.0, sum = 1.0;  // n = 0
    for (int n = 1; n <= capacity; ++n) {
        term *= load / n;
        sum += term;
    }
    return 1.0 / sum;
}

/**
 * Expected number of idle slots the user's serving station contributes over
 * a trajectory: the sum over slots of the stationary idle probability of
 * whichever station serves the user in that slot.  Real-valued by design;
 * callers decide how to round.
 */
inline double estimate_idle_count(const ScenarioConfig& cfg, const MobilityTrace& mobility) {
    double expected = 0.0;
    for (int bs : mobility.serving_bs) {
        expected += idle_probability(cfg.background.arrival_rates_per_slot[bs],
                                     cfg.background.mean_service_slots,
                                     cfg.background.request_capacity);
    }
    return expected;
}

/** Per-slot occupancy dump: t, bs, active_count, p_rt_w, w_rt_hz. */
inline void write_occupancy_csv(std::ostream& out, const OccupancyTrace& trace) {
    out << "t,bs,active_count,p_rt_w,w_rt_hz\n";
    char buf[120];
    for (long long t = 0; t < trace.t_slots; ++t) {
        for (int i = 0; i < trace.num_bs; ++i) {
            std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.12g,%.12g\n", t, i,
                          trace.active_count(t, i), trace.rt_power_w(t, i),
                          trace.rt_bandwidth_hz(t, i));
            out << buf;
        }
    }
}

}  // namespace greensched
