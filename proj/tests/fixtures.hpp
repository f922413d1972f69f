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

#include <cstdint>

#include "greensched/channel.hpp"
#include "greensched/config.hpp"
#include "greensched/traffic.hpp"

namespace testref {

/** One fully materialized random scenario small enough for unit tests. */
struct Realization {
    greensched::ScenarioConfig cfg;
    greensched::MobilityTrace mobility;
    greensched::ChannelTrace channel;
    greensched::OccupancyTrace occupancy;

    Realization(long long t_slots, double b_bits, std::uint64_t seed) {
        cfg.t_slots = t_slots;
        cfg.b_bits = b_bits;
        cfg.validate();
        greensched::calibrate_noise(cfg);
        mobility = greensched::generate_mobility(cfg, t_slots, seed);
        channel = greensched::generate_channel(mobility, cfg, seed + 1);
        occupancy = greensched::simulate_background(cfg, t_slots, seed + 2);
    }

    /** The same realization truncated to its first t slots. */
    Realization prefix(long long t) const {
        Realization r(*this);
        r.cfg.t_slots = t;
        r.mobility.positions_m.resize(t);
        r.mobility.speeds_mps.resize(t);
        r.mobility.serving_bs.resize(t);
        r.channel.alpha.resize(t);
        r.channel.fading_power.resize(t);
        r.channel.g.resize(t);
        r.occupancy.t_slots = t;
        r.occupancy.active.resize(t * r.occupancy.num_bs);
        return r;
    }
};

}  // namespace testref
