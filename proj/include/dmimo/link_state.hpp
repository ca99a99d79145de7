// SPDX-License-Identifier: Apache-2.0
//
// dmimo-channel: spatially consistent D-MIMO channel simulation for industrial halls
// Copyright (C) 2026 The dmimo-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DMIMO_LINK_STATE_HPP
#define DMIMO_LINK_STATE_HPP

#include "dmimo/geometry.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace dmimo
{

// Per-anchor, per-snapshot link labels, anchor-major.
struct LinkStateTrace
{
    std::size_t num_anchors = 0;
    std::size_t num_snapshots = 0;
    std::vector<LinkState> states;
    std::optional<std::vector<double>> coverage;

    LinkStateTrace() = default;
    LinkStateTrace(std::size_t m, std::size_t t, LinkState fill = LinkState::LoS)
        : num_anchors(m), num_snapshots(t), states(m * t, fill)
    {
    }

    LinkState at(std::size_t m, std::size_t k) const { return states[m * num_snapshots + k]; }
    LinkState &at(std::size_t m, std::size_t k) { return states[m * num_snapshots + k]; }

    // Throws when dimensions or coverage labels are inconsistent.
    void validate() const;
};

struct TransitionModel
{
    static constexpr double kDefaultLow = 0.04;  // 1/m
    static constexpr double kDefaultHigh = 0.22; // 1/m

    std::vector<double> rate_per_anchor;
    double rate_low = kDefaultLow;
    double rate_high = kDefaultHigh;
};

TransitionModel draw_transition_model(Rng &rng, std::size_t num_anchors, double rate_low = TransitionModel::kDefaultLow,
                                      double rate_high = TransitionModel::kDefaultHigh);

// Every anchor gets the same fixed rate.
TransitionModel fixed_transition_model(std::size_t num_anchors, double rate);

// Two-state process driven by travelled distance. Each anchor owns an
// independent random stream, so the result does not depend on how anchors
// are interleaved.
class StateProcess
{
  public:
    StateProcess(std::uint64_t seed, const TransitionModel &model, std::vector<LinkState> initial);

    // Advances every anchor by a step of `delta_d` metres.
    void advance(double delta_d);
    LinkState state(std::size_t m) const { return states_[m]; }
    const std::vector<LinkState> &states() const { return states_; }

  private:
    std::vector<double> rates_;
    std::vector<Rng> rngs_;
    std::vector<LinkState> states_;
};

// Stationary initial states: LoS or OLoS with probability 1/2 each.
std::vector<LinkState> draw_initial_states(Rng &rng, std::size_t num_anchors);

LinkStateTrace simulate_states(Rng &rng, const TransitionModel &model, const Trajectory &trajectory,
                               const std::vector<LinkState> &initial);

// Label changes per metre travelled, per anchor.
std::vector<double> estimate_transition_rate(const LinkStateTrace &trace, const Trajectory &trajectory);

// Pooled estimate over all anchors: total changes / (anchors * distance).
double estimate_pooled_transition_rate(const LinkStateTrace &trace, const Trajectory &trajectory);

std::vector<int> count_los_links(const LinkStateTrace &trace);

struct RunLength
{
    LinkState state;
    double length_m;
};

// Distances between consecutive label changes of one anchor. The leading and
// trailing runs are censored by the record edges and are dropped unless asked.
std::vector<RunLength> run_lengths(const LinkStateTrace &trace, const Trajectory &trajectory, std::size_t anchor,
                                   bool keep_censored = false);

// Coverage-based labels for every (anchor, snapshot) pair.
LinkStateTrace classify_trajectory(const Deployment &deployment, const Trajectory &trajectory,
                                   const PointCloud &cloud, double radius, int grid_n = kDefaultCoverageGrid);

// CSV with header `snapshot,anchor,state,coverage`; coverage left empty when absent.
void write_states_csv(std::ostream &out, const LinkStateTrace &trace);
LinkStateTrace read_states_csv(std::istream &in);

} // namespace dmimo

#endif
