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

#include "dmimo/link_state.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dmimo
{

void LinkStateTrace::validate() const
{
    if (states.size() != num_anchors * num_snapshots)
        throw std::invalid_argument("LinkStateTrace: state matrix has wrong size");
    if (!coverage)
        return;
    if (coverage->size() != states.size())
        throw std::invalid_argument("LinkStateTrace: coverage matrix has wrong size");
    for (std::size_t i = 0; i < states.size(); ++i)
        if (classify_state((*coverage)[i]) != states[i])
            throw std::invalid_argument("LinkStateTrace: label disagrees with coverage at entry " + std::to_string(i));
}

TransitionModel draw_transition_model(Rng &rng, std::size_t num_anchors, double rate_low, double rate_high)
{
    if (!(rate_low > 0.0) || rate_high < rate_low)
        throw std::invalid_argument("draw_transition_model: invalid rate bounds");
    TransitionModel model;
    model.rate_low = rate_low;
    model.rate_high = rate_high;
    model.rate_per_anchor.resize(num_anchors);
    for (auto &r : model.rate_per_anchor)
        r = rate_low + (rate_high - rate_low) * uniform01(rng);
    return model;
}

TransitionModel fixed_transition_model(std::size_t num_anchors, double rate)
{
    if (!(rate >= 0.0))
        throw std::invalid_argument("fixed_transition_model: rate must be non-negative");
    TransitionModel model;
    model.rate_low = model.rate_high = rate;
    model.rate_per_anchor.assign(num_anchors, rate);
    return model;
}

StateProcess::StateProcess(std::uint64_t seed, const TransitionModel &model, std::vector<LinkState> initial)
    : rates_(model.rate_per_anchor), states_(std::move(initial))
{
    if (states_.size() != rates_.size())
        throw std::invalid_argument("StateProcess: initial states and rates differ in length");
    rngs_.reserve(rates_.size());
    for (std::size_t m = 0; m < rates_.size(); ++m)
        rngs_.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(Stream::Transitions), m));
}

void StateProcess::advance(double delta_d)
{
    for (std::size_t m = 0; m < rates_.size(); ++m)
    {
        // one draw per anchor and step keeps the stream aligned with the snapshot index
        const double u = uniform01(rngs_[m]);
        const double p = -std::expm1(-rates_[m] * delta_d);
        if (u < p)
            states_[m] = states_[m] == LinkState::LoS ? LinkState::OLoS : LinkState::LoS;
    }
}

std::vector<LinkState> draw_initial_states(Rng &rng, std::size_t num_anchors)
{
    std::vector<LinkState> s(num_anchors);
    for (auto &x : s)
        x = uniform01(rng) < 0.5 ? LinkState::LoS : LinkState::OLoS;
    return s;
}

LinkStateTrace simulate_states(Rng &rng, const TransitionModel &model, const Trajectory &trajectory,
                               const std::vector<LinkState> &initial)
{
    const std::size_t M = model.rate_per_anchor.size();
    const std::size_t T = trajectory.size();
    StateProcess proc(rng(), model, initial);
    LinkStateTrace trace(M, T);
    for (std::size_t k = 0; k < T; ++k)
    {
        if (k > 0)
            proc.advance(trajectory.step_distance(k));
        for (std::size_t m = 0; m < M; ++m)
            trace.at(m, k) = proc.state(m);
    }
    return trace;
}

namespace
{
std::size_t count_changes(const LinkStateTrace &trace, std::size_t m)
{
    std::size_t n = 0;
    for (std::size_t k = 1; k < trace.num_snapshots; ++k)
        n += trace.at(m, k) != trace.at(m, k - 1) ? 1 : 0;
    return n;
}

void check_dims(const LinkStateTrace &trace, const Trajectory &trajectory)
{
    if (trace.num_snapshots != trajectory.size())
        throw std::invalid_argument("trace and trajectory lengths differ");
    if (trace.num_snapshots < 2)
        throw std::invalid_argument("at least two snapshots are required");
    if (!(trajectory.total_distance() > 0.0))
        throw std::invalid_argument("trajectory does not move");
}
} // namespace

std::vector<double> estimate_transition_rate(const LinkStateTrace &trace, const Trajectory &trajectory)
{
    check_dims(trace, trajectory);
    std::vector<double> rate(trace.num_anchors);
    for (std::size_t m = 0; m < trace.num_anchors; ++m)
        rate[m] = static_cast<double>(count_changes(trace, m)) / trajectory.total_distance();
    return rate;
}

double estimate_pooled_transition_rate(const LinkStateTrace &trace, const Trajectory &trajectory)
{
    check_dims(trace, trajectory);
    std::size_t n = 0;
    for (std::size_t m = 0; m < trace.num_anchors; ++m)
        n += count_changes(trace, m);
    return static_cast<double>(n) / (static_cast<double>(trace.num_anchors) * trajectory.total_distance());
}

std::vector<int> count_los_links(const LinkStateTrace &trace)
{
    std::vector<int> count(trace.num_snapshots, 0);
    for (std::size_t m = 0; m < trace.num_anchors; ++m)
        for (std::size_t k = 0; k < trace.num_snapshots; ++k)
            count[k] += trace.at(m, k) == LinkState::LoS ? 1 : 0;
    return count;
}

std::vector<RunLength> run_lengths(const LinkStateTrace &trace, const Trajectory &trajectory, std::size_t anchor,
                                   bool keep_censored)
{
    if (trace.num_snapshots != trajectory.size())
        throw std::invalid_argument("run_lengths: trace and trajectory lengths differ");
    if (anchor >= trace.num_anchors)
        throw std::out_of_range("run_lengths: anchor index out of range");
    std::vector<RunLength> runs;
    const auto &s = trajectory.travelled();
    std::size_t start = 0;
    bool leading = true;
    for (std::size_t k = 1; k <= trace.num_snapshots; ++k)
    {
        const bool end = k == trace.num_snapshots;
        if (!end && trace.at(anchor, k) == trace.at(anchor, k - 1))
            continue;
        // the change happens somewhere in (k-1, k]; attribute it to snapshot k
        const double stop = end ? s.back() : s[k];
        const bool censored = leading || end;
        if (keep_censored || !censored)
            runs.push_back({trace.at(anchor, start), stop - s[start]});
        leading = false;
        start = k;
    }
    return runs;
}

LinkStateTrace classify_trajectory(const Deployment &deployment, const Trajectory &trajectory,
                                   const PointCloud &cloud, double radius, int grid_n)
{
    const std::size_t M = deployment.num_anchors(), T = trajectory.size();
    LinkStateTrace trace(M, T);
    trace.coverage.emplace(M * T, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < T; ++k)
        {
            const double c = fresnel_coverage(deployment.anchors[m], trajectory.position(k), cloud, radius, grid_n);
            (*trace.coverage)[m * T + k] = c;
            trace.at(m, k) = classify_state(c);
        }
    return trace;
}

void write_states_csv(std::ostream &out, const LinkStateTrace &trace)
{
    out << "snapshot,anchor,state,coverage\n";
    for (std::size_t k = 0; k < trace.num_snapshots; ++k)
        for (std::size_t m = 0; m < trace.num_anchors; ++m)
        {
            out << k << ',' << m << ',' << to_string(trace.at(m, k)) << ',';
            if (trace.coverage)
                out << (*trace.coverage)[m * trace.num_snapshots + k];
            out << '\n';
        }
}

LinkStateTrace read_states_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("snapshot,anchor,state,coverage", 0) != 0)
        throw std::invalid_argument("states CSV: missing header 'snapshot,anchor,state,coverage'");

    struct Row
    {
        LinkState s;
        std::optional<double> c;
    };
    std::map<std::pair<std::size_t, std::size_t>, Row> rows;
    std::size_t max_k = 0, max_m = 0, line_no = 1;
    bool any_cov = false, all_cov = true;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream is(line);
        std::string fk, fm, fs, fc;
        std::getline(is, fk, ',');
        std::getline(is, fm, ',');
        std::getline(is, fs, ',');
        std::getline(is, fc);
        const auto state = parse_link_state(fs);
        if (!state || fk.empty() || fm.empty())
            throw std::invalid_argument("states CSV line " + std::to_string(line_no) + ": malformed row");
        const std::size_t k = std::stoul(fk), m = std::stoul(fm);
        Row r{*state, std::nullopt};
        if (!fc.empty())
        {
            r.c = std::stod(fc);
            any_cov = true;
        }
        else
            all_cov = false;
        rows[{m, k}] = r;
        max_k = std::max(max_k, k);
        max_m = std::max(max_m, m);
    }
    if (rows.empty())
        throw std::invalid_argument("states CSV: no rows");
    LinkStateTrace trace(max_m + 1, max_k + 1);
    if (rows.size() != trace.states.size())
        throw std::invalid_argument("states CSV: rows do not form a complete anchor x snapshot grid");
    if (any_cov && all_cov)
        trace.coverage.emplace(trace.states.size(), 0.0);
    for (const auto &[key, r] : rows)
    {
        trace.at(key.first, key.second) = r.s;
        if (trace.coverage)
            (*trace.coverage)[key.first * trace.num_snapshots + key.second] = *r.c;
    }
    return trace;
}

} // namespace dmimo
