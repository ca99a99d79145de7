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

#ifndef DMIMO_REPORT_HPP
#define DMIMO_REPORT_HPP

#include "dmimo/analysis.hpp"
#include "dmimo/large_scale.hpp"
#include "dmimo/link_state.hpp"
#include "dmimo/small_scale.hpp"
#include "dmimo/synthesis.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dmimo
{

struct AnalysisOptions
{
    double lsf_window_m = 0.0; // 0: ten wavelengths
    double d_exclude_m = PathGainModel{}.d_min;
    std::size_t ssf_window = 300;
    std::size_t ssf_tone_stride = 4;
    std::size_t ds_window = 300;
    std::size_t ds_hop = 150;
    double peak_threshold_db = 40.0;
    double noise_margin_db = 5.0;
    bool stationarity = true;
    std::size_t stationarity_window = 150;
    std::size_t stationarity_hop = 75;
    double collinearity_threshold = 0.9;
    bool hardening = true;
    std::size_t hardening_window = 300;
    std::size_t hardening_tone_stride = 8;
    std::size_t hardening_snapshot_stride = 4;
};

// Optional knowledge beyond the tensor itself. With `lsf_db`, the path gain
// is fitted on power minus the known LSF and the decay constant on the known
// LSF. With `pg_db` and `lsf_db`, small-scale amplitudes are taken from the
// channel divided by the known large-scale gain; with `k_factor` and
// `k_targets`, only snapshots whose K has settled on the state target count.
struct SideChannel
{
    const LinkStateTrace *states = nullptr;
    const Eigen::MatrixXd *lsf_db = nullptr;
    const Eigen::MatrixXd *pg_db = nullptr;
    const Eigen::MatrixXd *k_factor = nullptr;
    std::optional<std::array<double, 2>> k_targets;
};

struct StateStats
{
    std::size_t samples = 0; // anchor-snapshot pairs
    std::optional<PathGainModel> path_gain;
    std::optional<LognormalFit> lsf;
    std::optional<AutocorrelationFit> autocorrelation;
    std::optional<RiceFit> rice;
    double rice_ks = 0.0;
    std::optional<double> delay_spread_median_s;
    std::size_t delay_spread_windows = 0;
    std::optional<double> stationarity_median_m;
    std::optional<double> mean_run_length_m;
};

struct HardeningStats
{
    double single_outage_db = 0.0, single_median_db = 0.0;
    double mrt_outage_db = 0.0, mrt_median_db = 0.0;
};

struct FigureData
{
    std::vector<int> los_count;
    std::array<std::vector<double>, 2> lsf_db;
    std::array<std::vector<double>, 2> delay_spread_s;
    std::array<std::vector<double>, 2> ssf_amplitude;
    std::vector<double> stationarity_m;
    Eigen::MatrixXd collinearity; // first anchor
    std::optional<HardeningSummary> hardening_full, hardening_ssf;
};

struct StatsReport
{
    std::size_t M = 0, T = 0, F = 0;
    bool state_conditioned = false;
    StateStats all;
    std::array<StateStats, 2> by_state;
    Eigen::MatrixXd covariance;
    std::vector<double> transition_rate;
    std::optional<double> pooled_transition_rate;
    std::optional<double> median_los_count;
    std::optional<HardeningStats> hardening_full, hardening_ssf;

    // Values under the top-level keys: the LoS subset when states are known.
    const StateStats &headline() const { return state_conditioned ? by_state[0] : all; }
};

StatsReport analyze(const ChannelTensor &tensor, const Deployment &deployment, const Trajectory &trajectory,
                    const SideChannel &side = {}, const AnalysisOptions &options = {}, FigureData *figures = nullptr);

std::string report_to_json(const StatsReport &report, int indent = 2);

// One CSV per statistic.
void write_figures(const std::filesystem::path &dir, const FigureData &figures, const StatsReport &report);

// Ground-truth CSV: snapshot,anchor,lsf_db,k_factor,pg_db,distance_m
void write_truth_csv(std::ostream &out, const GroundTruth &truth);
GroundTruth read_truth_csv(std::istream &in);

struct Tolerance
{
    double value = 0.0;
    bool relative = false;
};

struct ToleranceSet
{
    std::map<std::string, Tolerance> entries;
    static ToleranceSet defaults();
};

struct ValidationRow
{
    std::string parameter;
    double expected = 0.0;
    double estimated = 0.0;
    Tolerance tolerance;
    bool pass = false;
};

struct ValidationResult
{
    std::vector<ValidationRow> rows;
    StatsReport report;
    bool pass() const;
    std::string table() const;
};

// Compares a ground-truth-assisted analysis of `generated` against the
// configuration that produced it.
ValidationResult validate_generated(const Generated &generated, const ModelConfig &config,
                                    const Deployment &deployment, const Trajectory &trajectory,
                                    const ToleranceSet &tolerances, const AnalysisOptions &options = {});

} // namespace dmimo

#endif
