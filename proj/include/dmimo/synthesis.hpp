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

#ifndef DMIMO_SYNTHESIS_HPP
#define DMIMO_SYNTHESIS_HPP

#include "dmimo/geometry.hpp"
#include "dmimo/large_scale.hpp"
#include "dmimo/link_state.hpp"
#include "dmimo/small_scale.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace dmimo
{

struct ModelConfig
{
    std::uint64_t seed = 1;

    PathGainPair path_gain;
    ShadowingModel shadowing;
    CovarianceModel covariance;
    CovarianceSelection covariance_selection = CovarianceSelection::AgentMajority;
    std::array<RiceModel, 2> rice{RiceModel::los(), RiceModel::olos()};
    double rate_low = TransitionModel::kDefaultLow;
    double rate_high = TransitionModel::kDefaultHigh;

    std::size_t n_io = 30;
    std::array<double, 2> delay_spread_s{47e-9, 53e-9}; // per-state medians
    double ds_log_sigma = 0.0;                           // per-link log-normal spread of the target
    bool calibrate_delay_spread = true;
    Box room = Box::industrial_hall();

    // Overrides used by validation runs.
    std::optional<LinkState> forced_state;           // every anchor stays in this state
    std::optional<double> fixed_rate;                // same transition rate for all anchors
    std::optional<std::vector<LinkState>> initial_states;
    bool lsf_enabled = true;
    double lsf_sigma_scale = 1.0;
    // Run the LSF process with parameters that reproduce sigma and k after
    // the moving-average extraction over lsf_window_m (0: ten wavelengths).
    bool compensate_lsf_window = true;
    double lsf_window_m = 0.0;
    // Trailing moving average of the AR output over the same window, so the
    // shadowing carries no structure finer than the extraction scale.
    bool smooth_lsf = true;
    // Run a unit-variance process and scale its output by the current state's
    // sigma, so a state change does not carry the previous state's level.
    // Off: the state's sigma scales the innovations of the recursion.
    bool lsf_scale_output = true;
    std::optional<Eigen::MatrixXd> fixed_covariance; // used for both states
    bool direct_path_only = false;                   // K = infinity

    double target_k(LinkState s) const { return rice[state_index(s)].k_factor(); }
    void validate(std::size_t num_anchors) const;
};

// M x T x F complex<float>, anchor-major, then snapshot, then tone.
struct ChannelTensor
{
    std::size_t M = 0, T = 0, F = 0;
    std::vector<std::complex<float>> data;

    ChannelTensor() = default;
    ChannelTensor(std::size_t m, std::size_t t, std::size_t f) : M(m), T(t), F(f), data(m * t * f) {}

    std::size_t index(std::size_t m, std::size_t k, std::size_t f) const { return (m * T + k) * F + f; }
    std::complex<float> &at(std::size_t m, std::size_t k, std::size_t f) { return data[index(m, k, f)]; }
    const std::complex<float> &at(std::size_t m, std::size_t k, std::size_t f) const { return data[index(m, k, f)]; }

    // Tones x snapshots for one anchor, in double precision.
    Eigen::MatrixXcd anchor_matrix(std::size_t m) const;
    // Tones x snapshots for snapshots [k0, k0 + n).
    Eigen::MatrixXcd anchor_window(std::size_t m, std::size_t k0, std::size_t n) const;
    // Tones x anchors at snapshot k.
    Eigen::MatrixXcd snapshot_matrix(std::size_t k) const;
    // Tone-averaged power per snapshot for anchor m.
    Eigen::VectorXd avg_power(std::size_t m) const;
};

// Per-snapshot quantities the generator used, M x T each.
struct GroundTruth
{
    LinkStateTrace states;
    Eigen::MatrixXd lsf_db;
    Eigen::MatrixXd k_factor;
    Eigen::MatrixXd pg_db;
    Eigen::MatrixXd distance_m;
    std::size_t out_of_range = 0; // (anchor, snapshot) pairs outside the fitted path-gain range
};

// Everything drawn during initialization.
struct InitialDraws
{
    Eigen::MatrixXd c_los, c_olos;
    TransitionModel transitions;
    std::vector<LinkState> initial_states;
    std::vector<AnchorFading> fading;
    std::vector<double> delay_scale; // per-anchor factor applied to the excess delays
};

// Runs the generator one snapshot at a time. The trajectory and deployment
// must outlive the object.
class Simulation
{
  public:
    Simulation(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory);

    const InitialDraws &initial() const { return init_; }
    std::size_t next_snapshot() const { return snap_; }

    // Produces snapshot next_snapshot() into out (M x F, anchor-major) and
    // advances; the accessors below then describe that snapshot.
    void step(std::span<std::complex<float>> out);

    LinkState state(std::size_t m) const { return states_[m]; }
    double lsf_db(std::size_t m) const { return lsf_[m]; }
    double k_factor(std::size_t m) const { return kfac_[m]; }
    double pg_db(std::size_t m) const { return pg_[m]; }
    double distance_m(std::size_t m) const { return dist_[m]; }
    std::size_t out_of_range() const { return out_of_range_; }

  private:
    ModelConfig cfg_;
    const Deployment &dep_;
    const Trajectory &traj_;
    InitialDraws init_;
    std::optional<StateProcess> state_proc_;
    ShadowingModel shadowing_;
    LsfProcess lsf_proc_;
    std::vector<TrailingAverage> lsf_smoother_;
    std::vector<LinkState> states_;
    std::vector<double> lsf_, kfac_, pg_, dist_;
    std::size_t snap_ = 0;
    std::size_t out_of_range_ = 0;
    std::vector<std::complex<double>> scratch_;
};

InitialDraws initialize(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory);

// Calls sink(k, M x F block) for every snapshot.
void simulate(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory,
              const std::function<void(std::size_t, std::span<const std::complex<float>>)> &sink,
              GroundTruth *truth = nullptr);

struct Generated
{
    ChannelTensor tensor;
    GroundTruth truth;
    InitialDraws initial;
};

Generated generate(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory);

// Median over the trajectory of the RMS delay spread implied by the direct
// path and the interacting objects, for the given K-factor.
double geometric_delay_spread(const Deployment &deployment, std::size_t anchor, const AnchorFading &fading,
                              double k_factor, const Trajectory &trajectory, std::size_t max_points = 200);

// Same median, but of the expected power delay profile seen through the
// frequency taper of the multitaper estimator on the deployment's tone grid,
// with the thresholds of rms_delay_spread applied. This is what an analysis
// of the generated channel measures.
double band_limited_delay_spread(const Deployment &deployment, std::size_t anchor, const AnchorFading &fading,
                                 double k_factor, const Trajectory &trajectory, std::size_t max_points = 200);

enum class HardeningMode
{
    Full,
    SsfOnly, // each anchor divided by its local mean power
};

struct HardeningSummary
{
    std::vector<double> single_db; // |h|^2 per anchor, pooled
    std::vector<double> mrt_db;    // sum over anchors of |h|^2
    std::size_t num_anchors = 0;

    double single_outage_db(double p = 0.01) const;
    // Outage of the MRT gain divided by the anchor count.
    double mrt_outage_db(double p = 0.01) const;
    double single_median_db() const;
    double mrt_median_db() const;
};

HardeningSummary hardening_summary(const ChannelTensor &tensor, HardeningMode mode, std::size_t local_window = 300,
                                   std::size_t tone_stride = 1, std::size_t snapshot_stride = 1);

} // namespace dmimo

#endif
