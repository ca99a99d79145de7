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

#ifndef DMIMO_LARGE_SCALE_HPP
#define DMIMO_LARGE_SCALE_HPP

#include "dmimo/link_state.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

#include <array>
#include <deque>
#include <span>
#include <utility>
#include <vector>

namespace dmimo
{

// PG(d) = intercept - 10 * exponent * log10(d / d0), dB.
struct PathGainModel
{
    double intercept_db = -44.24;
    double exponent = 0.86;
    double d0 = 1.0;
    double d_min = 2.65 * 1.4142135623730951; // lower end of the fitted range
    double d_max = 30.0;

    static PathGainModel los() { return {}; }
    static PathGainModel olos()
    {
        PathGainModel m;
        m.intercept_db = -48.78;
        m.exponent = 0.95;
        return m;
    }
};

struct PathGainPair
{
    PathGainModel los = PathGainModel::los();
    PathGainModel olos = PathGainModel::olos();

    const PathGainModel &operator[](LinkState s) const { return s == LinkState::LoS ? los : olos; }
};

// Distances are clamped to [d0, d_max]; `out_of_range` reports whether d
// left the fitted interval [d_min, d_max]. Throws for d <= 0.
double path_gain(double d, const PathGainModel &model, bool *out_of_range = nullptr);
double path_gain(double d, LinkState state, const PathGainPair &models, bool *out_of_range = nullptr);

struct ShadowingModel
{
    std::array<double, 2> sigma_db{2.13, 3.25};
    std::array<double, 2> k_forgetting{0.82, 0.81}; // 1/m

    double sigma(LinkState s) const { return sigma_db[state_index(s)]; }
    double k(LinkState s) const { return k_forgetting[state_index(s)]; }
    void validate() const;
};

struct CovarianceModel
{
    std::array<double, 2> mean{0.1, 0.5};
    std::array<double, 2> spread{0.4, 0.5};
    // Read `spread` as a variance instead of a standard deviation.
    bool spread_is_variance = false;
    double truncation = 0.9;

    double stddev(LinkState s) const;
};

double truncated_normal(Rng &rng, double mean, double stddev, double lo, double hi);

// Symmetric matrix with unit diagonal and i.i.d. truncated-normal off-diagonal entries.
Eigen::MatrixXd draw_covariance_raw(Rng &rng, std::size_t M, LinkState state, const CovarianceModel &model = {});

// Clips eigenvalues below `floor` and rescales to unit diagonal.
Eigen::MatrixXd repair_covariance(const Eigen::MatrixXd &C, double floor = 1e-6);

Eigen::MatrixXd draw_covariance(Rng &rng, std::size_t M, LinkState state, const CovarianceModel &model = {});

// Lower-triangular L with L L^T = C; C must be positive definite.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd &C);

enum class CovarianceSelection
{
    AgentMajority, // LoS matrix when more than half of the anchors are LoS
    AlwaysOLoS,
};

// Correlated AR(1) shadowing for all anchors. Innovations are drawn once per
// step and correlated by the factor of the currently selected matrix.
class LsfProcess
{
  public:
    LsfProcess(std::uint64_t seed, const ShadowingModel &shadowing, const Eigen::MatrixXd &c_los,
               const Eigen::MatrixXd &c_olos, CovarianceSelection selection = CovarianceSelection::AgentMajority);

    // Stationary start for the given states.
    void start(const std::vector<LinkState> &states);
    void advance(double delta_d, const std::vector<LinkState> &states);

    const Eigen::VectorXd &values() const { return x_; }
    double value(std::size_t m) const { return x_[static_cast<Eigen::Index>(m)]; }

  private:
    const Eigen::MatrixXd &factor_for(const std::vector<LinkState> &states) const;
    Eigen::VectorXd correlated_innovation(const std::vector<LinkState> &states);

    ShadowingModel shadowing_;
    Eigen::MatrixXd l_los_, l_olos_;
    CovarianceSelection selection_;
    Rng rng_;
    Eigen::VectorXd x_;
};

// LSF in dB, M x T. A single covariance matrix is used for both states.
Eigen::MatrixXd simulate_lsf(Rng &rng, const Trajectory &trajectory, const LinkStateTrace &states,
                             const ShadowingModel &shadowing, const Eigen::MatrixXd &C);

Eigen::MatrixXd simulate_lsf(Rng &rng, const Trajectory &trajectory, const LinkStateTrace &states,
                             const ShadowingModel &shadowing, const Eigen::MatrixXd &c_los,
                             const Eigen::MatrixXd &c_olos, CovarianceSelection selection);

// Least-squares log-distance fit over samples with d >= d_exclude.
PathGainModel estimate_path_gain(std::span<const double> avg_power_db, std::span<const double> distances,
                                 double d_exclude = PathGainModel{}.d_min);

// Same fit on per-bin means of equally spaced log-distance bins.
PathGainModel estimate_path_gain_binned(std::span<const double> avg_power_db, std::span<const double> distances,
                                        std::size_t n_bins = 1000, double d_exclude = PathGainModel{}.d_min);

// Centered moving average of power minus path gain over `window_m` of travel.
// `travelled` is the cumulative distance at each sample.
std::vector<double> extract_lsf(std::span<const double> avg_power_db, std::span<const double> distances,
                                const PathGainModel &pg, std::span<const double> travelled, double window_m);

// State-aware variant: path gain follows the per-sample state and the window
// never crosses a state change.
std::vector<double> extract_lsf(std::span<const double> avg_power_db, std::span<const double> distances,
                                std::span<const LinkState> states, const PathGainPair &pg,
                                std::span<const double> travelled, double window_m);

// Centered moving average over [s_k - w/2, s_k + w/2], restricted to samples
// with the same segment id as k.
std::vector<double> moving_average_by_distance(std::span<const double> values, std::span<const double> travelled,
                                               double window_m, std::span<const int> segment = {});

// Cosine similarity without mean removal.
double reflective_correlation(std::span<const double> x, std::span<const double> y);

struct LognormalFit
{
    double mean_db = 0.0;
    double sigma_db = 0.0;
};

LognormalFit fit_lognormal(std::span<const double> lsf_db);

struct AutocorrelationFit
{
    double k = 0.0;        // 1/m
    double d_decorr = 0.0; // 1/k, m
};

struct DistanceSeries
{
    std::vector<double> values;
    std::vector<double> travelled;
};

// Least-squares fit of exp(-k d) to the normalized autocorrelation over lags up to 3/k.
// Least-squares fit of exp(-k d) to a normalized correlation sequence
// rho[l] at lag l * step, over lags up to 3/k.
AutocorrelationFit fit_exponential_decay(std::span<const double> rho, double step);

// Autocorrelation at lag d, relative to the unsmoothed variance, of a process
// with correlation exp(-k |d|) after `passes` moving averages over window_m.
double smoothed_exponential_correlation(double d, double k, double window_m, int passes = 1);

// Process parameters whose `passes`-fold moving average over window_m shows
// the nominal sigma and, under fit_exponential_decay, the nominal k.
ShadowingModel compensate_smoothing(const ShadowingModel &nominal, double window_m, int passes = 1);

// Running mean over the trailing window_m of travel, one value per step.
class TrailingAverage
{
  public:
    explicit TrailingAverage(double window_m) : window_m_(window_m) {}
    double push(double travelled, double value);

  private:
    double window_m_;
    std::deque<std::pair<double, double>> buf_;
    double sum_ = 0.0;
};

AutocorrelationFit fit_autocorrelation(std::span<const double> lsf_db, std::span<const double> travelled);

// Pooled over several independent segments sharing one decay constant.
AutocorrelationFit fit_autocorrelation(const std::vector<DistanceSeries> &segments);

} // namespace dmimo

#endif
