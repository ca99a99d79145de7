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

#ifndef DMIMO_ANALYSIS_HPP
#define DMIMO_ANALYSIS_HPP

#include "dmimo/dpss.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace dmimo
{

// Delay x Doppler power estimate of one window. Rows are delay bins
// (bin b <-> b / (N_f * tone spacing)), columns are Doppler bins in FFT order.
struct LocalScatteringFunction
{
    Eigen::MatrixXd C;
    std::size_t center = 0;
};

struct TaperConfig
{
    double freq_nw = 1.0;
    std::size_t freq_tapers = 1;
    double time_nw = 2.5;
    std::size_t time_tapers = 2;
};

// Multitaper estimator for windows of `num_tones` x `window` samples.
// Holds the tapers and FFT plans; not thread-safe.
class LsfEstimator
{
  public:
    LsfEstimator(std::size_t num_tones, std::size_t window, const TaperConfig &tapers = {});
    ~LsfEstimator();
    LsfEstimator(LsfEstimator &&) noexcept;
    LsfEstimator &operator=(LsfEstimator &&) noexcept;

    std::size_t num_tones() const;
    std::size_t window() const;
    const DpssSet &freq_tapers() const;
    const DpssSet &time_tapers() const;

    // H_window is num_tones x window.
    LocalScatteringFunction estimate(const Eigen::MatrixXcd &H_window, std::size_t center = 0);

    // Delay marginal of estimate(H_window) without forming the Doppler axis.
    Eigen::VectorXd local_pdp(const Eigen::MatrixXcd &H_window);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd pdp(const LocalScatteringFunction &lsf);
Eigen::VectorXd doppler_spectrum(const LocalScatteringFunction &lsf);

// Median of the lowest decile of the profile, in dB.
double estimate_noise_floor_db(const Eigen::VectorXd &profile);

struct DelaySpreadOptions
{
    double noise_floor_db = std::numeric_limits<double>::quiet_NaN(); // NaN: estimate from the profile
    double peak_threshold_db = 40.0;
    double noise_margin_db = 5.0;
    bool circular = true; // profile from a DFT: delays wrap around the peak
};

// RMS delay spread of a sampled PDP with bin width `bin_s`. Bins below
// max(noise floor + margin, peak - threshold) are discarded.
double rms_delay_spread(const Eigen::VectorXd &profile, double bin_s, const DelaySpreadOptions &options = {});

// Same for an arbitrary set of taps (no thresholds).
double rms_delay_spread(std::span<const double> powers, std::span<const double> delays_s);

double collinearity(const LocalScatteringFunction &a, const LocalScatteringFunction &b);
Eigen::MatrixXd collinearity_matrix(const std::vector<LocalScatteringFunction> &lsfs);

struct WindowLayout
{
    std::size_t length = 0;
    std::size_t hop = 0;
    std::vector<std::size_t> starts;

    std::size_t center(std::size_t w) const { return starts[w] + length / 2; }
    std::size_t size() const { return starts.size(); }
};

// Windows of `length` snapshots every `hop` snapshots, fully inside [0, T).
WindowLayout window_layout(std::size_t T, std::size_t length, std::size_t hop);

// Per window: extent in metres of the contiguous run of R > threshold
// through the diagonal, from the start of its first window to the end of its
// last window.
std::vector<double> stationarity_distance(const Eigen::MatrixXd &R, double threshold, const WindowLayout &layout,
                                          std::span<const double> travelled);

// Tone-averaged |H|^2 per snapshot; H is tones x snapshots.
Eigen::VectorXd avg_power_gain(const Eigen::MatrixXcd &H);

// Per tone sum over anchors of |H|^2; H_k is tones x anchors.
Eigen::VectorXd mrt_gain(const Eigen::MatrixXcd &H_k);

// Sorted (value, i/N) pairs.
std::vector<std::pair<double, double>> ecdf(std::span<const double> samples);

double quantile(std::vector<double> samples, double p);
double median(std::vector<double> samples);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)> &cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic p-value of the one-sample statistic for n samples.
double ks_pvalue(double D, std::size_t n);

} // namespace dmimo

#endif
