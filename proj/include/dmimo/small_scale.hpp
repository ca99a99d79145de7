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

#ifndef DMIMO_SMALL_SCALE_HPP
#define DMIMO_SMALL_SCALE_HPP

#include "dmimo/geometry.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

#include <complex>
#include <span>
#include <vector>

namespace dmimo
{

// Rice amplitude law in the (nu, sigma) convention: K = nu^2 / (2 sigma^2).
struct RiceModel
{
    double nu = 0.84;
    double sigma = 0.49;

    double k_factor() const { return nu * nu / (2.0 * sigma * sigma); }
    double mean_power() const { return nu * nu + 2.0 * sigma * sigma; }

    static RiceModel los() { return {0.84, 0.49}; }
    static RiceModel olos() { return {0.72, 0.59}; }
    static RiceModel from_k(double k, double mean_power = 1.0);
};

inline constexpr double kRiceKMax = 1e6;

double rice_pdf(double x, const RiceModel &model);
double rice_cdf(double x, const RiceModel &model);
double rice_sample(Rng &rng, const RiceModel &model);

// log(I0(x)) for x >= 0 without overflow.
double log_bessel_i0(double x);

// Interacting objects plus the start phase of the direct path for one anchor.
struct AnchorFading
{
    std::vector<InteractingObject> ios;
    double direct_phase0 = 0.0;
};

// Unit-mean-power frequency response over all tones. Paths are the direct
// ray and one bounce per interacting object; every phase is a function of
// path length, so the response depends only on the agent position.
// k_factor may be +inf (direct path only).
void synth_frequency_response(const Vec3 &agent_pos, const Vec3 &anchor_pos, const AnchorFading &fading,
                              double k_factor, const Deployment &deployment, std::span<std::complex<double>> out);

std::vector<std::complex<double>> synth_frequency_response(const Vec3 &agent_pos, const Vec3 &anchor_pos,
                                                           const AnchorFading &fading, double k_factor,
                                                           const Deployment &deployment);

// First-order smoothing of the instantaneous K-factor over distance.
double filter_k_factor(double prev_k, double target_k, double delta_d, double k_forgetting);

// A ./ movavg_time(A): each output column j is input column j + window/2
// divided by the mean of columns j .. j + window - 1, tone by tone.
Eigen::MatrixXd extract_ssf(const Eigen::MatrixXd &amplitudes, std::size_t window_snapshots);

// Same, with the window sized in metres of travel around each snapshot;
// output has one column per input snapshot.
Eigen::MatrixXd extract_ssf_by_distance(const Eigen::MatrixXd &amplitudes, std::span<const double> travelled,
                                        double window_m);

struct RiceFit
{
    RiceModel model;
    double k = 0.0;
    double k_moment = 0.0;
};

// Moment start from Var(R^2)/E[R^2]^2, refined by maximizing the likelihood over K.
RiceFit fit_rice(std::span<const double> amplitudes);

} // namespace dmimo

#endif
