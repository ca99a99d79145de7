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

#include "dmimo/small_scale.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dmimo
{

RiceModel RiceModel::from_k(double k, double mean_power)
{
    if (!(k >= 0.0) || !(mean_power > 0.0))
        throw std::invalid_argument("RiceModel::from_k: invalid parameters");
    return {std::sqrt(k / (k + 1.0) * mean_power), std::sqrt(mean_power / (2.0 * (k + 1.0)))};
}

double log_bessel_i0(double x)
{
    x = std::abs(x);
    if (x < 500.0)
        return std::log(boost::math::cyl_bessel_i(0, x));
    // Hankel expansion of exp(-x) I0(x)
    const double t = 1.0 / (8.0 * x);
    const double series = 1.0 + t * (1.0 + t * (4.5 + t * (37.5 + t * 459.375)));
    return x - 0.5 * std::log(kTwoPi * x) + std::log(series);
}

double rice_pdf(double x, const RiceModel &m)
{
    if (x < 0.0)
        return 0.0;
    const double s2 = m.sigma * m.sigma;
    return x / s2 * std::exp(-(x * x + m.nu * m.nu) / (2.0 * s2) + log_bessel_i0(x * m.nu / s2));
}

double rice_cdf(double x, const RiceModel &m)
{
    if (x <= 0.0)
        return 0.0;
    // Composite Simpson; the density is smooth and vanishes beyond nu + 12 sigma.
    const double upper = std::min(x, m.nu + 12.0 * m.sigma);
    const int n = 800;
    const double h = upper / n;
    double s = rice_pdf(0.0, m) + rice_pdf(upper, m);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * rice_pdf(i * h, m);
    return std::min(1.0, s * h / 3.0);
}

double rice_sample(Rng &rng, const RiceModel &m)
{
    const double re = m.nu + m.sigma * standard_normal(rng);
    const double im = m.sigma * standard_normal(rng);
    return std::hypot(re, im);
}

// ------------------------------------------------------------------------

namespace
{
// Adds amp * exp(j(theta - 2 pi f_n tau)) over all tones into re/im, using a
// rotation recursion instead of one sin/cos per tone.
void add_path(double amp, double theta, double tau, const Deployment &dep, double *re, double *im)
{
    const std::size_t n = dep.num_tones;
    const double f0 = dep.tone_offset(0);
    const double start = theta - kTwoPi * f0 * tau;
    double zr = amp * std::cos(start), zi = amp * std::sin(start);
    const double step = -kTwoPi * dep.tone_spacing_hz * tau;
    const double rr = std::cos(step), ri = std::sin(step);
    for (std::size_t i = 0; i < n; ++i)
    {
        re[i] += zr;
        im[i] += zi;
        const double nr = zr * rr - zi * ri;
        zi = zr * ri + zi * rr;
        zr = nr;
    }
}
} // namespace

void synth_frequency_response(const Vec3 &agent_pos, const Vec3 &anchor_pos, const AnchorFading &fading,
                              double k_factor, const Deployment &dep, std::span<std::complex<double>> out)
{
    if (fading.ios.empty())
        throw std::invalid_argument("synth_frequency_response: no interacting objects");
    if (!(k_factor >= 0.0))
        throw std::invalid_argument("synth_frequency_response: K-factor must be non-negative");
    if (out.size() != dep.num_tones)
        throw std::invalid_argument("synth_frequency_response: output length differs from tone count");

    const double lambda = dep.wavelength();
    const bool direct_only = std::isinf(k_factor);
    const double g_dir = direct_only ? 1.0 : std::sqrt(k_factor / (k_factor + 1.0));
    const double g_dif = direct_only ? 0.0 : std::sqrt(1.0 / (k_factor + 1.0));

    std::vector<double> re(dep.num_tones, 0.0), im(dep.num_tones, 0.0);
    if (g_dir > 0.0)
    {
        const double d = (anchor_pos - agent_pos).norm();
        add_path(g_dir, fading.direct_phase0 - kTwoPi * d / lambda, d / kSpeedOfLight, dep, re.data(), im.data());
    }
    if (g_dif > 0.0)
        for (const auto &io : fading.ios)
        {
            const double d = (io.position - agent_pos).norm() + (anchor_pos - io.position).norm();
            add_path(g_dif * io.weight, io.phase0 - kTwoPi * d / lambda, d / kSpeedOfLight + io.excess_delay_s, dep,
                     re.data(), im.data());
        }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = {re[i], im[i]};
}

std::vector<std::complex<double>> synth_frequency_response(const Vec3 &agent_pos, const Vec3 &anchor_pos,
                                                           const AnchorFading &fading, double k_factor,
                                                           const Deployment &deployment)
{
    std::vector<std::complex<double>> h(deployment.num_tones);
    synth_frequency_response(agent_pos, anchor_pos, fading, k_factor, deployment, h);
    return h;
}

double filter_k_factor(double prev_k, double target_k, double delta_d, double k_forgetting)
{
    if (!(prev_k >= 0.0) || !(target_k >= 0.0) || !(delta_d >= 0.0) || !(k_forgetting >= 0.0))
        throw std::invalid_argument("filter_k_factor: inputs must be non-negative");
    if (std::isinf(delta_d))
        return target_k;
    const double a = std::exp(-k_forgetting * delta_d);
    return a * prev_k + (1.0 - a) * target_k;
}

// ------------------------------------------------------------------------

Eigen::MatrixXd extract_ssf(const Eigen::MatrixXd &A, std::size_t window)
{
    const auto T = static_cast<std::size_t>(A.cols());
    if (window < 1 || window > T)
        throw std::invalid_argument("extract_ssf: window must lie in [1, T]");
    const auto F = A.rows();
    const std::size_t out_cols = T - window + 1;
    Eigen::MatrixXd out(F, static_cast<Eigen::Index>(out_cols));
    const std::size_t center = window / 2;
    const double inv_w = 1.0 / static_cast<double>(window);
    for (Eigen::Index f = 0; f < F; ++f)
    {
        double sum = 0.0;
        for (std::size_t j = 0; j < window; ++j)
            sum += A(f, static_cast<Eigen::Index>(j));
        for (std::size_t j = 0; j < out_cols; ++j)
        {
            if (j > 0)
                sum += A(f, static_cast<Eigen::Index>(j + window - 1)) - A(f, static_cast<Eigen::Index>(j - 1));
            const double avg = sum * inv_w;
            if (!(avg > 0.0))
                throw std::invalid_argument("extract_ssf: zero local average at tone " + std::to_string(f));
            out(f, static_cast<Eigen::Index>(j)) = A(f, static_cast<Eigen::Index>(j + center)) / avg;
        }
    }
    return out;
}

Eigen::MatrixXd extract_ssf_by_distance(const Eigen::MatrixXd &A, std::span<const double> travelled, double window_m)
{
    const auto T = static_cast<std::size_t>(A.cols());
    if (travelled.size() != T)
        throw std::invalid_argument("extract_ssf_by_distance: distance vector length differs");
    Eigen::MatrixXd out(A.rows(), A.cols());
    std::vector<std::size_t> lo(T), hi(T);
    for (std::size_t k = 0; k < T; ++k)
    {
        lo[k] = static_cast<std::size_t>(std::lower_bound(travelled.begin(), travelled.end(),
                                                          travelled[k] - 0.5 * window_m) - travelled.begin());
        hi[k] = static_cast<std::size_t>(std::upper_bound(travelled.begin(), travelled.end(),
                                                          travelled[k] + 0.5 * window_m) - travelled.begin());
    }
    std::vector<double> prefix(T + 1);
    for (Eigen::Index f = 0; f < A.rows(); ++f)
    {
        prefix[0] = 0.0;
        for (std::size_t k = 0; k < T; ++k)
            prefix[k + 1] = prefix[k] + A(f, static_cast<Eigen::Index>(k));
        for (std::size_t k = 0; k < T; ++k)
        {
            const double avg = (prefix[hi[k]] - prefix[lo[k]]) / static_cast<double>(hi[k] - lo[k]);
            if (!(avg > 0.0))
                throw std::invalid_argument("extract_ssf_by_distance: zero local average");
            out(f, static_cast<Eigen::Index>(k)) = A(f, static_cast<Eigen::Index>(k)) / avg;
        }
    }
    return out;
}

// ------------------------------------------------------------------------

namespace
{
// Mean log-likelihood of the Rice law with mean power omega and factor K.
double rice_log_likelihood(std::span<const double> r, double omega, double K)
{
    double ll = 0.0;
    const double c = 2.0 * (K + 1.0) / omega;
    const double b = 2.0 * std::sqrt(K * (K + 1.0) / omega);
    for (double x : r)
    {
        if (x <= 0.0)
            continue;
        ll += std::log(c * x) - K - (K + 1.0) * x * x / omega + log_bessel_i0(b * x);
    }
    return ll / static_cast<double>(r.size());
}
} // namespace

RiceFit fit_rice(std::span<const double> amplitudes)
{
    if (amplitudes.size() < 100)
        throw std::invalid_argument("fit_rice: need at least 100 samples");
    double m2 = 0.0, m4 = 0.0;
    for (double a : amplitudes)
    {
        if (!(a >= 0.0) || !std::isfinite(a))
            throw std::invalid_argument("fit_rice: amplitudes must be finite and non-negative");
        m2 += a * a;
        m4 += a * a * a * a;
    }
    const double n = static_cast<double>(amplitudes.size());
    m2 /= n;
    m4 /= n;
    if (!(m2 > 0.0))
        throw std::invalid_argument("fit_rice: all amplitudes are zero");
    const double var = std::max(0.0, m4 - m2 * m2);
    const double gamma = var / (m2 * m2);

    RiceFit fit;
    if (gamma < 1e-12)
    {
        fit.k = fit.k_moment = kRiceKMax;
        fit.model = RiceModel::from_k(kRiceKMax, m2);
        return fit;
    }
    if (gamma >= 1.0)
        fit.k_moment = 0.0;
    else
    {
        const double s = std::sqrt(1.0 - gamma);
        fit.k_moment = std::min(s / (1.0 - s), kRiceKMax);
    }

    // The likelihood can have a second mode near K = 0 on heavy-tailed
    // samples, so a coarse scan over log K picks the bracket first.
    const double k_floor = 1e-6;
    auto f = [&](double t) { return -rice_log_likelihood(amplitudes, m2, std::exp(t)); };
    const double t_min = std::log(k_floor), t_max = std::log(kRiceKMax), grid = 0.5;
    double best_t = t_min, best_f = f(t_min);
    for (double t = t_min + grid; t <= t_max; t += grid)
        if (const double v = f(t); v < best_f)
        {
            best_f = v;
            best_t = t;
        }
    double lo = std::max(t_min, best_t - grid), hi = std::min(t_max, best_t + grid);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-7)
    {
        if (f1 < f2)
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        else
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    fit.k = std::exp(0.5 * (lo + hi));
    if (fit.k <= 1.01 * k_floor)
        fit.k = 0.0;
    fit.model = RiceModel::from_k(fit.k, m2);
    return fit;
}

} // namespace dmimo
