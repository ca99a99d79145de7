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

#include "dmimo/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dmimo
{

struct LsfEstimator::Impl
{
    std::size_t n_f = 0, n_t = 0;
    DpssSet g, u;
    fftw_complex *buf2 = nullptr;
    fftw_complex *buf1 = nullptr;
    fftw_plan plan2 = nullptr; // window x tones, forward
    fftw_plan plan1 = nullptr; // tones, forward
    Eigen::VectorXd time_weight; // sum_j u_j(k)^2

    ~Impl()
    {
        if (plan2)
            fftw_destroy_plan(plan2);
        if (plan1)
            fftw_destroy_plan(plan1);
        fftw_free(buf2);
        fftw_free(buf1);
    }
};

LsfEstimator::LsfEstimator(std::size_t num_tones, std::size_t window, const TaperConfig &tapers)
    : impl_(std::make_unique<Impl>())
{
    if (num_tones < 8 || window < 8)
        throw std::invalid_argument("LsfEstimator: tone count and window must be at least 8");
    auto &p = *impl_;
    p.n_f = num_tones;
    p.n_t = window;
    p.g = dpss(num_tones, tapers.freq_nw, tapers.freq_tapers);
    p.u = dpss(window, tapers.time_nw, tapers.time_tapers);
    p.time_weight = p.u.sequences.rowwise().squaredNorm();

    const std::size_t total = num_tones * window;
    p.buf2 = fftw_alloc_complex(total);
    p.buf1 = fftw_alloc_complex(num_tones);
    if (!p.buf2 || !p.buf1)
        throw std::bad_alloc();
    // Row-major [window][tones]: tones contiguous, matching a column-major tones x window matrix.
    p.plan2 = fftw_plan_dft_2d(static_cast<int>(window), static_cast<int>(num_tones), p.buf2, p.buf2, FFTW_FORWARD,
                               FFTW_ESTIMATE);
    p.plan1 = fftw_plan_dft_1d(static_cast<int>(num_tones), p.buf1, p.buf1, FFTW_FORWARD, FFTW_ESTIMATE);
    if (!p.plan2 || !p.plan1)
        throw std::runtime_error("LsfEstimator: FFT planning failed");
}

LsfEstimator::~LsfEstimator() = default;
LsfEstimator::LsfEstimator(LsfEstimator &&) noexcept = default;
LsfEstimator &LsfEstimator::operator=(LsfEstimator &&) noexcept = default;

std::size_t LsfEstimator::num_tones() const { return impl_->n_f; }
std::size_t LsfEstimator::window() const { return impl_->n_t; }
const DpssSet &LsfEstimator::freq_tapers() const { return impl_->g; }
const DpssSet &LsfEstimator::time_tapers() const { return impl_->u; }

LocalScatteringFunction LsfEstimator::estimate(const Eigen::MatrixXcd &H, std::size_t center)
{
    auto &p = *impl_;
    if (static_cast<std::size_t>(H.rows()) != p.n_f || static_cast<std::size_t>(H.cols()) != p.n_t)
        throw std::invalid_argument("LsfEstimator::estimate: window has wrong shape");
    const auto N = static_cast<Eigen::Index>(p.n_f), K = static_cast<Eigen::Index>(p.n_t);
    LocalScatteringFunction out;
    out.center = center;
    out.C = Eigen::MatrixXd::Zero(N, K);
    const auto I = p.g.sequences.cols(), J = p.u.sequences.cols();
    const double scale = 1.0 / (static_cast<double>(I * J) * static_cast<double>(N) * static_cast<double>(K));

    for (Eigen::Index i = 0; i < I; ++i)
        for (Eigen::Index j = 0; j < J; ++j)
        {
            for (Eigen::Index k = 0; k < K; ++k)
            {
                const double uk = p.u.sequences(k, j);
                for (Eigen::Index f = 0; f < N; ++f)
                {
                    const std::complex<double> v = H(f, k) * (p.g.sequences(f, i) * uk);
                    p.buf2[k * N + f][0] = v.real();
                    p.buf2[k * N + f][1] = v.imag();
                }
            }
            fftw_execute(p.plan2);
            // Delay axis uses the inverse transform: bin b of the inverse is bin -b of the forward one.
            for (Eigen::Index k = 0; k < K; ++k)
                for (Eigen::Index b = 0; b < N; ++b)
                {
                    const Eigen::Index src = (N - b) % N;
                    const double re = p.buf2[k * N + src][0], im = p.buf2[k * N + src][1];
                    out.C(b, k) += scale * (re * re + im * im);
                }
        }
    return out;
}

Eigen::VectorXd LsfEstimator::local_pdp(const Eigen::MatrixXcd &H)
{
    auto &p = *impl_;
    if (static_cast<std::size_t>(H.rows()) != p.n_f || static_cast<std::size_t>(H.cols()) != p.n_t)
        throw std::invalid_argument("LsfEstimator::local_pdp: window has wrong shape");
    const auto N = static_cast<Eigen::Index>(p.n_f), K = static_cast<Eigen::Index>(p.n_t);
    const auto I = p.g.sequences.cols(), J = p.u.sequences.cols();
    const double scale = 1.0 / (static_cast<double>(I * J) * static_cast<double>(N));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
    for (Eigen::Index i = 0; i < I; ++i)
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double w = p.time_weight[k];
            if (w == 0.0)
                continue;
            for (Eigen::Index f = 0; f < N; ++f)
            {
                const std::complex<double> v = H(f, k) * p.g.sequences(f, i);
                p.buf1[f][0] = v.real();
                p.buf1[f][1] = v.imag();
            }
            fftw_execute(p.plan1);
            for (Eigen::Index b = 0; b < N; ++b)
            {
                const Eigen::Index src = (N - b) % N;
                out[b] += scale * w * (p.buf1[src][0] * p.buf1[src][0] + p.buf1[src][1] * p.buf1[src][1]);
            }
        }
    return out;
}

Eigen::VectorXd pdp(const LocalScatteringFunction &lsf)
{
    return lsf.C.rowwise().sum();
}

Eigen::VectorXd doppler_spectrum(const LocalScatteringFunction &lsf)
{
    return lsf.C.colwise().sum().transpose();
}

double estimate_noise_floor_db(const Eigen::VectorXd &profile)
{
    if (profile.size() == 0)
        throw std::invalid_argument("estimate_noise_floor_db: empty profile");
    std::vector<double> v(profile.data(), profile.data() + profile.size());
    std::sort(v.begin(), v.end());
    const std::size_t n = std::max<std::size_t>(1, v.size() / 10);
    std::vector<double> low(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
    const double med = median(low);
    return 10.0 * std::log10(std::max(med, std::numeric_limits<double>::min()));
}

double rms_delay_spread(std::span<const double> powers, std::span<const double> delays_s)
{
    if (powers.size() != delays_s.size() || powers.empty())
        throw std::invalid_argument("rms_delay_spread: inputs must be non-empty and of equal length");
    double p = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i)
    {
        p += powers[i];
        m1 += powers[i] * delays_s[i];
    }
    if (!(p > 0.0))
        throw std::invalid_argument("rms_delay_spread: no power");
    m1 /= p;
    double m2 = 0.0;
    for (std::size_t i = 0; i < powers.size(); ++i)
        m2 += powers[i] * (delays_s[i] - m1) * (delays_s[i] - m1);
    return std::sqrt(std::max(0.0, m2 / p));
}

double rms_delay_spread(const Eigen::VectorXd &profile, double bin_s, const DelaySpreadOptions &opt)
{
    const auto n = profile.size();
    if (n == 0)
        throw std::invalid_argument("rms_delay_spread: empty profile");
    Eigen::Index peak_idx = 0;
    const double peak = profile.maxCoeff(&peak_idx);
    if (!(peak > 0.0))
        throw std::invalid_argument("rms_delay_spread: profile has no positive peak");
    const double floor_db = std::isnan(opt.noise_floor_db) ? estimate_noise_floor_db(profile) : opt.noise_floor_db;
    const double thr_db = std::max(floor_db + opt.noise_margin_db, 10.0 * std::log10(peak) - opt.peak_threshold_db);
    const double thr = std::pow(10.0, thr_db / 10.0);

    std::vector<double> p, tau;
    for (Eigen::Index b = 0; b < n; ++b)
    {
        if (!(profile[b] >= thr))
            continue;
        double rel = static_cast<double>(b);
        if (opt.circular)
        {
            // place every bin within half a period of the peak
            Eigen::Index d = b - peak_idx;
            if (d > n / 2)
                d -= n;
            else if (d < -(n - 1) / 2)
                d += n;
            rel = static_cast<double>(peak_idx + d);
        }
        p.push_back(profile[b]);
        tau.push_back(rel * bin_s);
    }
    if (p.empty())
        throw std::invalid_argument("rms_delay_spread: no bins survive the thresholds");
    return rms_delay_spread(p, tau);
}

double collinearity(const LocalScatteringFunction &a, const LocalScatteringFunction &b)
{
    if (a.C.rows() != b.C.rows() || a.C.cols() != b.C.cols())
        throw std::invalid_argument("collinearity: shapes differ");
    const double na = a.C.norm(), nb = b.C.norm();
    if (!(na > 0.0) || !(nb > 0.0))
        throw std::invalid_argument("collinearity: zero-norm input");
    return std::clamp(a.C.cwiseProduct(b.C).sum() / (na * nb), 0.0, 1.0);
}

Eigen::MatrixXd collinearity_matrix(const std::vector<LocalScatteringFunction> &lsfs)
{
    const auto n = static_cast<Eigen::Index>(lsfs.size());
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
    std::vector<double> norms(lsfs.size());
    for (std::size_t i = 0; i < lsfs.size(); ++i)
    {
        norms[i] = lsfs[i].C.norm();
        if (!(norms[i] > 0.0))
            throw std::invalid_argument("collinearity_matrix: zero-norm window " + std::to_string(i));
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
        {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            if (lsfs[a].C.rows() != lsfs[b].C.rows() || lsfs[a].C.cols() != lsfs[b].C.cols())
                throw std::invalid_argument("collinearity_matrix: shapes differ");
            const double r = std::clamp(lsfs[a].C.cwiseProduct(lsfs[b].C).sum() / (norms[a] * norms[b]), 0.0, 1.0);
            R(i, j) = R(j, i) = r;
        }
    return R;
}

WindowLayout window_layout(std::size_t T, std::size_t length, std::size_t hop)
{
    if (length < 1 || hop < 1)
        throw std::invalid_argument("window_layout: length and hop must be positive");
    WindowLayout w;
    w.length = length;
    w.hop = hop;
    for (std::size_t s = 0; s + length <= T; s += hop)
        w.starts.push_back(s);
    return w;
}

std::vector<double> stationarity_distance(const Eigen::MatrixXd &R, double threshold, const WindowLayout &layout,
                                          std::span<const double> travelled)
{
    const auto n = R.rows();
    if (R.cols() != n || static_cast<std::size_t>(n) != layout.size())
        throw std::invalid_argument("stationarity_distance: matrix does not match the window layout");
    std::vector<double> out(layout.size());
    for (Eigen::Index i = 0; i < n; ++i)
    {
        Eigen::Index lo = i, hi = i;
        while (lo > 0 && R(i, lo - 1) > threshold)
            --lo;
        while (hi + 1 < n && R(i, hi + 1) > threshold)
            ++hi;
        const std::size_t first = layout.starts[static_cast<std::size_t>(lo)];
        const std::size_t last = layout.starts[static_cast<std::size_t>(hi)] + layout.length - 1;
        if (last >= travelled.size())
            throw std::invalid_argument("stationarity_distance: window exceeds the distance record");
        out[static_cast<std::size_t>(i)] = travelled[last] - travelled[first];
    }
    return out;
}

Eigen::VectorXd avg_power_gain(const Eigen::MatrixXcd &H)
{
    if (H.size() == 0)
        throw std::invalid_argument("avg_power_gain: empty input");
    return H.cwiseAbs2().colwise().mean().transpose();
}

Eigen::VectorXd mrt_gain(const Eigen::MatrixXcd &H_k)
{
    if (H_k.cols() < 1)
        throw std::invalid_argument("mrt_gain: at least one anchor is required");
    return H_k.cwiseAbs2().rowwise().sum();
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("ecdf: empty input");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(v.size());
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        // ties collapse onto the last (right-continuous) step
        if (i + 1 < v.size() && v[i + 1] == v[i])
            continue;
        out.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

double quantile(std::vector<double> v, double p)
{
    if (v.empty())
        throw std::invalid_argument("quantile: empty input");
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
}

double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

double ks_statistic(std::vector<double> v, const std::function<double(double)> &cdf)
{
    if (v.empty())
        throw std::invalid_argument("ks_statistic: empty input");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        const double F = cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size())
    {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_pvalue(double D, std::size_t n)
{
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * D;
    if (lambda < 1e-3)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k)
    {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace dmimo
