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

#include "dmimo/large_scale.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dmimo
{

double path_gain(double d, const PathGainModel &model, bool *out_of_range)
{
    if (!(d > 0.0) || !std::isfinite(d))
        throw std::invalid_argument("path_gain: distance must be positive, got " + std::to_string(d));
    if (out_of_range)
        *out_of_range = d < model.d_min || d > model.d_max;
    const double dc = std::clamp(d, model.d0, model.d_max);
    return model.intercept_db - 10.0 * model.exponent * std::log10(dc / model.d0);
}

double path_gain(double d, LinkState state, const PathGainPair &models, bool *out_of_range)
{
    return path_gain(d, models[state], out_of_range);
}

void ShadowingModel::validate() const
{
    for (int s = 0; s < 2; ++s)
    {
        if (!(sigma_db[s] >= 0.0) || !std::isfinite(sigma_db[s]))
            throw std::invalid_argument("ShadowingModel: sigma must be non-negative");
        if (!(k_forgetting[s] > 0.0) || !std::isfinite(k_forgetting[s]))
            throw std::invalid_argument("ShadowingModel: forgetting factor must be positive");
    }
}

double CovarianceModel::stddev(LinkState s) const
{
    const double v = spread[state_index(s)];
    return spread_is_variance ? std::sqrt(v) : v;
}

double truncated_normal(Rng &rng, double mean, double stddev, double lo, double hi)
{
    if (!(hi > lo))
        throw std::invalid_argument("truncated_normal: empty interval");
    if (stddev == 0.0)
        return std::clamp(mean, lo, hi);
    std::normal_distribution<double> nd(mean, stddev);
    for (int i = 0; i < 1000000; ++i)
    {
        const double x = nd(rng);
        if (x >= lo && x <= hi)
            return x;
    }
    throw std::runtime_error("truncated_normal: interval has negligible probability mass");
}

Eigen::MatrixXd draw_covariance_raw(Rng &rng, std::size_t M, LinkState state, const CovarianceModel &model)
{
    const auto n = static_cast<Eigen::Index>(M);
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
    const double mu = model.mean[state_index(state)];
    const double sd = model.stddev(state);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            C(i, j) = C(j, i) = truncated_normal(rng, mu, sd, -model.truncation, model.truncation);
    return C;
}

Eigen::MatrixXd repair_covariance(const Eigen::MatrixXd &C, double floor)
{
    if (C.rows() != C.cols())
        throw std::invalid_argument("repair_covariance: matrix is not square");
    const Eigen::MatrixXd S = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("repair_covariance: eigendecomposition failed");
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd R = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::VectorXd inv_sqrt = R.diagonal().cwiseSqrt().cwiseInverse();
    R = inv_sqrt.asDiagonal() * R * inv_sqrt.asDiagonal();
    R = 0.5 * (R + R.transpose());
    R.diagonal().setOnes();
    return R;
}

Eigen::MatrixXd draw_covariance(Rng &rng, std::size_t M, LinkState state, const CovarianceModel &model)
{
    return repair_covariance(draw_covariance_raw(rng, M, state, model));
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd &C)
{
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("covariance matrix is not positive definite; repair it first");
    return llt.matrixL();
}

// ------------------------------------------------------------------------

LsfProcess::LsfProcess(std::uint64_t seed, const ShadowingModel &shadowing, const Eigen::MatrixXd &c_los,
                       const Eigen::MatrixXd &c_olos, CovarianceSelection selection)
    : shadowing_(shadowing), l_los_(covariance_factor(c_los)), l_olos_(covariance_factor(c_olos)),
      selection_(selection), rng_(seed), x_(Eigen::VectorXd::Zero(c_los.rows()))
{
    shadowing_.validate();
    if (c_los.rows() != c_olos.rows())
        throw std::invalid_argument("LsfProcess: covariance matrices differ in size");
}

const Eigen::MatrixXd &LsfProcess::factor_for(const std::vector<LinkState> &states) const
{
    if (selection_ == CovarianceSelection::AlwaysOLoS)
        return l_olos_;
    const auto los = std::count(states.begin(), states.end(), LinkState::LoS);
    return 2 * static_cast<std::size_t>(los) > states.size() ? l_los_ : l_olos_;
}

Eigen::VectorXd LsfProcess::correlated_innovation(const std::vector<LinkState> &states)
{
    if (static_cast<Eigen::Index>(states.size()) != x_.size())
        throw std::invalid_argument("LsfProcess: state vector has wrong length");
    Eigen::VectorXd u(x_.size());
    for (Eigen::Index m = 0; m < u.size(); ++m)
        u[m] = standard_normal(rng_);
    return factor_for(states) * u;
}

void LsfProcess::start(const std::vector<LinkState> &states)
{
    const Eigen::VectorXd s = correlated_innovation(states);
    for (Eigen::Index m = 0; m < x_.size(); ++m)
        x_[m] = shadowing_.sigma(states[m]) * s[m];
}

void LsfProcess::advance(double delta_d, const std::vector<LinkState> &states)
{
    const Eigen::VectorXd s = correlated_innovation(states);
    for (Eigen::Index m = 0; m < x_.size(); ++m)
    {
        const LinkState st = states[m];
        const double a = std::exp(-shadowing_.k(st) * delta_d);
        x_[m] = a * x_[m] + shadowing_.sigma(st) * std::sqrt(std::max(0.0, 1.0 - a * a)) * s[m];
    }
}

Eigen::MatrixXd simulate_lsf(Rng &rng, const Trajectory &trajectory, const LinkStateTrace &states,
                             const ShadowingModel &shadowing, const Eigen::MatrixXd &C)
{
    return simulate_lsf(rng, trajectory, states, shadowing, C, C, CovarianceSelection::AlwaysOLoS);
}

Eigen::MatrixXd simulate_lsf(Rng &rng, const Trajectory &trajectory, const LinkStateTrace &states,
                             const ShadowingModel &shadowing, const Eigen::MatrixXd &c_los,
                             const Eigen::MatrixXd &c_olos, CovarianceSelection selection)
{
    const std::size_t M = states.num_anchors, T = states.num_snapshots;
    if (T != trajectory.size() || static_cast<std::size_t>(c_los.rows()) != M)
        throw std::invalid_argument("simulate_lsf: inconsistent dimensions");
    LsfProcess proc(rng(), shadowing, c_los, c_olos, selection);
    Eigen::MatrixXd out(M, T);
    std::vector<LinkState> now(M);
    for (std::size_t k = 0; k < T; ++k)
    {
        for (std::size_t m = 0; m < M; ++m)
            now[m] = states.at(m, k);
        if (k == 0)
            proc.start(now);
        else
            proc.advance(trajectory.step_distance(k), now);
        out.col(static_cast<Eigen::Index>(k)) = proc.values();
    }
    return out;
}

// ------------------------------------------------------------------------
// Estimators

namespace
{
PathGainModel fit_line(const std::vector<double> &x, const std::vector<double> &y, std::span<const double> w = {})
{
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("path-gain fit: all samples share one distance");
    const double b = sxy / sxx;
    PathGainModel m;
    m.intercept_db = my - b * mx;
    m.exponent = -b;
    return m;
}

void check_pg_input(std::span<const double> p, std::span<const double> d)
{
    if (p.size() != d.size())
        throw std::invalid_argument("path-gain fit: power and distance lengths differ");
    for (double x : d)
        if (!(x > 0.0))
            throw std::invalid_argument("path-gain fit: distances must be positive");
}
} // namespace

PathGainModel estimate_path_gain(std::span<const double> avg_power_db, std::span<const double> distances,
                                 double d_exclude)
{
    check_pg_input(avg_power_db, distances);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < distances.size(); ++i)
        if (distances[i] >= d_exclude)
        {
            x.push_back(10.0 * std::log10(distances[i]));
            y.push_back(avg_power_db[i]);
        }
    if (x.size() < 2)
        throw std::invalid_argument("path-gain fit: fewer than two samples beyond the exclusion distance");
    return fit_line(x, y);
}

PathGainModel estimate_path_gain_binned(std::span<const double> avg_power_db, std::span<const double> distances,
                                        std::size_t n_bins, double d_exclude)
{
    check_pg_input(avg_power_db, distances);
    if (n_bins < 2)
        throw std::invalid_argument("binned path-gain fit: need at least two bins");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double d : distances)
        if (d >= d_exclude)
        {
            lo = std::min(lo, std::log10(d));
            hi = std::max(hi, std::log10(d));
        }
    if (!(hi > lo))
        throw std::invalid_argument("binned path-gain fit: fewer than two non-empty bins");
    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> cnt(n_bins, 0);
    for (std::size_t i = 0; i < distances.size(); ++i)
    {
        if (distances[i] < d_exclude)
            continue;
        auto b = static_cast<std::size_t>((std::log10(distances[i]) - lo) / width);
        b = std::min(b, n_bins - 1);
        sum[b] += avg_power_db[i];
        ++cnt[b];
    }
    std::vector<double> x, y;
    for (std::size_t b = 0; b < n_bins; ++b)
        if (cnt[b] > 0)
        {
            x.push_back(10.0 * (lo + (static_cast<double>(b) + 0.5) * width));
            y.push_back(sum[b] / static_cast<double>(cnt[b]));
        }
    if (x.size() < 2)
        throw std::invalid_argument("binned path-gain fit: fewer than two non-empty bins");
    return fit_line(x, y);
}

std::vector<double> moving_average_by_distance(std::span<const double> values, std::span<const double> travelled,
                                               double window_m, std::span<const int> segment)
{
    const std::size_t n = values.size();
    if (n == 0)
        throw std::invalid_argument("moving average: empty input");
    if (travelled.size() != n || (!segment.empty() && segment.size() != n))
        throw std::invalid_argument("moving average: input lengths differ");
    if (!(window_m >= 0.0))
        throw std::invalid_argument("moving average: window must be non-negative");

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + values[i];

    std::vector<double> out(n);
    const double half = 0.5 * window_m;
    std::size_t seg_begin = 0;
    while (seg_begin < n)
    {
        std::size_t seg_end = seg_begin + 1;
        while (seg_end < n && (segment.empty() || segment[seg_end] == segment[seg_begin]))
            ++seg_end;
        const auto first = travelled.begin() + static_cast<std::ptrdiff_t>(seg_begin);
        const auto last = travelled.begin() + static_cast<std::ptrdiff_t>(seg_end);
        for (std::size_t k = seg_begin; k < seg_end; ++k)
        {
            const auto lo = static_cast<std::size_t>(std::lower_bound(first, last, travelled[k] - half) -
                                                     travelled.begin());
            const auto hi = static_cast<std::size_t>(std::upper_bound(first, last, travelled[k] + half) -
                                                     travelled.begin());
            out[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
        }
        seg_begin = seg_end;
    }
    return out;
}

std::vector<double> extract_lsf(std::span<const double> avg_power_db, std::span<const double> distances,
                                const PathGainModel &pg, std::span<const double> travelled, double window_m)
{
    if (avg_power_db.empty())
        throw std::invalid_argument("extract_lsf: empty input");
    if (distances.size() != avg_power_db.size())
        throw std::invalid_argument("extract_lsf: input lengths differ");
    std::vector<double> resid(avg_power_db.size());
    for (std::size_t i = 0; i < resid.size(); ++i)
        resid[i] = avg_power_db[i] - path_gain(std::max(distances[i], pg.d0), pg);
    return moving_average_by_distance(resid, travelled, window_m);
}

std::vector<double> extract_lsf(std::span<const double> avg_power_db, std::span<const double> distances,
                                std::span<const LinkState> states, const PathGainPair &pg,
                                std::span<const double> travelled, double window_m)
{
    if (avg_power_db.empty())
        throw std::invalid_argument("extract_lsf: empty input");
    if (distances.size() != avg_power_db.size() || states.size() != avg_power_db.size())
        throw std::invalid_argument("extract_lsf: input lengths differ");
    std::vector<double> resid(avg_power_db.size());
    std::vector<int> seg(avg_power_db.size());
    int id = 0;
    for (std::size_t i = 0; i < resid.size(); ++i)
    {
        if (i > 0 && states[i] != states[i - 1])
            ++id;
        seg[i] = id;
        resid[i] = avg_power_db[i] - path_gain(std::max(distances[i], pg[states[i]].d0), states[i], pg);
    }
    return moving_average_by_distance(resid, travelled, window_m, seg);
}

double reflective_correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("reflective_correlation: lengths differ");
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        xy += x[i] * y[i];
        xx += x[i] * x[i];
        yy += y[i] * y[i];
    }
    if (!(xx > 0.0) || !(yy > 0.0))
        throw std::invalid_argument("reflective_correlation: zero-norm input");
    return std::clamp(xy / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

LognormalFit fit_lognormal(std::span<const double> lsf_db)
{
    if (lsf_db.size() < 2)
        throw std::invalid_argument("fit_lognormal: need at least two samples");
    const double n = static_cast<double>(lsf_db.size());
    const double mean = std::accumulate(lsf_db.begin(), lsf_db.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : lsf_db)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

// ------------------------------------------------------------------------
// Autocorrelation fit

namespace
{
// Linear interpolation of a series onto s = s0 + i * step.
std::vector<double> resample(const DistanceSeries &seg, double step)
{
    const auto &s = seg.travelled;
    const auto &v = seg.values;
    const double len = s.back() - s.front();
    const auto n = static_cast<std::size_t>(std::floor(len / step + 1e-9)) + 1;
    std::vector<double> out(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double q = s.front() + static_cast<double>(i) * step;
        while (j + 1 < s.size() && s[j + 1] <= q)
            ++j;
        if (j + 1 >= s.size())
        {
            out[i] = v.back();
            continue;
        }
        const double span = s[j + 1] - s[j];
        const double u = span > 0.0 ? (q - s[j]) / span : 0.0;
        out[i] = v[j] + u * (v[j + 1] - v[j]);
    }
    return out;
}

double fit_error(const std::vector<double> &rho, double step, std::size_t lags, double k)
{
    double e = 0.0;
    for (std::size_t l = 1; l <= lags; ++l)
    {
        const double r = rho[l] - std::exp(-k * step * static_cast<double>(l));
        e += r * r;
    }
    return e;
}

double fit_k_on_range(const std::vector<double> &rho, double step, std::size_t lags, double k_lo, double k_hi)
{
    // coarse log-spaced scan followed by golden-section refinement
    const int n_scan = 200;
    const double a = std::log(k_lo), b = std::log(k_hi);
    int best = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scan; ++i)
    {
        const double e = fit_error(rho, step, lags, std::exp(a + (b - a) * i / n_scan));
        if (e < best_e)
        {
            best_e = e;
            best = i;
        }
    }
    double lo = a + (b - a) * std::max(best - 1, 0) / n_scan;
    double hi = a + (b - a) * std::min(best + 1, n_scan) / n_scan;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = fit_error(rho, step, lags, std::exp(x1)), f2 = fit_error(rho, step, lags, std::exp(x2));
    for (int it = 0; it < 100 && hi - lo > 1e-10; ++it)
    {
        if (f1 < f2)
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = fit_error(rho, step, lags, std::exp(x1));
        }
        else
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = fit_error(rho, step, lags, std::exp(x2));
        }
    }
    return std::exp(0.5 * (lo + hi));
}
} // namespace

AutocorrelationFit fit_exponential_decay(std::span<const double> rho_in, double step)
{
    if (rho_in.size() < 3 || !(step > 0.0))
        throw std::invalid_argument("fit_exponential_decay: need lags 0..2 and a positive step");
    const std::vector<double> rho(rho_in.begin(), rho_in.end());
    const std::size_t usable = rho.size() - 1;
    const double k_lo = 1e-3 / (step * static_cast<double>(usable));
    const double k_hi = 50.0 / step;

    // initial guess from the first crossing of 1/e
    double k = k_hi;
    for (std::size_t l = 1; l <= usable; ++l)
        if (rho[l] < std::exp(-1.0))
        {
            k = 1.0 / (step * static_cast<double>(l));
            break;
        }
    if (k == k_hi && rho[usable] >= std::exp(-1.0))
        k = 1.0 / (step * static_cast<double>(usable));

    for (int it = 0; it < 50; ++it)
    {
        std::size_t lags = static_cast<std::size_t>(std::floor(3.0 / (k * step)));
        lags = std::clamp<std::size_t>(lags, 2, usable);
        const double next = fit_k_on_range(rho, step, lags, k_lo, k_hi);
        const bool done = std::abs(next - k) <= 1e-9 * k;
        k = next;
        if (done)
            break;
    }
    return {k, 1.0 / k};
}

namespace
{
// Centered cardinal B-spline of order n: the n-fold convolution of the unit box.
double cardinal_bspline(double x, int n)
{
    double acc = 0.0, binom = 1.0, fact = 1.0;
    for (int i = 2; i < n; ++i)
        fact *= i;
    for (int j = 0; j <= n; ++j)
    {
        const double t = x + 0.5 * n - j;
        if (t > 0.0)
            acc += (j % 2 ? -1.0 : 1.0) * binom * std::pow(t, n - 1);
        binom = binom * (n - j) / (j + 1);
    }
    return std::max(0.0, acc / fact);
}

// Simpson nodes and weights for the integral of exp(-k |d + s|) against the
// autocorrelation of the combined kernel, a B-spline of order 2 * passes
// stretched by L.
class SmoothedCorrelation
{
  public:
    SmoothedCorrelation(double window_m, int passes)
    {
        const double L = window_m, half = passes * L;
        const int n = 800 * passes;
        const double h = 2.0 * half / n;
        s_.resize(n + 1);
        w_.resize(n + 1);
        for (int i = 0; i <= n; ++i)
        {
            s_[i] = -half + h * i;
            const double simpson = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            w_[i] = simpson * h / 3.0 / L * cardinal_bspline(s_[i] / L, 2 * passes);
        }
    }

    double operator()(double d, double k) const
    {
        d = std::abs(d);
        double acc = 0.0;
        for (std::size_t i = 0; i < s_.size(); ++i)
            acc += w_[i] * std::exp(-k * std::abs(d + s_[i]));
        return acc;
    }

  private:
    std::vector<double> s_, w_;
};

ShadowingModel compensate_uncached(const ShadowingModel &nominal, double window_m, int passes)
{
    const SmoothedCorrelation corr(window_m, passes);
    ShadowingModel out = nominal;
    const double step = std::min(0.01, window_m / 20.0);
    for (std::size_t s = 0; s < 2; ++s)
    {
        const double target = nominal.k_forgetting[s];
        const auto lags = static_cast<std::size_t>(std::ceil(8.0 / (target * step)));
        auto apparent = [&](double k) {
            const double r0 = corr(0.0, k);
            std::vector<double> rho(lags + 1);
            for (std::size_t l = 0; l <= lags; ++l)
                rho[l] = corr(step * static_cast<double>(l), k) / r0;
            return fit_exponential_decay(rho, step).k;
        };
        // smoothing only lowers the apparent decay constant
        double lo = std::log(target), hi = std::log(20.0 * target);
        for (int it = 0; it < 40; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (apparent(std::exp(mid)) < target ? lo : hi) = mid;
        }
        const double k = std::exp(0.5 * (lo + hi));
        out.k_forgetting[s] = k;
        out.sigma_db[s] = nominal.sigma_db[s] / std::sqrt(corr(0.0, k));
    }
    return out;
}
} // namespace

double smoothed_exponential_correlation(double d, double k, double window_m, int passes)
{
    if (passes < 0)
        throw std::invalid_argument("smoothed_exponential_correlation: passes must be non-negative");
    if (!(window_m > 0.0) || passes == 0)
        return std::exp(-k * std::abs(d));
    return SmoothedCorrelation(window_m, passes)(d, k);
}

ShadowingModel compensate_smoothing(const ShadowingModel &nominal, double window_m, int passes)
{
    nominal.validate();
    if (!(window_m > 0.0) || passes <= 0)
        return nominal;
    // every Simulation asks for the same few parameter sets
    using Key = std::tuple<double, double, double, double, double, int>;
    static std::mutex mutex;
    static std::map<Key, ShadowingModel> cache;
    const Key key{nominal.sigma_db[0], nominal.sigma_db[1], nominal.k_forgetting[0], nominal.k_forgetting[1],
                  window_m, passes};
    {
        std::lock_guard lock(mutex);
        if (const auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    const ShadowingModel out = compensate_uncached(nominal, window_m, passes);
    std::lock_guard lock(mutex);
    cache.emplace(key, out);
    return out;
}

double TrailingAverage::push(double travelled, double value)
{
    buf_.emplace_back(travelled, value);
    sum_ += value;
    while (buf_.size() > 1 && buf_.front().first < travelled - window_m_)
    {
        sum_ -= buf_.front().second;
        buf_.pop_front();
    }
    if (buf_.size() == 1)
        sum_ = value;
    return sum_ / static_cast<double>(buf_.size());
}

AutocorrelationFit fit_autocorrelation(const std::vector<DistanceSeries> &segments)
{
    double dist = 0.0;
    std::size_t steps = 0;
    for (const auto &seg : segments)
    {
        if (seg.values.size() != seg.travelled.size())
            throw std::invalid_argument("fit_autocorrelation: value and distance lengths differ");
        for (std::size_t i = 1; i < seg.travelled.size(); ++i)
            if (seg.travelled[i] < seg.travelled[i - 1])
                throw std::invalid_argument("fit_autocorrelation: distances must not decrease");
        if (seg.values.size() >= 2 && seg.travelled.back() > seg.travelled.front())
        {
            dist += seg.travelled.back() - seg.travelled.front();
            steps += seg.values.size() - 1;
        }
    }
    if (steps == 0)
        throw std::invalid_argument("fit_autocorrelation: need at least two samples over a positive distance");
    const double step = dist / static_cast<double>(steps);

    std::vector<std::vector<double>> grids;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto &seg : segments)
        if (seg.values.size() >= 2 && seg.travelled.back() > seg.travelled.front())
        {
            grids.push_back(resample(seg, step));
            for (double x : grids.back())
                sum += x;
            count += grids.back().size();
        }
    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    std::size_t longest = 0;
    for (auto &g : grids)
    {
        for (double &x : g)
        {
            x -= mean;
            var += x * x;
        }
        longest = std::max(longest, g.size());
    }
    var /= static_cast<double>(count);
    if (!(var > 1e-24))
        throw std::invalid_argument("fit_autocorrelation: constant input");

    // correlation at lag l, averaged over available pairs
    const std::size_t max_lag = std::max<std::size_t>(longest / 2, 2);
    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    std::size_t usable = 0;
    for (std::size_t l = 1; l <= max_lag; ++l)
    {
        double acc = 0.0;
        std::size_t pairs = 0;
        for (const auto &g : grids)
            for (std::size_t i = 0; i + l < g.size(); ++i)
            {
                acc += g[i] * g[i + l];
                ++pairs;
            }
        if (pairs == 0)
            break;
        rho[l] = acc / static_cast<double>(pairs) / var;
        usable = l;
    }
    if (usable < 2)
        throw std::invalid_argument("fit_autocorrelation: record too short");

    return fit_exponential_decay(std::span<const double>(rho.data(), usable + 1), step);
}

AutocorrelationFit fit_autocorrelation(std::span<const double> lsf_db, std::span<const double> travelled)
{
    if (lsf_db.size() < 2)
        throw std::invalid_argument("fit_autocorrelation: need at least two samples");
    return fit_autocorrelation(std::vector<DistanceSeries>{
        DistanceSeries{{lsf_db.begin(), lsf_db.end()}, {travelled.begin(), travelled.end()}}});
}

} // namespace dmimo
