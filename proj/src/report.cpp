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

#include "dmimo/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dmimo
{
namespace
{
using Json = nlohmann::ordered_json;

constexpr int kAll = 2; // class index for "all snapshots"

double to_db(double x)
{
    return 10.0 * std::log10(std::max(x, std::numeric_limits<double>::min()));
}

// Rice CDF tabulated on a fine grid, for KS distances over many samples.
class RiceCdfTable
{
  public:
    explicit RiceCdfTable(const RiceModel &m, std::size_t n = 8192)
    {
        hi_ = m.nu + 12.0 * m.sigma;
        step_ = hi_ / static_cast<double>(n);
        cdf_.assign(n + 1, 0.0);
        double prev = rice_pdf(0.0, m);
        for (std::size_t i = 1; i <= n; ++i)
        {
            // Simpson on each cell with its midpoint
            const double x0 = static_cast<double>(i - 1) * step_, x1 = x0 + step_;
            const double mid = rice_pdf(0.5 * (x0 + x1), m), cur = rice_pdf(x1, m);
            cdf_[i] = cdf_[i - 1] + step_ / 6.0 * (prev + 4.0 * mid + cur);
            prev = cur;
        }
        for (auto &c : cdf_)
            c = std::min(c, 1.0);
    }

    double operator()(double x) const
    {
        if (x <= 0.0)
            return 0.0;
        if (x >= hi_)
            return 1.0;
        const double pos = x / step_;
        const auto i = static_cast<std::size_t>(pos);
        const double u = pos - static_cast<double>(i);
        return cdf_[i] + u * (cdf_[i + 1] - cdf_[i]);
    }

  private:
    double hi_ = 0.0, step_ = 0.0;
    std::vector<double> cdf_;
};

std::vector<double> thin(const std::vector<double> &v, std::size_t max_n)
{
    if (v.size() <= max_n)
        return v;
    std::vector<double> out;
    out.reserve(max_n);
    for (std::size_t i = 0; i < max_n; ++i)
        out.push_back(v[i * v.size() / max_n]);
    return out;
}

void check_side_dims(const Eigen::MatrixXd *m, std::size_t M, std::size_t T, const char *what)
{
    if (m && (static_cast<std::size_t>(m->rows()) != M || static_cast<std::size_t>(m->cols()) != T))
        throw std::invalid_argument(std::string("side channel '") + what + "' does not match the tensor dimensions");
}
} // namespace

StatsReport analyze(const ChannelTensor &tensor, const Deployment &dep, const Trajectory &traj,
                    const SideChannel &side, const AnalysisOptions &opt, FigureData *figures)
{
    const std::size_t M = tensor.M, T = tensor.T, F = tensor.F;
    if (dep.num_anchors() != M)
        throw std::invalid_argument("tensor has " + std::to_string(M) + " anchors, deployment has " +
                                    std::to_string(dep.num_anchors()));
    if (traj.size() != T)
        throw std::invalid_argument("tensor has " + std::to_string(T) + " snapshots, trajectory has " +
                                    std::to_string(traj.size()));
    if (dep.num_tones != F)
        throw std::invalid_argument("tensor has " + std::to_string(F) + " tones, deployment has " +
                                    std::to_string(dep.num_tones));
    if (side.states && (side.states->num_anchors != M || side.states->num_snapshots != T))
        throw std::invalid_argument("state trace does not match the tensor dimensions");
    check_side_dims(side.lsf_db, M, T, "lsf_db");
    check_side_dims(side.pg_db, M, T, "pg_db");
    check_side_dims(side.k_factor, M, T, "k_factor");

    StatsReport rep;
    rep.M = M;
    rep.T = T;
    rep.F = F;
    rep.state_conditioned = side.states != nullptr;
    const auto &travelled = traj.travelled();
    const double window_m = opt.lsf_window_m > 0.0 ? opt.lsf_window_m : 10.0 * dep.wavelength();

    auto cls = [&](std::size_t m, std::size_t k) -> int {
        return side.states ? static_cast<int>(state_index(side.states->at(m, k))) : kAll;
    };
    auto stats = [&](int c) -> StateStats & { return c == kAll ? rep.all : rep.by_state[static_cast<std::size_t>(c)]; };
    std::vector<int> classes{kAll};
    if (side.states)
        classes = {kAll, 0, 1};

    // --- power, distances, counts
    std::vector<std::vector<double>> p_db(M, std::vector<double>(T)), dist(M, std::vector<double>(T));
    for (std::size_t m = 0; m < M; ++m)
    {
        const Eigen::VectorXd p = tensor.avg_power(m);
        for (std::size_t k = 0; k < T; ++k)
        {
            p_db[m][k] = to_db(p[static_cast<Eigen::Index>(k)]);
            dist[m][k] = std::max(distance(m, traj.position(k), dep), 1e-6);
            ++rep.all.samples;
            if (side.states)
                ++stats(cls(m, k)).samples;
        }
    }

    // --- path gain. With the true LSF known it is removed before the fit;
    // the LSF itself is always extracted against the fit on raw power.
    std::array<std::optional<PathGainModel>, 3> raw_fit;
    auto fit_pg = [&](int c, bool remove_lsf) -> std::optional<PathGainModel> {
        std::vector<double> y, x;
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < T; ++k)
                if (c == kAll || cls(m, k) == c)
                {
                    double v = p_db[m][k];
                    if (remove_lsf)
                        v -= (*side.lsf_db)(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
                    y.push_back(v);
                    x.push_back(dist[m][k]);
                }
        try
        {
            if (x.size() >= 2)
                return estimate_path_gain(y, x, opt.d_exclude_m);
        }
        catch (const std::invalid_argument &)
        {
        }
        return std::nullopt;
    };
    for (int c : classes)
    {
        raw_fit[static_cast<std::size_t>(c)] = fit_pg(c, false);
        stats(c).path_gain = side.lsf_db ? fit_pg(c, true) : raw_fit[static_cast<std::size_t>(c)];
    }

    // --- large-scale fading
    auto fallback_pg = [&](int c) {
        if (raw_fit[static_cast<std::size_t>(c)])
            return *raw_fit[static_cast<std::size_t>(c)];
        if (raw_fit[kAll])
            return *raw_fit[kAll];
        // no usable fit: flat model at the mean power
        double s = 0.0;
        for (const auto &row : p_db)
            for (double v : row)
                s += v;
        PathGainModel flat;
        flat.intercept_db = s / static_cast<double>(M * T);
        flat.exponent = 0.0;
        return flat;
    };
    PathGainPair fitted;
    fitted.los = fallback_pg(side.states ? 0 : kAll);
    fitted.olos = fallback_pg(side.states ? 1 : kAll);

    std::vector<std::vector<double>> lsf(M);
    std::vector<LinkState> st(T, LinkState::LoS);
    for (std::size_t m = 0; m < M; ++m)
    {
        for (std::size_t k = 0; k < T; ++k)
            st[k] = side.states ? side.states->at(m, k) : LinkState::LoS;
        lsf[m] = extract_lsf(p_db[m], dist[m], st, fitted, travelled, window_m);
    }
    for (int c : classes)
    {
        std::vector<double> v;
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < T; ++k)
                if (c == kAll || cls(m, k) == c)
                    v.push_back(lsf[m][k]);
        if (v.size() >= 2)
            stats(c).lsf = fit_lognormal(v);
        if (figures && c != kAll)
            figures->lsf_db[static_cast<std::size_t>(c)] = thin(v, 200000);
        if (figures && c == kAll && !side.states)
            figures->lsf_db[0] = thin(v, 200000);
    }

    // --- decay constant on contiguous same-state segments
    for (int c : classes)
    {
        std::vector<DistanceSeries> segs;
        for (std::size_t m = 0; m < M; ++m)
        {
            std::size_t k = 0;
            while (k < T)
            {
                std::size_t e = k + 1;
                while (e < T && cls(m, e) == cls(m, k))
                    ++e;
                if ((c == kAll || cls(m, k) == c) && e - k >= 2 && travelled[e - 1] > travelled[k])
                {
                    DistanceSeries s;
                    for (std::size_t j = k; j < e; ++j)
                    {
                        s.values.push_back(lsf[m][j]);
                        s.travelled.push_back(travelled[j]);
                    }
                    segs.push_back(std::move(s));
                }
                if (c == kAll && !side.states)
                    break;
                k = e;
            }
        }
        try
        {
            if (!segs.empty())
                stats(c).autocorrelation = fit_autocorrelation(segs);
        }
        catch (const std::invalid_argument &)
        {
        }
    }

    // --- cross-anchor correlation of the extracted LSF
    rep.covariance = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = a + 1; b < M; ++b)
        {
            double r = 0.0;
            try
            {
                r = reflective_correlation(lsf[a], lsf[b]);
            }
            catch (const std::invalid_argument &)
            {
            }
            rep.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
            rep.covariance(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
        }

    // --- small-scale amplitudes
    std::array<std::vector<double>, 3> amp;
    const std::size_t stride = std::max<std::size_t>(opt.ssf_tone_stride, 1);
    if (side.pg_db && side.lsf_db)
    {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < T; ++k)
            {
                const auto r = static_cast<Eigen::Index>(m), c = static_cast<Eigen::Index>(k);
                const int s = cls(m, k);
                if (side.k_factor && side.k_targets && s != kAll)
                {
                    const double target = (*side.k_targets)[static_cast<std::size_t>(s)];
                    if (std::abs((*side.k_factor)(r, c) - target) > 0.02 * target)
                        continue;
                }
                const double g = std::pow(10.0, ((*side.pg_db)(r, c) + (*side.lsf_db)(r, c)) / 20.0);
                for (std::size_t f = 0; f < F; f += stride)
                {
                    const double a = std::abs(std::complex<double>(tensor.at(m, k, f))) / g;
                    amp[kAll].push_back(a);
                    if (s != kAll)
                        amp[static_cast<std::size_t>(s)].push_back(a);
                }
            }
    }
    else if (T >= opt.ssf_window && opt.ssf_window >= 1)
    {
        const std::size_t nf = (F + stride - 1) / stride;
        for (std::size_t m = 0; m < M; ++m)
        {
            Eigen::MatrixXd A(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(T));
            for (std::size_t k = 0; k < T; ++k)
                for (std::size_t i = 0; i < nf; ++i)
                    A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                        std::abs(std::complex<double>(tensor.at(m, k, i * stride)));
            Eigen::MatrixXd S;
            try
            {
                S = extract_ssf(A, opt.ssf_window);
            }
            catch (const std::invalid_argument &)
            {
                continue;
            }
            const std::size_t half = opt.ssf_window / 2;
            for (Eigen::Index j = 0; j < S.cols(); ++j)
            {
                const int s = cls(m, static_cast<std::size_t>(j) + half);
                for (Eigen::Index i = 0; i < S.rows(); ++i)
                {
                    amp[kAll].push_back(S(i, j));
                    if (s != kAll)
                        amp[static_cast<std::size_t>(s)].push_back(S(i, j));
                }
            }
        }
    }
    for (int c : classes)
    {
        const auto &v = amp[static_cast<std::size_t>(c)];
        if (v.size() < 100)
            continue;
        try
        {
            const auto sample = thin(v, 400000);
            const RiceFit fit = fit_rice(sample);
            stats(c).rice = fit;
            if (fit.k < kRiceKMax)
            {
                const RiceCdfTable cdf(fit.model);
                stats(c).rice_ks = ks_statistic(sample, [&](double x) { return cdf(x); });
            }
        }
        catch (const std::invalid_argument &)
        {
        }
        if (figures && c != kAll)
            figures->ssf_amplitude[static_cast<std::size_t>(c)] = thin(v, 100000);
    }

    // --- delay spread from local PDPs
    if (F >= 8 && opt.ds_window >= 8 && T >= opt.ds_window)
    {
        LsfEstimator est(F, opt.ds_window);
        const auto layout = window_layout(T, opt.ds_window, std::max<std::size_t>(opt.ds_hop, 1));
        DelaySpreadOptions dso;
        dso.peak_threshold_db = opt.peak_threshold_db;
        dso.noise_margin_db = opt.noise_margin_db;
        std::array<std::vector<double>, 3> ds;
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t w = 0; w < layout.size(); ++w)
            {
                const Eigen::VectorXd prof = est.local_pdp(tensor.anchor_window(m, layout.starts[w], layout.length));
                if (!(prof.maxCoeff() > 0.0))
                    continue;
                const double v = rms_delay_spread(prof, dep.delay_bin_s(), dso);
                ds[kAll].push_back(v);
                const int s = cls(m, layout.center(w));
                if (s != kAll)
                    ds[static_cast<std::size_t>(s)].push_back(v);
            }
        for (int c : classes)
        {
            const auto &v = ds[static_cast<std::size_t>(c)];
            stats(c).delay_spread_windows = v.size();
            if (!v.empty())
                stats(c).delay_spread_median_s = median(v);
        }
        if (figures)
        {
            figures->delay_spread_s[0] = side.states ? ds[0] : ds[kAll];
            figures->delay_spread_s[1] = ds[1];
        }
    }

    // --- stationarity distance
    if (opt.stationarity && F >= 8 && opt.stationarity_window >= 8 && T >= opt.stationarity_window)
    {
        LsfEstimator est(F, opt.stationarity_window);
        const auto layout = window_layout(T, opt.stationarity_window, std::max<std::size_t>(opt.stationarity_hop, 1));
        std::array<std::vector<double>, 3> sd;
        for (std::size_t m = 0; m < M; ++m)
        {
            std::vector<LocalScatteringFunction> lsfs;
            lsfs.reserve(layout.size());
            for (std::size_t w = 0; w < layout.size(); ++w)
                lsfs.push_back(est.estimate(tensor.anchor_window(m, layout.starts[w], layout.length), layout.center(w)));
            Eigen::MatrixXd R;
            try
            {
                R = collinearity_matrix(lsfs);
            }
            catch (const std::invalid_argument &)
            {
                continue;
            }
            const auto d = stationarity_distance(R, opt.collinearity_threshold, layout, travelled);
            for (std::size_t w = 0; w < d.size(); ++w)
            {
                sd[kAll].push_back(d[w]);
                const int s = cls(m, layout.center(w));
                if (s != kAll)
                    sd[static_cast<std::size_t>(s)].push_back(d[w]);
            }
            if (figures && m == 0)
                figures->collinearity = R;
        }
        for (int c : classes)
            if (!sd[static_cast<std::size_t>(c)].empty())
                stats(c).stationarity_median_m = median(sd[static_cast<std::size_t>(c)]);
        if (figures)
            figures->stationarity_m = sd[kAll];
    }

    // --- link-state statistics
    if (side.states && T >= 2 && traj.total_distance() > 0.0)
    {
        rep.transition_rate = estimate_transition_rate(*side.states, traj);
        rep.pooled_transition_rate = estimate_pooled_transition_rate(*side.states, traj);
        const auto counts = count_los_links(*side.states);
        rep.median_los_count = median(std::vector<double>(counts.begin(), counts.end()));
        if (figures)
            figures->los_count = counts;
        std::array<std::vector<double>, 2> runs;
        for (std::size_t m = 0; m < M; ++m)
            for (const auto &r : run_lengths(*side.states, traj, m))
                runs[state_index(r.state)].push_back(r.length_m);
        for (std::size_t s = 0; s < 2; ++s)
            if (!runs[s].empty())
            {
                double sum = 0.0;
                for (double x : runs[s])
                    sum += x;
                rep.by_state[s].mean_run_length_m = sum / static_cast<double>(runs[s].size());
            }
    }
    else if (side.states && figures)
        figures->los_count = count_los_links(*side.states);

    // --- channel hardening
    if (opt.hardening)
    {
        auto summarize = [](const HardeningSummary &h) {
            return HardeningStats{h.single_outage_db(), h.single_median_db(), h.mrt_outage_db(), h.mrt_median_db()};
        };
        const auto full = hardening_summary(tensor, HardeningMode::Full, opt.hardening_window,
                                            opt.hardening_tone_stride, opt.hardening_snapshot_stride);
        rep.hardening_full = summarize(full);
        if (figures)
            figures->hardening_full = full;
        if (T >= opt.hardening_window)
        {
            const auto ssf = hardening_summary(tensor, HardeningMode::SsfOnly, opt.hardening_window,
                                               opt.hardening_tone_stride, opt.hardening_snapshot_stride);
            rep.hardening_ssf = summarize(ssf);
            if (figures)
                figures->hardening_ssf = ssf;
        }
    }
    return rep;
}

// ------------------------------------------------------------------------

namespace
{
Json opt_num(const std::optional<double> &v)
{
    return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

void put_stats(Json &j, const StateStats &s)
{
    j["samples"] = s.samples;
    j["pg_intercept_db"] = s.path_gain ? Json(s.path_gain->intercept_db) : Json(nullptr);
    j["pg_exponent"] = s.path_gain ? Json(s.path_gain->exponent) : Json(nullptr);
    j["lsf_mean_db"] = s.lsf ? Json(s.lsf->mean_db) : Json(nullptr);
    j["lsf_sigma_db"] = s.lsf ? Json(s.lsf->sigma_db) : Json(nullptr);
    j["k_forgetting"] = s.autocorrelation ? Json(s.autocorrelation->k) : Json(nullptr);
    j["d_decorr_m"] = s.autocorrelation ? Json(s.autocorrelation->d_decorr) : Json(nullptr);
    j["rice_k_factor"] = s.rice ? Json(s.rice->k) : Json(nullptr);
    j["rice_nu"] = s.rice ? Json(s.rice->model.nu) : Json(nullptr);
    j["rice_sigma"] = s.rice ? Json(s.rice->model.sigma) : Json(nullptr);
    j["rice_ks_distance"] = s.rice ? Json(s.rice_ks) : Json(nullptr);
    j["delay_spread_median_ns"] = s.delay_spread_median_s ? Json(*s.delay_spread_median_s * 1e9) : Json(nullptr);
    j["delay_spread_windows"] = s.delay_spread_windows;
    j["stationarity_median_m"] = opt_num(s.stationarity_median_m);
    j["mean_run_length_m"] = opt_num(s.mean_run_length_m);
}

Json hardening_json(const std::optional<HardeningStats> &h)
{
    if (!h)
        return nullptr;
    Json j;
    j["single_outage_1pct_db"] = h->single_outage_db;
    j["single_median_db"] = h->single_median_db;
    j["mrt_outage_1pct_db"] = h->mrt_outage_db;
    j["mrt_median_db"] = h->mrt_median_db;
    return j;
}
} // namespace

std::string report_to_json(const StatsReport &rep, int indent)
{
    Json j;
    j["dimensions"] = {{"anchors", rep.M}, {"snapshots", rep.T}, {"tones", rep.F}};
    j["state_conditioned"] = rep.state_conditioned;
    put_stats(j, rep.headline());
    std::vector<double> cov;
    for (Eigen::Index r = 0; r < rep.covariance.rows(); ++r)
        for (Eigen::Index c = 0; c < rep.covariance.cols(); ++c)
            cov.push_back(rep.covariance(r, c));
    j["covariance"] = cov;
    if (rep.state_conditioned)
    {
        Json all, los, olos;
        put_stats(all, rep.all);
        put_stats(los, rep.by_state[0]);
        put_stats(olos, rep.by_state[1]);
        j["all"] = all;
        j["los"] = los;
        j["olos"] = olos;
        Json ls;
        ls["transition_rate_per_anchor"] = rep.transition_rate;
        ls["pooled_transition_rate"] = opt_num(rep.pooled_transition_rate);
        ls["median_los_count"] = opt_num(rep.median_los_count);
        j["link_state"] = ls;
    }
    j["hardening"] = {{"full", hardening_json(rep.hardening_full)}, {"ssf_only", hardening_json(rep.hardening_ssf)}};
    return j.dump(indent) + "\n";
}

// ------------------------------------------------------------------------

namespace
{
void write_csv(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string ecdf_csv(const std::vector<double> &v, const char *column)
{
    std::ostringstream os;
    os.precision(10);
    os << column << ",probability\n";
    if (v.empty())
        return os.str();
    for (const auto &[x, p] : ecdf(v))
        os << x << ',' << p << '\n';
    return os.str();
}
} // namespace

void write_figures(const std::filesystem::path &dir, const FigureData &fig, const StatsReport &rep)
{
    std::filesystem::create_directories(dir);
    {
        std::vector<double> c(fig.los_count.begin(), fig.los_count.end());
        write_csv(dir / "los_count_ecdf.csv", ecdf_csv(c, "los_links"));
    }
    write_csv(dir / "lsf_los_ecdf.csv", ecdf_csv(fig.lsf_db[0], "lsf_db"));
    write_csv(dir / "lsf_olos_ecdf.csv", ecdf_csv(fig.lsf_db[1], "lsf_db"));
    {
        std::ostringstream os;
        os.precision(10);
        os << "row,col,correlation\n";
        for (Eigen::Index r = 0; r < rep.covariance.rows(); ++r)
            for (Eigen::Index c = 0; c < rep.covariance.cols(); ++c)
                os << r << ',' << c << ',' << rep.covariance(r, c) << '\n';
        write_csv(dir / "lsf_covariance.csv", os.str());
    }
    {
        std::ostringstream os;
        os.precision(10);
        os << "window_i,window_j,collinearity\n";
        for (Eigen::Index r = 0; r < fig.collinearity.rows(); ++r)
            for (Eigen::Index c = 0; c < fig.collinearity.cols(); ++c)
                os << r << ',' << c << ',' << fig.collinearity(r, c) << '\n';
        write_csv(dir / "collinearity_anchor0.csv", os.str());
    }
    write_csv(dir / "stationarity_distance_ecdf.csv", ecdf_csv(fig.stationarity_m, "distance_m"));
    {
        std::vector<double> ns;
        for (int s = 0; s < 2; ++s)
        {
            ns.clear();
            for (double x : fig.delay_spread_s[static_cast<std::size_t>(s)])
                ns.push_back(x * 1e9);
            write_csv(dir / (s == 0 ? "delay_spread_los_ecdf.csv" : "delay_spread_olos_ecdf.csv"),
                      ecdf_csv(ns, "delay_spread_ns"));
        }
    }
    for (int s = 0; s < 2; ++s)
    {
        const auto &v = fig.ssf_amplitude[static_cast<std::size_t>(s)];
        std::ostringstream os;
        os.precision(10);
        os << "amplitude,probability,rice_fit\n";
        const auto &st = rep.by_state[static_cast<std::size_t>(s)].rice ? rep.by_state[static_cast<std::size_t>(s)]
                                                                         : rep.all;
        if (!v.empty())
        {
            const auto e = ecdf(v);
            const std::size_t step = std::max<std::size_t>(1, e.size() / 2000);
            for (std::size_t i = 0; i < e.size(); i += step)
                os << e[i].first << ',' << e[i].second << ','
                   << (st.rice ? rice_cdf(e[i].first, st.rice->model) : std::nan("")) << '\n';
        }
        write_csv(dir / (s == 0 ? "ssf_los_ecdf.csv" : "ssf_olos_ecdf.csv"), os.str());
    }
    auto hard = [&](const std::optional<HardeningSummary> &h, const char *name) {
        if (!h)
            return;
        std::vector<double> mrt = h->mrt_db;
        const double off = to_db(static_cast<double>(h->num_anchors));
        for (auto &x : mrt)
            x -= off;
        write_csv(dir / (std::string(name) + "_single_ecdf.csv"), ecdf_csv(thin(h->single_db, 200000), "gain_db"));
        write_csv(dir / (std::string(name) + "_mrt_ecdf.csv"), ecdf_csv(thin(mrt, 200000), "gain_db"));
    };
    hard(fig.hardening_full, "hardening_full");
    hard(fig.hardening_ssf, "hardening_ssf");
}

void write_truth_csv(std::ostream &out, const GroundTruth &truth)
{
    out << "snapshot,anchor,lsf_db,k_factor,pg_db,distance_m\n";
    char buf[160];
    const auto M = truth.lsf_db.rows(), T = truth.lsf_db.cols();
    for (Eigen::Index k = 0; k < T; ++k)
        for (Eigen::Index m = 0; m < M; ++m)
        {
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long>(k),
                          static_cast<long>(m), truth.lsf_db(m, k), truth.k_factor(m, k), truth.pg_db(m, k),
                          truth.distance_m(m, k));
            out << buf;
        }
}

GroundTruth read_truth_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("snapshot,anchor,lsf_db", 0) != 0)
        throw std::invalid_argument("truth CSV: missing header");
    struct Row
    {
        std::size_t k, m;
        double v[4];
    };
    std::vector<Row> rows;
    std::size_t M = 0, T = 0, line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        Row r{};
        long k = -1, m = -1;
        if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf,%lf,%lf", &k, &m, &r.v[0], &r.v[1], &r.v[2], &r.v[3]) != 6 ||
            k < 0 || m < 0)
            throw std::invalid_argument("truth CSV line " + std::to_string(line_no) + ": malformed row");
        r.k = static_cast<std::size_t>(k);
        r.m = static_cast<std::size_t>(m);
        M = std::max(M, r.m + 1);
        T = std::max(T, r.k + 1);
        rows.push_back(r);
    }
    if (rows.size() != M * T || rows.empty())
        throw std::invalid_argument("truth CSV: rows do not form a complete anchor x snapshot grid");
    GroundTruth g;
    const auto eM = static_cast<Eigen::Index>(M), eT = static_cast<Eigen::Index>(T);
    g.lsf_db.resize(eM, eT);
    g.k_factor.resize(eM, eT);
    g.pg_db.resize(eM, eT);
    g.distance_m.resize(eM, eT);
    for (const auto &r : rows)
    {
        const auto m = static_cast<Eigen::Index>(r.m), k = static_cast<Eigen::Index>(r.k);
        g.lsf_db(m, k) = r.v[0];
        g.k_factor(m, k) = r.v[1];
        g.pg_db(m, k) = r.v[2];
        g.distance_m(m, k) = r.v[3];
    }
    return g;
}

// ------------------------------------------------------------------------

ToleranceSet ToleranceSet::defaults()
{
    ToleranceSet t;
    t.entries = {
        {"los.pg_intercept_db", {0.3, false}},  {"los.pg_exponent", {0.03, false}},
        {"olos.pg_intercept_db", {0.3, false}}, {"olos.pg_exponent", {0.03, false}},
        {"los.lsf_sigma_db", {0.25, false}},    {"olos.lsf_sigma_db", {0.35, false}},
        {"los.lsf_mean_db", {0.3, false}},      {"olos.lsf_mean_db", {0.3, false}},
        {"los.k_forgetting", {0.08, false}},    {"olos.k_forgetting", {0.08, false}},
        {"los.rice_k_factor", {0.15, false}},   {"olos.rice_k_factor", {0.10, false}},
        {"los.delay_spread_ns", {0.10, true}},  {"olos.delay_spread_ns", {0.10, true}},
        {"transition_rate", {0.15, true}},
    };
    return t;
}

bool ValidationResult::pass() const
{
    return std::all_of(rows.begin(), rows.end(), [](const ValidationRow &r) { return r.pass; });
}

std::string ValidationResult::table() const
{
    std::ostringstream os;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-24s %12s %12s %12s  %s\n", "parameter", "expected", "estimated", "tolerance",
                  "result");
    os << buf;
    for (const auto &r : rows)
    {
        char tol[32];
        if (r.tolerance.relative)
            std::snprintf(tol, sizeof tol, "%.3g%%", 100.0 * r.tolerance.value);
        else
            std::snprintf(tol, sizeof tol, "%.4g", r.tolerance.value);
        std::snprintf(buf, sizeof buf, "%-24s %12.5g %12.5g %12s  %s\n", r.parameter.c_str(), r.expected,
                      r.estimated, tol, r.pass ? "PASS" : "FAIL");
        os << buf;
    }
    os << (pass() ? "overall: PASS\n" : "overall: FAIL\n");
    return os.str();
}

ValidationResult validate_generated(const Generated &gen, const ModelConfig &cfg, const Deployment &dep,
                                    const Trajectory &traj, const ToleranceSet &tol, const AnalysisOptions &options)
{
    SideChannel side;
    side.states = &gen.truth.states;
    side.lsf_db = &gen.truth.lsf_db;
    side.pg_db = &gen.truth.pg_db;
    side.k_factor = &gen.truth.k_factor;
    side.k_targets = std::array<double, 2>{cfg.target_k(LinkState::LoS), cfg.target_k(LinkState::OLoS)};
    AnalysisOptions opt = options;
    opt.stationarity = false;
    opt.hardening = false;

    ValidationResult res;
    res.report = analyze(gen.tensor, dep, traj, side, opt);
    const StatsReport &rep = res.report;

    auto add = [&](const std::string &name, double expected, std::optional<double> estimated) {
        const auto it = tol.entries.find(name);
        if (it == tol.entries.end())
            return;
        ValidationRow row;
        row.parameter = name;
        row.expected = expected;
        row.estimated = estimated.value_or(std::nan(""));
        row.tolerance = it->second;
        const double allowed = it->second.relative ? it->second.value * std::abs(expected) : it->second.value;
        row.pass = estimated && std::isfinite(*estimated) && std::abs(*estimated - expected) <= allowed;
        res.rows.push_back(row);
    };

    const double sigma_scale = cfg.lsf_enabled ? cfg.lsf_sigma_scale : 0.0;
    for (LinkState s : {LinkState::LoS, LinkState::OLoS})
    {
        const auto &st = rep.by_state[state_index(s)];
        if (st.samples == 0)
            continue;
        const std::string p = s == LinkState::LoS ? "los." : "olos.";
        const auto &pg = cfg.path_gain[s];
        add(p + "pg_intercept_db", pg.intercept_db,
            st.path_gain ? std::optional<double>(st.path_gain->intercept_db) : std::nullopt);
        add(p + "pg_exponent", pg.exponent,
            st.path_gain ? std::optional<double>(st.path_gain->exponent) : std::nullopt);
        add(p + "lsf_sigma_db", cfg.shadowing.sigma(s) * sigma_scale,
            st.lsf ? std::optional<double>(st.lsf->sigma_db) : std::nullopt);
        add(p + "lsf_mean_db", 0.0, st.lsf ? std::optional<double>(st.lsf->mean_db) : std::nullopt);
        if (sigma_scale > 0.0)
            add(p + "k_forgetting", cfg.shadowing.k(s),
                st.autocorrelation ? std::optional<double>(st.autocorrelation->k) : std::nullopt);
        if (!cfg.direct_path_only)
        {
            add(p + "rice_k_factor", cfg.target_k(s), st.rice ? std::optional<double>(st.rice->k) : std::nullopt);
            add(p + "delay_spread_ns", cfg.delay_spread_s[state_index(s)] * 1e9,
                st.delay_spread_median_s ? std::optional<double>(*st.delay_spread_median_s * 1e9) : std::nullopt);
        }
    }
    if (!cfg.forced_state && rep.pooled_transition_rate)
    {
        double mean_rate = 0.0;
        for (double r : gen.initial.transitions.rate_per_anchor)
            mean_rate += r;
        mean_rate /= static_cast<double>(gen.initial.transitions.rate_per_anchor.size());
        add("transition_rate", mean_rate, rep.pooled_transition_rate);
    }
    return res;
}

} // namespace dmimo
