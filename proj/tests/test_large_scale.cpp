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
#include "dmimo/link_state.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <numeric>

using namespace dmimo;
using Catch::Approx;

namespace
{
Trajectory line(double length_m, double speed, double rate)
{
    return Trajectory::from_waypoints({Vec3(0, 0, 1), Vec3(length_m, 0, 1)}, speed, rate);
}

Eigen::MatrixXd lsf_run(std::uint64_t seed, const Trajectory &traj, std::size_t M, LinkState s,
                        const Eigen::MatrixXd &C, ShadowingModel sh = {})
{
    Rng rng(seed);
    const LinkStateTrace states(M, traj.size(), s);
    return simulate_lsf(rng, traj, states, sh, C);
}

std::vector<DistanceSeries> rows_as_series(const Eigen::MatrixXd &X, const Trajectory &traj)
{
    std::vector<DistanceSeries> out;
    for (Eigen::Index m = 0; m < X.rows(); ++m)
    {
        DistanceSeries s;
        for (Eigen::Index k = 0; k < X.cols(); ++k)
        {
            s.values.push_back(X(m, k));
            s.travelled.push_back(traj.travelled(static_cast<std::size_t>(k)));
        }
        out.push_back(std::move(s));
    }
    return out;
}
} // namespace

TEST_CASE("path gain values", "[large_scale]")
{
    const PathGainPair pg;
    CHECK(path_gain(1.0, LinkState::LoS, pg) == Approx(-44.24));
    CHECK(path_gain(10.0, LinkState::OLoS, pg) == Approx(-58.28));
    CHECK(path_gain(1.0, LinkState::OLoS, pg) == Approx(-48.78));
    CHECK_THROWS_AS(path_gain(0.0, LinkState::LoS, pg), std::invalid_argument);
    CHECK_THROWS_AS(path_gain(-2.0, LinkState::LoS, pg), std::invalid_argument);

    bool oor = false;
    path_gain(10.0, LinkState::LoS, pg, &oor);
    CHECK(!oor);
    path_gain(2.0, LinkState::LoS, pg, &oor);
    CHECK(oor);
    CHECK(path_gain(45.0, LinkState::LoS, pg, &oor) == Approx(path_gain(30.0, LinkState::LoS, pg)));
    CHECK(oor);

    double prev = path_gain(pg.los.d_min, LinkState::LoS, pg);
    for (double d = pg.los.d_min + 0.1; d <= 30.0; d += 0.1)
    {
        const double l = path_gain(d, LinkState::LoS, pg), o = path_gain(d, LinkState::OLoS, pg);
        REQUIRE(l < prev);
        REQUIRE(l >= o);
        prev = l;
    }
}

TEST_CASE("covariance draws", "[large_scale]")
{
    Rng rng(1);
    CHECK(draw_covariance(rng, 1, LinkState::LoS)(0, 0) == 1.0);

    std::vector<double> los, olos;
    for (int i = 0; i < 1000; ++i)
    {
        const auto a = draw_covariance_raw(rng, 16, LinkState::LoS);
        const auto b = draw_covariance_raw(rng, 16, LinkState::OLoS);
        for (int r = 0; r < 16; ++r)
            for (int c = r + 1; c < 16; ++c)
            {
                REQUIRE(a(r, c) == a(c, r));
                los.push_back(a(r, c));
                olos.push_back(b(r, c));
            }
    }
    REQUIRE(los.size() > 100000);
    CHECK(*std::min_element(los.begin(), los.end()) >= -0.9);
    CHECK(*std::max_element(los.begin(), los.end()) <= 0.9);
    const double mean_olos = std::accumulate(olos.begin(), olos.end(), 0.0) / static_cast<double>(olos.size());
    CHECK(mean_olos == Approx(oracle::truncated_normal_mean(0.5, 0.5, -0.9, 0.9)).margin(0.01));
    const double mean_los = std::accumulate(los.begin(), los.end(), 0.0) / static_cast<double>(los.size());
    CHECK(mean_los == Approx(oracle::truncated_normal_mean(0.1, 0.4, -0.9, 0.9)).margin(0.01));

    for (int i = 0; i < 200; ++i)
    {
        const auto C = draw_covariance(rng, 12, i % 2 ? LinkState::LoS : LinkState::OLoS);
        REQUIRE((C - C.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((C.diagonal().array() - 1.0).abs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-12);
        REQUIRE(C.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }

    CovarianceModel var;
    var.spread_is_variance = true;
    CHECK(var.stddev(LinkState::LoS) == Approx(std::sqrt(0.4)));

    // an indefinite matrix is repaired
    Eigen::MatrixXd bad(3, 3);
    bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    const auto fixed = repair_covariance(bad);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fixed);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK((fixed.diagonal().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK_NOTHROW(covariance_factor(fixed));
}

TEST_CASE("LSF process without movement is frozen", "[large_scale]")
{
    const auto traj = Trajectory::stationary(Vec3(3, 3, 1), 500, 200.0);
    const auto X = lsf_run(5, traj, 3, LinkState::LoS, Eigen::MatrixXd::Identity(3, 3));
    for (Eigen::Index k = 1; k < X.cols(); ++k)
        REQUIRE(X.col(k) == X.col(0));
}

TEST_CASE("LSF marginal is Gaussian with the configured sigma", "[large_scale]")
{
    // 2 m steps make consecutive samples nearly independent
    const auto traj = line(2.0 * 84000, 2.0, 1.0);
    const auto X = lsf_run(7, traj, 12, LinkState::LoS, Eigen::MatrixXd::Identity(12, 12));
    const Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(X.data(), X.size());
    REQUIRE(v.size() >= 1000000);
    const double mean = v.mean();
    const Eigen::ArrayXd c = v - mean;
    const double m2 = c.square().mean(), m3 = c.cube().mean(), m4 = c.square().square().mean();
    CHECK(std::sqrt(m2) == Approx(2.13).epsilon(0.10));
    CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.05);
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.1);
    CHECK(fit_lognormal(std::vector<double>(v.begin(), v.end())).sigma_db == Approx(2.13).epsilon(0.02));
}

TEST_CASE("AR update keeps the variance for any step size", "[large_scale]")
{
    const std::size_t M = 4000;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
    LsfProcess p(3, ShadowingModel{}, I, I, CovarianceSelection::AlwaysOLoS);
    const std::vector<LinkState> st(M, LinkState::OLoS);
    p.start(st);
    for (double dd : {0.01, 0.5, 3.0, 0.001, 10.0, 0.2})
    {
        p.advance(dd, st);
        const Eigen::ArrayXd x = p.values().array();
        CHECK(std::sqrt((x - x.mean()).square().mean()) == Approx(3.25).epsilon(0.05));
    }
}

TEST_CASE("LSF autocorrelation decays with the forgetting factor", "[large_scale]")
{
    const auto traj = line(500.0, 1.0, 100.0);
    const auto X = lsf_run(11, traj, 12, LinkState::LoS, Eigen::MatrixXd::Identity(12, 12));
    const auto fit = fit_autocorrelation(rows_as_series(X, traj));
    CHECK(fit.k == Approx(0.82).epsilon(0.10));
    CHECK(fit.d_decorr == Approx(1.22).epsilon(0.11));

    // single AR(1) series with k = 0.81
    Rng rng(12);
    const double step = 0.01, a = std::exp(-0.81 * step);
    std::vector<double> x(60000), s(60000);
    double v = standard_normal(rng);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        v = a * v + std::sqrt(1 - a * a) * standard_normal(rng);
        x[i] = v;
        s[i] = step * static_cast<double>(i);
    }
    const auto f2 = fit_autocorrelation(x, s);
    CHECK(f2.k == Approx(0.81).epsilon(0.10));
    CHECK(f2.d_decorr == Approx(1.24).epsilon(0.11));

    // white noise decorrelates within one sample spacing
    std::vector<double> w(20000), sw(20000);
    for (std::size_t i = 0; i < w.size(); ++i)
    {
        w[i] = standard_normal(rng);
        sw[i] = 0.05 * static_cast<double>(i);
    }
    CHECK(fit_autocorrelation(w, sw).d_decorr < 0.05);

    const std::vector<double> flat(100, 2.0), d(100, 0.0);
    std::vector<double> dist(100);
    std::iota(dist.begin(), dist.end(), 0.0);
    CHECK_THROWS_AS(fit_autocorrelation(flat, dist), std::invalid_argument);
}

TEST_CASE("smoothing compensation inverts the moving-average bias", "[large_scale]")
{
    const double L = 0.8;
    CHECK(smoothed_exponential_correlation(0.0, 0.82, 0.0) == 1.0);
    // closed form of the variance factor for a boxcar average
    const double kl = 0.82 * L;
    CHECK(smoothed_exponential_correlation(0.0, 0.82, L) ==
          Approx(2.0 * (kl - 1.0 + std::exp(-kl)) / (kl * kl)).epsilon(1e-6));

    const ShadowingModel nominal;
    const ShadowingModel proc = compensate_smoothing(nominal, L);
    for (int s = 0; s < 2; ++s)
    {
        CHECK(proc.k_forgetting[s] > nominal.k_forgetting[s]);
        CHECK(proc.sigma_db[s] > nominal.sigma_db[s]);
    }

    // simulate with the compensated parameters, smooth, and re-estimate
    const auto traj = line(600.0, 1.0, 100.0);
    const auto X = lsf_run(31, traj, 12, LinkState::LoS, Eigen::MatrixXd::Identity(12, 12), proc);
    std::vector<DistanceSeries> smoothed;
    std::vector<double> all;
    for (Eigen::Index m = 0; m < X.rows(); ++m)
    {
        std::vector<double> row(X.row(m).data(), X.row(m).data() + X.cols());
        Eigen::VectorXd r = X.row(m).transpose();
        std::vector<double> rv(r.data(), r.data() + r.size());
        DistanceSeries s{moving_average_by_distance(rv, traj.travelled(), L), traj.travelled()};
        all.insert(all.end(), s.values.begin(), s.values.end());
        smoothed.push_back(std::move(s));
    }
    CHECK(fit_autocorrelation(smoothed).k == Approx(0.82).epsilon(0.10));
    CHECK(fit_lognormal(all).sigma_db == Approx(2.13).epsilon(0.08));
}

TEST_CASE("two-pass smoothing compensation", "[large_scale]")
{
    const double L = 0.8, k = 1.1;
    // discrete oracle: covariance of a finely sampled process under the
    // twice-convolved box kernel
    const int n = 200;
    const double dx = L / n;
    std::vector<double> box(n + 1, 1.0 / (n + 1)), h(2 * n + 1, 0.0);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            h[i + j] += box[i] * box[j];
    for (double lag : {0.0, 0.3, 1.0})
    {
        const int shift = static_cast<int>(std::lround(lag / dx));
        double v = 0.0;
        for (int i = 0; i <= 2 * n; ++i)
            for (int j = 0; j <= 2 * n; ++j)
                v += h[i] * h[j] * std::exp(-k * std::abs(i - j + shift) * dx);
        CHECK(smoothed_exponential_correlation(lag, k, L, 2) == Approx(v).epsilon(2e-3));
    }
    CHECK(smoothed_exponential_correlation(0.4, k, L, 0) == Approx(std::exp(-0.4 * k)));
    CHECK_THROWS_AS(smoothed_exponential_correlation(0.0, k, L, -1), std::invalid_argument);

    const ShadowingModel nominal;
    const ShadowingModel one = compensate_smoothing(nominal, L, 1);
    const ShadowingModel two = compensate_smoothing(nominal, L, 2);
    for (int s = 0; s < 2; ++s)
    {
        CHECK(two.k_forgetting[s] > one.k_forgetting[s]);
        CHECK(two.sigma_db[s] > one.sigma_db[s]);
    }

    // trailing average in the generator, centered average in the estimator
    const auto traj = line(600.0, 1.0, 100.0);
    const auto X = lsf_run(37, traj, 12, LinkState::OLoS, Eigen::MatrixXd::Identity(12, 12), two);
    std::vector<DistanceSeries> smoothed;
    std::vector<double> all;
    for (Eigen::Index m = 0; m < X.rows(); ++m)
    {
        TrailingAverage trailing(L);
        std::vector<double> rv(static_cast<std::size_t>(X.cols()));
        for (Eigen::Index c = 0; c < X.cols(); ++c)
            rv[static_cast<std::size_t>(c)] = trailing.push(traj.travelled(static_cast<std::size_t>(c)), X(m, c));
        DistanceSeries s{moving_average_by_distance(rv, traj.travelled(), L), traj.travelled()};
        all.insert(all.end(), s.values.begin(), s.values.end());
        smoothed.push_back(std::move(s));
    }
    CHECK(fit_autocorrelation(smoothed).k == Approx(0.81).epsilon(0.10));
    CHECK(fit_lognormal(all).sigma_db == Approx(3.25).epsilon(0.08));
}

TEST_CASE("trailing average", "[large_scale]")
{
    TrailingAverage c(2.0);
    CHECK(c.push(0.0, 5.0) == 5.0);
    CHECK(c.push(1.0, 5.0) == 5.0);

    TrailingAverage r(2.0);
    double last = 0.0;
    for (int i = 0; i < 10; ++i)
        last = r.push(static_cast<double>(i), static_cast<double>(i));
    // samples at travel 7, 8 and 9 lie within 2 m of 9
    CHECK(last == Approx(8.0));

    // a stationary agent keeps every sample in the window
    TrailingAverage st(0.5);
    st.push(0.0, 1.0);
    st.push(0.0, 2.0);
    CHECK(st.push(0.0, 3.0) == Approx(2.0));
    CHECK(st.push(10.0, 7.0) == 7.0);
}

TEST_CASE("reflective correlation", "[large_scale]")
{
    const std::vector<double> x{1.0, 2.0, -3.0};
    CHECK(reflective_correlation(x, x) == Approx(1.0));
    const std::vector<double> a{1, 1}, b{1, -1}, z{0, 0};
    CHECK(reflective_correlation(a, b) == Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(reflective_correlation(a, z), std::invalid_argument);
    // mean is not removed
    const std::vector<double> p{1, 2}, q{2, 1};
    CHECK(reflective_correlation(p, q) == Approx(0.8));

    Eigen::MatrixXd C(2, 2);
    C << 1, 0.5, 0.5, 1;
    const auto traj = line(2000.0, 2.0, 40.0);
    const auto X = lsf_run(17, traj, 2, LinkState::OLoS, C);
    std::vector<double> r0(X.row(0).data(), X.row(0).data() + X.cols());
    Eigen::VectorXd r1v = X.row(1).transpose();
    Eigen::VectorXd r0v = X.row(0).transpose();
    CHECK(reflective_correlation(std::vector<double>(r0v.data(), r0v.data() + r0v.size()),
                                 std::vector<double>(r1v.data(), r1v.data() + r1v.size())) ==
          Approx(0.5).margin(0.1));
}

TEST_CASE("log-normal fit", "[large_scale]")
{
    const std::vector<double> c(50, -1.5);
    const auto f = fit_lognormal(c);
    CHECK(f.mean_db == -1.5);
    CHECK(f.sigma_db == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(fit_lognormal(std::vector<double>{1.0}), std::invalid_argument);

    Rng rng(2);
    for (auto [mu, sd] : {std::pair{0.08, 3.25}, std::pair{0.27, 2.13}})
    {
        std::vector<double> v(1000000);
        for (auto &x : v)
            x = mu + sd * standard_normal(rng);
        const auto g = fit_lognormal(v);
        CHECK(g.mean_db == Approx(mu).margin(0.02));
        CHECK(g.sigma_db == Approx(sd).margin(0.02));
    }
}

TEST_CASE("path gain estimation", "[large_scale]")
{
    const auto los = PathGainModel::los();
    std::vector<double> d, y;
    for (double x = 4.0; x <= 30.0; x += 0.01)
    {
        d.push_back(x);
        y.push_back(path_gain(x, los));
    }
    auto fit = estimate_path_gain(y, d);
    CHECK(fit.intercept_db == Approx(-44.24).margin(0.01));
    CHECK(fit.exponent == Approx(0.86).margin(0.001));
    // fixed point
    std::vector<double> y2;
    for (double x : d)
        y2.push_back(path_gain(x, fit));
    const auto again = estimate_path_gain(y2, d);
    CHECK(again.intercept_db == Approx(fit.intercept_db).margin(1e-9));
    CHECK(again.exponent == Approx(fit.exponent).margin(1e-9));

    const std::vector<double> flat(d.size(), -60.0);
    CHECK(estimate_path_gain(flat, d).exponent == Approx(0.0).margin(1e-9));

    Rng rng(8);
    std::uniform_real_distribution<double> U(4.0, 30.0);
    std::vector<double> dn, yn;
    for (int i = 0; i < 100000; ++i)
    {
        dn.push_back(U(rng));
        yn.push_back(path_gain(dn.back(), PathGainModel::olos()) + 3.25 * standard_normal(rng));
    }
    fit = estimate_path_gain(yn, dn);
    CHECK(fit.intercept_db == Approx(-48.78).margin(0.3));
    CHECK(fit.exponent == Approx(0.95).margin(0.05));

    const std::vector<double> near{1.0, 2.0}, g{-40.0, -42.0};
    CHECK_THROWS_AS(estimate_path_gain(g, near), std::invalid_argument);
    const std::vector<double> zero{0.0, 5.0, 6.0}, g3{-40, -50, -51};
    CHECK_THROWS_AS(estimate_path_gain(g3, zero, 0.0), std::invalid_argument);
}

TEST_CASE("binned path gain estimation", "[large_scale]")
{
    const auto los = PathGainModel::los();
    std::vector<double> d, y;
    for (int i = 0; i < 20000; ++i)
    {
        d.push_back(4.0 * std::pow(30.0 / 4.0, i / 19999.0));
        y.push_back(path_gain(d.back(), los));
    }
    const auto a = estimate_path_gain(y, d), b = estimate_path_gain_binned(y, d);
    CHECK(b.intercept_db == Approx(a.intercept_db).margin(0.01));
    CHECK(b.exponent == Approx(a.exponent).margin(0.001));

    // heavily skewed towards short distances
    Rng rng(3);
    std::vector<double> ds, ys, yn;
    for (int i = 0; i < 50000; ++i)
    {
        const double u = uniform01(rng);
        ds.push_back(4.0 + 26.0 * u * u * u * u);
        ys.push_back(path_gain(ds.back(), los));
        yn.push_back(ys.back() + 3.0 * standard_normal(rng) + (ds.back() > 20 ? 1.5 : 0.0));
    }
    const auto c = estimate_path_gain_binned(ys, ds);
    CHECK(c.intercept_db == Approx(-44.24).margin(0.01));
    CHECK(c.exponent == Approx(0.86).margin(0.001));
    const auto un = estimate_path_gain(yn, ds), bn = estimate_path_gain_binned(yn, ds);
    CHECK(std::abs(un.intercept_db - bn.intercept_db) > 1e-3);

    const std::vector<double> one_bin{5.0, 5.0, 5.0}, v3{-50, -51, -49};
    CHECK_THROWS_AS(estimate_path_gain_binned(v3, one_bin), std::invalid_argument);
}

TEST_CASE("LSF extraction", "[large_scale]")
{
    const auto traj = line(60.0, 1.0, 200.0);
    const auto los = PathGainModel::los();
    std::vector<double> dist, power;
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
        dist.push_back(5.0 + 0.2 * traj.travelled(k));
        power.push_back(path_gain(dist.back(), los) + 1.7);
    }
    for (double v : extract_lsf(power, dist, los, traj.travelled(), 0.8))
        REQUIRE(v == Approx(1.7).margin(1e-9));

    Rng rng(4);
    std::vector<double> noisy(power.size());
    for (std::size_t k = 0; k < power.size(); ++k)
        noisy[k] = path_gain(dist[k], los) + standard_normal(rng);
    const auto sm = extract_lsf(noisy, dist, los, traj.travelled(), 0.8);
    // 0.8 m at 200 snapshots per metre averages 161 samples
    CHECK(fit_lognormal(sm).sigma_db == Approx(1.0 / std::sqrt(161.0)).epsilon(0.2));

    CHECK_THROWS_AS(extract_lsf(std::vector<double>{}, std::vector<double>{}, los, std::vector<double>{}, 0.8),
                    std::invalid_argument);

    // ground-truth LSF plus fast fading on the tone-averaged power
    const auto X = lsf_run(6, traj, 1, LinkState::LoS, Eigen::MatrixXd::Identity(1, 1));
    std::vector<double> measured(traj.size()), truth(traj.size());
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
        double p = 0.0;
        for (int f = 0; f < 20; ++f)
            p += expo(rng) / 20.0;
        truth[k] = X(0, static_cast<Eigen::Index>(k));
        measured[k] = path_gain(dist[k], los) + truth[k] + 10.0 * std::log10(p);
    }
    const auto est = extract_lsf(measured, dist, los, traj.travelled(), 0.8);
    const auto ref = moving_average_by_distance(truth, traj.travelled(), 0.8);
    double se = 0.0, bias = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k)
        bias += est[k] - ref[k];
    bias /= static_cast<double>(est.size());
    for (std::size_t k = 0; k < est.size(); ++k)
        se += (est[k] - ref[k] - bias) * (est[k] - ref[k] - bias);
    CHECK(std::sqrt(se / static_cast<double>(est.size())) < 0.5);
}

TEST_CASE("moving average respects segment boundaries", "[large_scale]")
{
    const std::vector<double> v{1, 1, 1, 5, 5, 5}, s{0, 1, 2, 3, 4, 5};
    const std::vector<int> seg{0, 0, 0, 1, 1, 1};
    const auto out = moving_average_by_distance(v, s, 10.0, seg);
    CHECK(out[2] == 1.0);
    CHECK(out[3] == 5.0);
    const auto mixed = moving_average_by_distance(v, s, 2.0);
    CHECK(mixed[2] == Approx(7.0 / 3.0));
}
