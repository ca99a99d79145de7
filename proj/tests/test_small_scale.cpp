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

#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace dmimo;
using Catch::Approx;

namespace
{
double ks_distance(std::vector<double> x, const std::function<double(double)> &cdf)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double F = cdf(x[i]);
        d = std::max({d, std::abs(F - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - F)});
    }
    return d;
}

AnchorFading make_fading(std::uint64_t seed, std::size_t n_io, double ds_s)
{
    Rng rng(seed);
    AnchorFading f;
    f.ios = place_interacting_objects(rng, Box::industrial_hall(), n_io, ds_s);
    f.direct_phase0 = kTwoPi * uniform01(rng);
    return f;
}
} // namespace

TEST_CASE("Rice law", "[small_scale]")
{
    for (const auto m : {RiceModel::los(), RiceModel::olos(), RiceModel{0.0, 1.0}, RiceModel{3.0, 0.2}})
    {
        const double area =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double x) { return rice_pdf(x, m); },
                                                                           0.0, 20.0, 15, 1e-13);
        CHECK(area == Approx(1.0).epsilon(1e-8));
        for (double x : {0.0, 0.1, 0.5, 0.84, 1.2, 2.5})
            CHECK(rice_cdf(x, m) == Approx(oracle::rice_cdf(x, m.nu, m.sigma)).margin(1e-9));
    }
    CHECK(RiceModel::los().k_factor() == Approx(1.4694).epsilon(1e-4));
    CHECK(RiceModel::olos().k_factor() == Approx(0.7446).epsilon(1e-4));

    // K = 0 is Rayleigh
    const RiceModel ray{0.0, 0.7};
    for (double x : {0.2, 0.9, 1.7})
        CHECK(rice_cdf(x, ray) == Approx(1.0 - std::exp(-x * x / (2 * 0.49))).margin(1e-12));

    const auto m = RiceModel::from_k(2.5, 3.0);
    CHECK(m.k_factor() == Approx(2.5));
    CHECK(m.mean_power() == Approx(3.0));
    CHECK_THROWS_AS(RiceModel::from_k(-1.0), std::invalid_argument);
}

TEST_CASE("log Bessel I0", "[small_scale]")
{
    for (double x : {0.0, 1e-3, 0.5, 3.0, 20.0, 200.0})
        CHECK(log_bessel_i0(x) == Approx(std::log(std::cyl_bessel_i(0.0, x))).epsilon(1e-12));
    const double big = 1e5;
    CHECK(log_bessel_i0(big) == Approx(big - 0.5 * std::log(kTwoPi * big)).epsilon(1e-9));
    CHECK(std::isfinite(log_bessel_i0(1e8)));
}

TEST_CASE("Rice sampler matches the CDF", "[small_scale]")
{
    Rng rng(21);
    for (const auto m : {RiceModel::los(), RiceModel::olos()})
    {
        std::vector<double> x(200000);
        double p = 0.0;
        for (auto &v : x)
        {
            v = rice_sample(rng, m);
            p += v * v;
        }
        CHECK(ks_distance(x, [&](double r) { return oracle::rice_cdf(r, m.nu, m.sigma); }) < 0.005);
        CHECK(p / static_cast<double>(x.size()) == Approx(m.mean_power()).epsilon(0.01));

        const auto fit = fit_rice(x);
        CHECK(fit.k == Approx(m.k_factor()).epsilon(0.05));
        CHECK(fit.k_moment == Approx(m.k_factor()).epsilon(0.08));
        CHECK(fit.model.nu == Approx(m.nu).epsilon(0.02));
        CHECK(fit.model.sigma == Approx(m.sigma).epsilon(0.02));
    }
}

TEST_CASE("Rice fit edge cases", "[small_scale]")
{
    Rng rng(22);
    std::vector<double> ray(100000);
    for (auto &v : ray)
        v = rice_sample(rng, RiceModel{0.0, 1.0});
    CHECK(fit_rice(ray).k < 0.05);

    std::vector<double> constant(500, 1.3);
    const auto c = fit_rice(constant);
    CHECK(c.k >= 1e3);
    CHECK(c.model.mean_power() == Approx(1.69).epsilon(1e-6));

    // sparse outliers push the moment estimate to zero and give the
    // likelihood a spurious mode there; the bulk mode is higher
    std::vector<double> tail(100000);
    for (auto &v : tail)
        v = rice_sample(rng, RiceModel::los());
    for (std::size_t i = 0; i < tail.size(); i += 200)
        tail[i] = 4.0;
    const auto t = fit_rice(tail);
    CHECK(t.k_moment == 0.0);
    CHECK(t.k > 0.5);

    CHECK_THROWS_AS(fit_rice(std::vector<double>(50, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(fit_rice(std::vector<double>(500, 0.0)), std::invalid_argument);
    std::vector<double> neg(500, 1.0);
    neg[10] = -1.0;
    CHECK_THROWS_AS(fit_rice(neg), std::invalid_argument);
    neg[10] = std::nan("");
    CHECK_THROWS_AS(fit_rice(neg), std::invalid_argument);
}

TEST_CASE("frequency response synthesis", "[small_scale]")
{
    const auto dep = Deployment::industrial_hall();
    const auto fading = make_fading(3, 30, 47e-9);
    const Vec3 anchor = dep.anchors[0];
    const Vec3 p(12.3, 5.4, 1.0);

    const auto a = synth_frequency_response(p, anchor, fading, 1.47, dep);
    const auto b = synth_frequency_response(p, anchor, fading, 1.47, dep);
    REQUIRE(a.size() == dep.num_tones);
    CHECK(a == b);

    // direct path only: unit magnitude, phase slope set by the path length
    const auto los = synth_frequency_response(p, anchor, fading, std::numeric_limits<double>::infinity(), dep);
    const double d = (p - anchor).norm();
    for (std::size_t n = 0; n < los.size(); ++n)
        REQUIRE(std::abs(los[n]) == Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 1; n < los.size(); ++n)
    {
        const double dphi = std::arg(los[n] * std::conj(los[n - 1]));
        REQUIRE(dphi == Approx(std::remainder(-kTwoPi * dep.tone_spacing_hz * d / kSpeedOfLight, kTwoPi))
                            .margin(1e-9));
    }

    std::vector<std::complex<double>> wrong(dep.num_tones - 1);
    CHECK_THROWS_AS(synth_frequency_response(p, anchor, fading, 1.0, dep, wrong), std::invalid_argument);
    CHECK_THROWS_AS(synth_frequency_response(p, anchor, fading, -1.0, dep), std::invalid_argument);
    CHECK_THROWS_AS(synth_frequency_response(p, anchor, AnchorFading{}, 1.0, dep), std::invalid_argument);
}

TEST_CASE("synthesized amplitudes follow the Rice law", "[small_scale]")
{
    const auto dep = Deployment::industrial_hall();
    const auto fading = make_fading(9, 200, 47e-9);
    const auto model = RiceModel::from_k(RiceModel::los().k_factor(), 1.0);
    Rng rng(10);
    std::vector<double> amp;
    double power = 0.0;
    for (int i = 0; i < 4000; ++i)
    {
        const Vec3 p(4 + 22 * uniform01(rng), 2 + 8 * uniform01(rng), 1.0);
        const auto h = synth_frequency_response(p, dep.anchors[3], fading, model.k_factor(), dep);
        for (std::size_t n = 0; n < h.size(); n += 97)
        {
            amp.push_back(std::abs(h[n]));
            power += std::norm(h[n]);
        }
    }
    CHECK(power / static_cast<double>(amp.size()) == Approx(1.0).epsilon(0.03));
    CHECK(ks_distance(amp, [&](double r) { return oracle::rice_cdf(r, model.nu, model.sigma); }) < 0.03);
    CHECK(fit_rice(amp).k == Approx(model.k_factor()).epsilon(0.1));
}

TEST_CASE("K-factor filter", "[small_scale]")
{
    CHECK(filter_k_factor(2.0, 0.5, 0.0, 0.8) == 2.0);
    CHECK(filter_k_factor(2.0, 0.5, std::numeric_limits<double>::infinity(), 0.8) == 0.5);
    CHECK(filter_k_factor(2.0, 0.5, 1.0, 0.8) == Approx(0.5 + 1.5 * std::exp(-0.8)));
    double prev = 2.0;
    for (double d = 0.1; d < 10; d += 0.1)
    {
        const double k = filter_k_factor(2.0, 0.5, d, 0.8);
        REQUIRE(k < prev);
        REQUIRE(k > 0.5);
        prev = k;
    }
    CHECK_THROWS_AS(filter_k_factor(-1.0, 0.5, 1.0, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(filter_k_factor(1.0, 0.5, -1.0, 0.8), std::invalid_argument);
}

TEST_CASE("SSF extraction", "[small_scale]")
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(4, 50, 3.0);
    auto s = extract_ssf(A, 10);
    CHECK(s.rows() == 4);
    CHECK(s.cols() == 41);
    CHECK((s.array() - 1.0).abs().maxCoeff() < 1e-12);

    // a smooth per-tone gain is removed, fast variation is kept
    Eigen::MatrixXd B(2, 400);
    for (int k = 0; k < 400; ++k)
    {
        const double slow = 1.0 + 0.5 * (k / 400.0), fast = (k % 2) ? 1.2 : 0.8;
        B(0, k) = slow * fast;
        B(1, k) = 7.0 * fast;
    }
    s = extract_ssf(B, 20);
    for (Eigen::Index j = 0; j < s.cols(); ++j)
    {
        REQUIRE(s(0, j) == Approx(s(1, j)).epsilon(0.01));
        REQUIRE(s(1, j) == Approx(((j + 10) % 2) ? 1.2 : 0.8).epsilon(1e-9));
    }

    std::vector<double> travelled(400);
    for (int k = 0; k < 400; ++k)
        travelled[static_cast<std::size_t>(k)] = 0.01 * k;
    const auto sd = extract_ssf_by_distance(B, travelled, 0.2);
    CHECK(sd.cols() == 400);
    CHECK(sd(1, 200) == Approx(0.8).epsilon(0.01));

    CHECK_THROWS_AS(extract_ssf(A, 0), std::invalid_argument);
    CHECK_THROWS_AS(extract_ssf(A, 51), std::invalid_argument);
    CHECK_THROWS_AS(extract_ssf(Eigen::MatrixXd::Zero(2, 20), 5), std::invalid_argument);
    CHECK_THROWS_AS(extract_ssf_by_distance(B, std::vector<double>(3, 0.0), 0.2), std::invalid_argument);
}
