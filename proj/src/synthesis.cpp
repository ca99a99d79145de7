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

#include "dmimo/synthesis.hpp"

#include "dmimo/analysis.hpp"
#include "dmimo/dpss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace dmimo
{

void ModelConfig::validate(std::size_t num_anchors) const
{
    shadowing.validate();
    for (int s = 0; s < 2; ++s)
    {
        if (!(rice[s].nu >= 0.0) || !(rice[s].sigma > 0.0))
            throw std::invalid_argument("rice parameters must satisfy nu >= 0, sigma > 0");
        if (!(delay_spread_s[s] > 0.0))
            throw std::invalid_argument("delay spreads must be positive");
        if (!(covariance.spread[s] >= 0.0) || std::abs(covariance.mean[s]) > 1.0)
            throw std::invalid_argument("covariance distribution parameters out of range");
    }
    if (!(covariance.truncation > 0.0 && covariance.truncation < 1.0))
        throw std::invalid_argument("covariance truncation must lie in (0, 1)");
    if (!(rate_low > 0.0) || rate_high < rate_low)
        throw std::invalid_argument("transition rate bounds must satisfy 0 < low <= high");
    if (fixed_rate && !(*fixed_rate >= 0.0))
        throw std::invalid_argument("fixed transition rate must be non-negative");
    if (n_io < 2)
        throw std::invalid_argument("at least two interacting objects per anchor are required");
    if (!(ds_log_sigma >= 0.0))
        throw std::invalid_argument("ds_log_sigma must be non-negative");
    if (!(lsf_window_m >= 0.0))
        throw std::invalid_argument("lsf_window_m must be non-negative");
    if (!(lsf_sigma_scale >= 0.0))
        throw std::invalid_argument("lsf_sigma_scale must be non-negative");
    if (!((room.hi.array() > room.lo.array()).all()))
        throw std::invalid_argument("room box must have positive extent");
    if (initial_states && initial_states->size() != num_anchors)
        throw std::invalid_argument("initial_states has " + std::to_string(initial_states->size()) +
                                    " entries for " + std::to_string(num_anchors) + " anchors");
    if (fixed_covariance)
    {
        const auto &C = *fixed_covariance;
        if (static_cast<std::size_t>(C.rows()) != num_anchors || C.cols() != C.rows())
            throw std::invalid_argument("fixed covariance must be M x M");
        if (!C.isApprox(C.transpose(), 1e-12) || (C.diagonal().array() - 1.0).abs().maxCoeff() > 1e-9)
            throw std::invalid_argument("fixed covariance must be symmetric with unit diagonal");
    }
}

// ------------------------------------------------------------------------

Eigen::MatrixXcd ChannelTensor::anchor_window(std::size_t m, std::size_t k0, std::size_t n) const
{
    if (m >= M || k0 + n > T)
        throw std::out_of_range("ChannelTensor: window outside the tensor");
    Eigen::MatrixXcd H(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto *row = &data[index(m, k0 + k, 0)];
        for (std::size_t f = 0; f < F; ++f)
            H(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = std::complex<double>(row[f]);
    }
    return H;
}

Eigen::MatrixXcd ChannelTensor::anchor_matrix(std::size_t m) const
{
    return anchor_window(m, 0, T);
}

Eigen::MatrixXcd ChannelTensor::snapshot_matrix(std::size_t k) const
{
    if (k >= T)
        throw std::out_of_range("ChannelTensor: snapshot outside the tensor");
    Eigen::MatrixXcd H(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t f = 0; f < F; ++f)
            H(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(m)) = std::complex<double>(at(m, k, f));
    return H;
}

Eigen::VectorXd ChannelTensor::avg_power(std::size_t m) const
{
    if (m >= M)
        throw std::out_of_range("ChannelTensor: anchor outside the tensor");
    Eigen::VectorXd p(static_cast<Eigen::Index>(T));
    for (std::size_t k = 0; k < T; ++k)
    {
        double s = 0.0;
        const auto *row = &data[index(m, k, 0)];
        for (std::size_t f = 0; f < F; ++f)
            s += static_cast<double>(std::norm(row[f]));
        p[static_cast<Eigen::Index>(k)] = s / static_cast<double>(F);
    }
    return p;
}

// ------------------------------------------------------------------------

double geometric_delay_spread(const Deployment &dep, std::size_t anchor, const AnchorFading &fading, double k_factor,
                              const Trajectory &trajectory, std::size_t max_points)
{
    const Vec3 &a = dep.anchors.at(anchor);
    const std::size_t T = trajectory.size();
    const std::size_t n = std::min(T, std::max<std::size_t>(max_points, 1));
    const double p_dir = std::isinf(k_factor) ? 1.0 : k_factor / (k_factor + 1.0);
    const double p_dif = 1.0 - p_dir;
    std::vector<double> spreads, pw, tau;
    spreads.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t k = n == 1 ? 0 : i * (T - 1) / (n - 1);
        const Vec3 &x = trajectory.position(k);
        pw.clear();
        tau.clear();
        pw.push_back(p_dir);
        tau.push_back((a - x).norm() / kSpeedOfLight);
        for (const auto &io : fading.ios)
        {
            pw.push_back(p_dif * io.weight * io.weight);
            tau.push_back(((io.position - x).norm() + (a - io.position).norm()) / kSpeedOfLight + io.excess_delay_s);
        }
        spreads.push_back(rms_delay_spread(pw, tau));
    }
    return median(spreads);
}

namespace
{
// |sum_f g_f exp(j 2 pi f x / N)|^2 averaged over the frequency tapers,
// tabulated over one period x in [0, N).
class DelayKernel
{
  public:
    DelayKernel(std::size_t n, const TaperConfig &tapers) : n_(n), table_(n * kOversample + 1, 0.0)
    {
        const DpssSet g = dpss(n, tapers.freq_nw, tapers.freq_tapers);
        const auto I = g.sequences.cols();
        for (std::size_t t = 0; t < table_.size(); ++t)
        {
            const double x = static_cast<double>(t) / kOversample;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < I; ++i)
            {
                std::complex<double> s = 0.0;
                for (std::size_t f = 0; f < n; ++f)
                    s += g.sequences(static_cast<Eigen::Index>(f), i) *
                         std::polar(1.0, kTwoPi * static_cast<double>(f) * x / static_cast<double>(n));
                acc += std::norm(s);
            }
            table_[t] = acc / static_cast<double>(I);
        }
    }

    double operator()(double x) const
    {
        const double nn = static_cast<double>(n_);
        x = std::fmod(x, nn);
        if (x < 0.0)
            x += nn;
        const double u = x * kOversample;
        const auto i = std::min(static_cast<std::size_t>(u), table_.size() - 2);
        const double w = u - static_cast<double>(i);
        return (1.0 - w) * table_[i] + w * table_[i + 1];
    }

  private:
    static constexpr std::size_t kOversample = 32;
    std::size_t n_;
    std::vector<double> table_;
};

double band_limited_spread(const Deployment &dep, const DelayKernel &kernel, std::size_t anchor,
                           const AnchorFading &fading, double k_factor, const Trajectory &trajectory,
                           std::size_t max_points)
{
    const Vec3 &a = dep.anchors.at(anchor);
    const std::size_t T = trajectory.size();
    const std::size_t N = dep.num_tones;
    const double bin = dep.delay_bin_s();
    const std::size_t n = std::min(T, std::max<std::size_t>(max_points, 1));
    const double p_dir = std::isinf(k_factor) ? 1.0 : k_factor / (k_factor + 1.0);
    const double p_dif = 1.0 - p_dir;
    std::vector<double> spreads;
    spreads.reserve(n);
    Eigen::VectorXd prof(static_cast<Eigen::Index>(N));
    auto add = [&](double p, double tau) {
        const double x0 = tau / bin;
        for (std::size_t b = 0; b < N; ++b)
            prof[static_cast<Eigen::Index>(b)] += p * kernel(static_cast<double>(b) - x0);
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t k = n == 1 ? 0 : i * (T - 1) / (n - 1);
        const Vec3 &x = trajectory.position(k);
        prof.setZero();
        add(p_dir, (a - x).norm() / kSpeedOfLight);
        if (p_dif > 0.0)
            for (const auto &io : fading.ios)
                add(p_dif * io.weight * io.weight,
                    ((io.position - x).norm() + (a - io.position).norm()) / kSpeedOfLight + io.excess_delay_s);
        spreads.push_back(rms_delay_spread(prof, bin, DelaySpreadOptions{}));
    }
    return median(spreads);
}

AnchorFading scaled(const AnchorFading &base, double s)
{
    AnchorFading f = base;
    for (auto &io : f.ios)
        io.excess_delay_s *= s;
    return f;
}

// Excess-delay scale that brings the per-state median spreads closest to
// their targets in the log domain.
double calibrate_scale(const Deployment &dep, const DelayKernel &kernel, std::size_t m, const AnchorFading &base,
                       const ModelConfig &cfg, const std::array<double, 2> &targets, const Trajectory &traj)
{
    auto cost = [&](double log_s) {
        const AnchorFading f = scaled(base, std::exp(log_s));
        double c = 0.0;
        for (LinkState s : {LinkState::LoS, LinkState::OLoS})
        {
            const double ds = band_limited_spread(dep, kernel, m, f, cfg.target_k(s), traj, 32);
            const double r = std::log(std::max(ds, 1e-15) / targets[state_index(s)]);
            c += r * r;
        }
        return c;
    };
    double lo = std::log(0.02), hi = std::log(50.0);
    // coarse scan, then golden-section refinement
    const int n_scan = 40;
    int best = 0;
    double best_c = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scan; ++i)
    {
        const double c = cost(lo + (hi - lo) * i / n_scan);
        if (c < best_c)
        {
            best_c = c;
            best = i;
        }
    }
    const double step = (hi - lo) / n_scan;
    double a = lo + step * std::max(best - 1, 0), b = lo + step * std::min(best + 1, n_scan);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 60 && b - a > 1e-6; ++it)
    {
        if (f1 < f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    return std::exp(0.5 * (a + b));
}

double lsf_window(const ModelConfig &cfg, const Deployment &dep)
{
    return cfg.lsf_window_m > 0.0 ? cfg.lsf_window_m : 10.0 * dep.wavelength();
}

ShadowingModel process_shadowing(const ModelConfig &cfg, const Deployment &dep)
{
    ShadowingModel s = cfg.shadowing;
    if (cfg.compensate_lsf_window)
        s = compensate_smoothing(s, lsf_window(cfg, dep), cfg.smooth_lsf ? 2 : 1);
    const double scale = cfg.lsf_enabled ? cfg.lsf_sigma_scale : 0.0;
    for (auto &x : s.sigma_db)
        x *= scale;
    return s;
}
ShadowingModel unit_variance(ShadowingModel s)
{
    s.sigma_db = {1.0, 1.0};
    return s;
}
} // namespace

double band_limited_delay_spread(const Deployment &dep, std::size_t anchor, const AnchorFading &fading,
                                 double k_factor, const Trajectory &trajectory, std::size_t max_points)
{
    const DelayKernel kernel(dep.num_tones, TaperConfig{});
    return band_limited_spread(dep, kernel, anchor, fading, k_factor, trajectory, max_points);
}

InitialDraws initialize(const ModelConfig &cfg, const Deployment &dep, const Trajectory &traj)
{
    dep.validate();
    const std::size_t M = dep.num_anchors();
    cfg.validate(M);

    InitialDraws init;
    if (cfg.fixed_covariance)
        init.c_los = init.c_olos = repair_covariance(*cfg.fixed_covariance);
    else
    {
        Rng r_los = make_rng(cfg.seed, Stream::Covariance, 0);
        Rng r_olos = make_rng(cfg.seed, Stream::Covariance, 1);
        init.c_los = draw_covariance(r_los, M, LinkState::LoS, cfg.covariance);
        init.c_olos = draw_covariance(r_olos, M, LinkState::OLoS, cfg.covariance);
    }

    if (cfg.forced_state)
        init.transitions = fixed_transition_model(M, 0.0);
    else if (cfg.fixed_rate)
        init.transitions = fixed_transition_model(M, *cfg.fixed_rate);
    else
    {
        Rng r = make_rng(cfg.seed, Stream::TransitionRates);
        init.transitions = draw_transition_model(r, M, cfg.rate_low, cfg.rate_high);
    }

    if (cfg.forced_state)
        init.initial_states.assign(M, *cfg.forced_state);
    else if (cfg.initial_states)
        init.initial_states = *cfg.initial_states;
    else
    {
        Rng r = make_rng(cfg.seed, Stream::InitialStates);
        init.initial_states = draw_initial_states(r, M);
    }

    init.fading.resize(M);
    init.delay_scale.assign(M, 1.0);
    std::optional<DelayKernel> kernel;
    if (cfg.calibrate_delay_spread && !cfg.direct_path_only)
        kernel.emplace(dep.num_tones, TaperConfig{});
    for (std::size_t m = 0; m < M; ++m)
    {
        std::array<double, 2> targets = cfg.delay_spread_s;
        if (cfg.ds_log_sigma > 0.0)
        {
            Rng r = make_rng(cfg.seed, Stream::DelaySpread, m);
            const double factor = std::exp(cfg.ds_log_sigma * standard_normal(r));
            for (auto &t : targets)
                t *= factor;
        }
        Rng r_io = make_rng(cfg.seed, Stream::InteractingObjects, m);
        AnchorFading base;
        base.ios = place_interacting_objects(r_io, cfg.room, cfg.n_io, targets[state_index(LinkState::LoS)]);
        Rng r_ph = make_rng(cfg.seed, Stream::Phases, m);
        base.direct_phase0 = std::uniform_real_distribution<double>(0.0, kTwoPi)(r_ph);
        if (kernel)
            init.delay_scale[m] = calibrate_scale(dep, *kernel, m, base, cfg, targets, traj);
        init.fading[m] = scaled(base, init.delay_scale[m]);
    }
    return init;
}

// ------------------------------------------------------------------------

Simulation::Simulation(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory)
    : cfg_(config), dep_(deployment), traj_(trajectory), init_(initialize(config, deployment, trajectory)),
      shadowing_(process_shadowing(config, deployment)),
      lsf_proc_(derive_seed(config.seed, static_cast<std::uint64_t>(Stream::Shadowing)),
                config.lsf_scale_output ? unit_variance(shadowing_) : shadowing_,
           init_.c_los, init_.c_olos, config.covariance_selection),
      states_(init_.initial_states)
{
    if (!cfg_.forced_state)
        state_proc_.emplace(derive_seed(cfg_.seed, static_cast<std::uint64_t>(Stream::Transitions)),
                            init_.transitions, init_.initial_states);
    const std::size_t M = dep_.num_anchors();
    kfac_.resize(M);
    for (std::size_t m = 0; m < M; ++m)
        kfac_[m] = cfg_.target_k(states_[m]);
    if (cfg_.smooth_lsf)
        lsf_smoother_.assign(M, TrailingAverage(lsf_window(cfg_, dep_)));
    lsf_.assign(M, 0.0);
    pg_.assign(M, 0.0);
    dist_.assign(M, 0.0);
    scratch_.resize(dep_.num_tones);
}

void Simulation::step(std::span<std::complex<float>> out)
{
    const std::size_t M = dep_.num_anchors(), F = dep_.num_tones;
    if (snap_ >= traj_.size())
        throw std::out_of_range("Simulation::step: trajectory exhausted");
    if (out.size() != M * F)
        throw std::invalid_argument("Simulation::step: output block must hold M x F values");

    const Vec3 &agent = traj_.position(snap_);
    if (snap_ == 0)
        lsf_proc_.start(states_);
    else
    {
        const double dd = traj_.step_distance(snap_);
        if (state_proc_)
        {
            state_proc_->advance(dd);
            states_ = state_proc_->states();
        }
        lsf_proc_.advance(dd, states_);
        for (std::size_t m = 0; m < M; ++m)
            kfac_[m] = filter_k_factor(kfac_[m], cfg_.target_k(states_[m]), dd, cfg_.shadowing.k(states_[m]));
    }

    for (std::size_t m = 0; m < M; ++m)
    {
        const double v = cfg_.smooth_lsf ? lsf_smoother_[m].push(traj_.travelled(snap_), lsf_proc_.value(m))
                                         : lsf_proc_.value(m);
        lsf_[m] = cfg_.lsf_scale_output ? shadowing_.sigma(states_[m]) * v : v;
    }

    for (std::size_t m = 0; m < M; ++m)
    {
        const double d = (dep_.anchors[m] - agent).norm();
        dist_[m] = d;
        bool oor = false;
        const auto &model = cfg_.path_gain[states_[m]];
        pg_[m] = path_gain(d > 0.0 ? d : model.d0, model, &oor);
        out_of_range_ += oor ? 1 : 0;
        const double amp = std::pow(10.0, (pg_[m] + lsf_[m]) / 20.0);
        const double K = cfg_.direct_path_only ? std::numeric_limits<double>::infinity() : kfac_[m];
        synth_frequency_response(agent, dep_.anchors[m], init_.fading[m], K, dep_, scratch_);
        auto *dst = out.data() + m * F;
        for (std::size_t f = 0; f < F; ++f)
            dst[f] = std::complex<float>(scratch_[f] * amp);
    }
    ++snap_;
}

void simulate(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory,
              const std::function<void(std::size_t, std::span<const std::complex<float>>)> &sink,
              GroundTruth *truth)
{
    Simulation sim(config, deployment, trajectory);
    const std::size_t M = deployment.num_anchors(), T = trajectory.size();
    if (truth)
    {
        truth->states = LinkStateTrace(M, T);
        truth->lsf_db.resize(M, T);
        truth->k_factor.resize(M, T);
        truth->pg_db.resize(M, T);
        truth->distance_m.resize(M, T);
    }
    std::vector<std::complex<float>> block(M * deployment.num_tones);
    for (std::size_t k = 0; k < T; ++k)
    {
        sim.step(block);
        if (truth)
            for (std::size_t m = 0; m < M; ++m)
            {
                const auto r = static_cast<Eigen::Index>(m), c = static_cast<Eigen::Index>(k);
                truth->states.at(m, k) = sim.state(m);
                truth->lsf_db(r, c) = sim.lsf_db(m);
                truth->k_factor(r, c) = sim.k_factor(m);
                truth->pg_db(r, c) = sim.pg_db(m);
                truth->distance_m(r, c) = sim.distance_m(m);
            }
        sink(k, block);
    }
    if (truth)
        truth->out_of_range = sim.out_of_range();
}

Generated generate(const ModelConfig &config, const Deployment &deployment, const Trajectory &trajectory)
{
    Generated g;
    const std::size_t M = deployment.num_anchors(), T = trajectory.size(), F = deployment.num_tones;
    g.tensor = ChannelTensor(M, T, F);
    simulate(
        config, deployment, trajectory,
        [&](std::size_t k, std::span<const std::complex<float>> block) {
            for (std::size_t m = 0; m < M; ++m)
                std::copy_n(block.data() + m * F, F, &g.tensor.at(m, k, 0));
        },
        &g.truth);
    g.initial = initialize(config, deployment, trajectory);
    return g;
}

// ------------------------------------------------------------------------

namespace
{
double to_db(double x)
{
    return 10.0 * std::log10(std::max(x, std::numeric_limits<double>::min()));
}
} // namespace

double HardeningSummary::single_outage_db(double p) const
{
    return quantile(single_db, p);
}

double HardeningSummary::mrt_outage_db(double p) const
{
    return quantile(mrt_db, p) - to_db(static_cast<double>(num_anchors));
}

double HardeningSummary::single_median_db() const
{
    return median(single_db);
}

double HardeningSummary::mrt_median_db() const
{
    return median(mrt_db) - to_db(static_cast<double>(num_anchors));
}

HardeningSummary hardening_summary(const ChannelTensor &t, HardeningMode mode, std::size_t local_window,
                                   std::size_t tone_stride, std::size_t snapshot_stride)
{
    if (t.M < 1 || t.T < 1 || t.F < 1)
        throw std::invalid_argument("hardening_summary: empty tensor");
    tone_stride = std::max<std::size_t>(tone_stride, 1);
    snapshot_stride = std::max<std::size_t>(snapshot_stride, 1);

    std::vector<std::vector<double>> local(t.M);
    if (mode == HardeningMode::SsfOnly)
    {
        if (t.T < local_window || local_window < 1)
            throw std::invalid_argument("hardening_summary: tensor shorter than the local-mean window");
        std::vector<double> idx(t.T);
        for (std::size_t k = 0; k < t.T; ++k)
            idx[k] = static_cast<double>(k);
        for (std::size_t m = 0; m < t.M; ++m)
        {
            const Eigen::VectorXd p = t.avg_power(m);
            local[m] = moving_average_by_distance(std::span<const double>(p.data(), t.T), idx,
                                                  static_cast<double>(local_window - 1));
        }
    }

    HardeningSummary s;
    s.num_anchors = t.M;
    for (std::size_t k = 0; k < t.T; k += snapshot_stride)
        for (std::size_t f = 0; f < t.F; f += tone_stride)
        {
            double sum = 0.0;
            for (std::size_t m = 0; m < t.M; ++m)
            {
                double g = static_cast<double>(std::norm(t.at(m, k, f)));
                if (mode == HardeningMode::SsfOnly)
                    g /= local[m][k];
                sum += g;
                s.single_db.push_back(to_db(g));
            }
            s.mrt_db.push_back(to_db(sum));
        }
    return s;
}

} // namespace dmimo
