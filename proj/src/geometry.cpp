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

#include "dmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dmimo
{

void Deployment::validate() const
{
    if (anchors.empty())
        throw std::invalid_argument("Deployment: at least one anchor is required");
    for (const auto &a : anchors)
        if (!a.allFinite())
            throw std::invalid_argument("Deployment: anchor coordinates must be finite");
    if (!(carrier_freq_hz > 0.0) || !std::isfinite(carrier_freq_hz))
        throw std::invalid_argument("Deployment: carrier frequency must be positive");
    if (num_tones < 1)
        throw std::invalid_argument("Deployment: at least one tone is required");
    if (!(tone_spacing_hz > 0.0) || !std::isfinite(tone_spacing_hz))
        throw std::invalid_argument("Deployment: tone spacing must be positive");
    if (!(snapshot_rate_hz > 0.0) || !std::isfinite(snapshot_rate_hz))
        throw std::invalid_argument("Deployment: snapshot rate must be positive");
}

Deployment Deployment::industrial_hall()
{
    Deployment d;
    const double z = 4.0;
    // Anchors 1-6 along the north wall, 7-12 back along the south wall.
    const double north[6] = {4.978, 8.974, 12.960, 16.960, 20.987, 24.961};
    const double south[6] = {27.009, 23.323, 19.065, 15.036, 11.063, 7.058};
    for (double x : north)
        d.anchors.emplace_back(x, 11.17, z);
    for (double x : south)
        d.anchors.emplace_back(x, 1.56, z);
    return d;
}

Box Box::industrial_hall()
{
    return Box{Vec3(0.6, 0.6, 0.0), Vec3(30.6, 12.6, 8.0)};
}

// ------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<Vec3> positions, double snapshot_rate_hz, double max_speed_mps)
    : positions_(std::move(positions)), snapshot_rate_hz_(snapshot_rate_hz)
{
    if (positions_.empty())
        throw std::invalid_argument("Trajectory: at least one position is required");
    if (!(snapshot_rate_hz_ > 0.0) || !std::isfinite(snapshot_rate_hz_))
        throw std::invalid_argument("Trajectory: snapshot rate must be positive");
    if (!(max_speed_mps > 0.0))
        throw std::invalid_argument("Trajectory: maximum speed must be positive");

    steps_.assign(positions_.size(), 0.0);
    travelled_.assign(positions_.size(), 0.0);
    const double max_step = max_speed_mps / snapshot_rate_hz_ * (1.0 + 1e-9);
    for (std::size_t k = 0; k < positions_.size(); ++k)
    {
        if (!positions_[k].allFinite())
            throw std::invalid_argument("Trajectory: position " + std::to_string(k) + " is not finite");
        if (k == 0)
            continue;
        const double step = (positions_[k] - positions_[k - 1]).norm();
        if (step > max_step)
            throw std::invalid_argument("Trajectory: speed at snapshot " + std::to_string(k) + " is " +
                                        std::to_string(step * snapshot_rate_hz_) + " m/s, above the limit of " +
                                        std::to_string(max_speed_mps) + " m/s");
        steps_[k] = step;
        travelled_[k] = travelled_[k - 1] + step;
    }
}

namespace
{
// Point at arc length s along a polyline with cumulative lengths `cum`.
Vec3 polyline_point(const std::vector<Vec3> &pts, const std::vector<double> &cum, double s)
{
    if (s <= 0.0)
        return pts.front();
    if (s >= cum.back())
        return pts.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
    const double seg = cum[i + 1] - cum[i];
    const double u = seg > 0.0 ? (s - cum[i]) / seg : 0.0;
    return pts[i] + u * (pts[i + 1] - pts[i]);
}
} // namespace

Trajectory Trajectory::from_waypoints(const std::vector<Vec3> &waypoints, double speed_mps, double snapshot_rate_hz,
                                      double duration_s, double max_speed_mps)
{
    if (waypoints.size() < 2)
        throw std::invalid_argument("Trajectory::from_waypoints: at least two waypoints are required");
    if (!(speed_mps > 0.0) || !(snapshot_rate_hz > 0.0))
        throw std::invalid_argument("Trajectory::from_waypoints: speed and snapshot rate must be positive");

    std::vector<double> cum(waypoints.size(), 0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        cum[i] = cum[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
    const double length = cum.back();
    if (!(length > 0.0))
        throw std::invalid_argument("Trajectory::from_waypoints: polyline has zero length");

    const double ds = speed_mps / snapshot_rate_hz;
    std::size_t n;
    if (duration_s > 0.0)
        n = static_cast<std::size_t>(std::llround(duration_s * snapshot_rate_hz));
    else
        n = static_cast<std::size_t>(std::floor(length / ds + 1e-9)) + 1;
    n = std::max<std::size_t>(n, 1);

    std::vector<Vec3> pos;
    pos.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        double s = std::fmod(static_cast<double>(k) * ds, 2.0 * length);
        if (s > length)
            s = 2.0 * length - s; // walk back along the polyline
        pos.push_back(polyline_point(waypoints, cum, s));
    }
    return Trajectory(std::move(pos), snapshot_rate_hz, max_speed_mps);
}

Trajectory Trajectory::random_waypoints(Rng &rng, const Box &area, double height_m, double speed_mps,
                                        double snapshot_rate_hz, double duration_s, double max_speed_mps)
{
    if (!(duration_s > 0.0))
        throw std::invalid_argument("Trajectory::random_waypoints: duration must be positive");
    std::uniform_real_distribution<double> ux(area.lo.x(), area.hi.x());
    std::uniform_real_distribution<double> uy(area.lo.y(), area.hi.y());

    const double needed = speed_mps * duration_s;
    std::vector<Vec3> wp{Vec3(ux(rng), uy(rng), height_m)};
    double length = 0.0;
    while (length <= needed)
    {
        Vec3 next(ux(rng), uy(rng), height_m);
        length += (next - wp.back()).norm();
        wp.push_back(next);
    }
    return from_waypoints(wp, speed_mps, snapshot_rate_hz, duration_s, max_speed_mps);
}

Trajectory Trajectory::stationary(const Vec3 &position, std::size_t n, double snapshot_rate_hz)
{
    return Trajectory(std::vector<Vec3>(std::max<std::size_t>(n, 1), position), snapshot_rate_hz);
}

namespace
{
std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Splits on commas and whitespace.
std::vector<std::string> split_fields(const std::string &line)
{
    std::string tmp = line;
    std::replace(tmp.begin(), tmp.end(), ',', ' ');
    std::istringstream is(tmp);
    std::vector<std::string> out;
    std::string f;
    while (is >> f)
        out.push_back(f);
    return out;
}

double parse_double(const std::string &s, std::size_t line_no)
{
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (const std::exception &)
    {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v))
        throw std::invalid_argument("line " + std::to_string(line_no) + ": '" + s + "' is not a finite number");
    return v;
}
} // namespace

Trajectory read_trajectory_csv(std::istream &in, double max_speed_mps)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> t;
    std::vector<Vec3> pos;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto f = split_fields(line);
        if (!header_seen)
        {
            header_seen = true;
            if (f.size() == 4 && f[0] == "t" && f[1] == "x" && f[2] == "y" && f[3] == "z")
                continue;
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected header 't,x,y,z'");
        }
        if (f.size() != 4)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                        std::to_string(f.size()));
        t.push_back(parse_double(f[0], line_no));
        pos.emplace_back(parse_double(f[1], line_no), parse_double(f[2], line_no), parse_double(f[3], line_no));
    }
    if (pos.size() < 2)
        throw std::invalid_argument("trajectory CSV needs at least two samples");

    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0))
        throw std::invalid_argument("trajectory timestamps must increase");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-6 * dt + 1e-9)
            throw std::invalid_argument("trajectory timestamps are not uniform at sample " + std::to_string(k));
    return Trajectory(std::move(pos), 1.0 / dt, max_speed_mps);
}

void write_trajectory_csv(std::ostream &out, const Trajectory &trajectory)
{
    out << "t,x,y,z\n";
    const auto old_prec = out.precision(17);
    for (std::size_t k = 0; k < trajectory.size(); ++k)
    {
        const auto &p = trajectory.position(k);
        out << static_cast<double>(k) / trajectory.snapshot_rate() << ',' << p.x() << ',' << p.y() << ',' << p.z()
            << '\n';
    }
    out.precision(old_prec);
}

PointCloud read_point_cloud(std::istream &in)
{
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto f = split_fields(line);
        if (f.empty())
            continue;
        if (f.size() != 3)
            throw std::invalid_argument("point cloud line " + std::to_string(line_no) + ": expected 3 fields, got " +
                                        std::to_string(f.size()));
        cloud.points.emplace_back(parse_double(f[0], line_no), parse_double(f[1], line_no),
                                  parse_double(f[2], line_no));
    }
    return cloud;
}

PointCloud read_point_cloud(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open point cloud " + path.string());
    return read_point_cloud(in);
}

// ------------------------------------------------------------------------
// Link geometry

double distance(std::size_t anchor_idx, const Vec3 &agent_pos, const Deployment &deployment)
{
    if (anchor_idx >= deployment.anchors.size())
        throw std::out_of_range("anchor index " + std::to_string(anchor_idx) + " out of range");
    return (deployment.anchors[anchor_idx] - agent_pos).norm();
}

double fresnel_coverage(const Vec3 &anchor_pos, const Vec3 &agent_pos, const PointCloud &cloud, double radius,
                        int grid_n)
{
    if (!(radius > 0.0))
        throw std::invalid_argument("fresnel_coverage: radius must be positive");
    if (grid_n < 8)
        throw std::invalid_argument("fresnel_coverage: grid_n must be at least 8");

    Vec3 a = anchor_pos, b = agent_pos;
    Vec3 axis = b - a;
    const double len = axis.norm();
    if (!(len > 0.0))
        throw std::invalid_argument("fresnel_coverage: anchor and agent coincide");

    // Orient the axis canonically so that both link directions produce the
    // same disc basis and the same raster.
    for (int i = 0; i < 3; ++i)
    {
        if (axis[i] == 0.0)
            continue;
        if (axis[i] < 0.0)
        {
            std::swap(a, b);
            axis = -axis;
        }
        break;
    }
    const Vec3 u = axis / len;

    // Disc basis: e1 perpendicular to the axis, built from the least-aligned unit vector.
    int k_min = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(u[i]) < std::abs(u[k_min]))
            k_min = i;
    Vec3 ref = Vec3::Zero();
    ref[k_min] = 1.0;
    const Vec3 e1 = (ref - ref.dot(u) * u).normalized();
    const Vec3 e2 = u.cross(e1);

    const std::size_t n = static_cast<std::size_t>(grid_n);
    const double cell = 2.0 * radius / static_cast<double>(n);
    std::vector<char> occupied(n * n, 0);
    const double r2 = radius * radius;

    for (const auto &p : cloud.points)
    {
        const Vec3 ap = p - a;
        const double along = ap.dot(u);
        if (!(along > 0.0 && along < len))
            continue;
        const Vec3 perp = ap - along * u;
        if (!(perp.squaredNorm() < r2))
            continue;
        const double x = perp.dot(e1), y = perp.dot(e2);
        const auto ix = static_cast<std::size_t>(std::clamp(std::floor((x + radius) / cell), 0.0, double(n - 1)));
        const auto iy = static_cast<std::size_t>(std::clamp(std::floor((y + radius) / cell), 0.0, double(n - 1)));
        occupied[iy * n + ix] = 1;
    }

    std::size_t in_disc = 0, hit = 0;
    for (std::size_t iy = 0; iy < n; ++iy)
    {
        const double cy = -radius + (static_cast<double>(iy) + 0.5) * cell;
        for (std::size_t ix = 0; ix < n; ++ix)
        {
            const double cx = -radius + (static_cast<double>(ix) + 0.5) * cell;
            if (cx * cx + cy * cy > r2)
                continue;
            ++in_disc;
            hit += occupied[iy * n + ix] ? 1 : 0;
        }
    }
    return 100.0 * static_cast<double>(hit) / static_cast<double>(in_disc);
}

LinkState classify_state(double coverage_percent)
{
    return coverage_percent <= 50.0 ? LinkState::LoS : LinkState::OLoS;
}

// ------------------------------------------------------------------------
// Interacting objects

double discrete_rms_delay_spread(std::span<const double> weights, std::span<const double> delays_s)
{
    if (weights.size() != delays_s.size())
        throw std::invalid_argument("discrete_rms_delay_spread: size mismatch");
    double p = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        const double w2 = weights[i] * weights[i];
        p += w2;
        m1 += w2 * delays_s[i];
    }
    if (!(p > 0.0))
        throw std::invalid_argument("discrete_rms_delay_spread: profile has no power");
    m1 /= p;
    double m2 = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        const double dt = delays_s[i] - m1;
        m2 += weights[i] * weights[i] * dt * dt;
    }
    return std::sqrt(m2 / p);
}

double discrete_rms_delay_spread(std::span<const InteractingObject> ios)
{
    std::vector<double> w, tau;
    for (const auto &io : ios)
    {
        w.push_back(io.weight);
        tau.push_back(io.excess_delay_s);
    }
    return discrete_rms_delay_spread(w, tau);
}

namespace
{
// Weights w_i^2 ~ exp(-beta * (tau_i - tau_min)), normalized to unit power.
std::vector<double> tilted_weights(std::span<const double> tau, double tau_min, double beta)
{
    std::vector<double> w(tau.size());
    double exponent_shift = 0.0;
    if (beta < 0.0)
    {
        // keep exponents <= 0 for negative tilts
        double tmax = *std::max_element(tau.begin(), tau.end());
        exponent_shift = -beta * (tmax - tau_min);
    }
    double p = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i)
    {
        w[i] = std::exp(-beta * (tau[i] - tau_min) - exponent_shift);
        p += w[i];
    }
    for (auto &x : w)
        x = std::sqrt(x / p);
    return w;
}
} // namespace

std::vector<double> exponential_profile_weights(std::span<const double> excess_delays_s, double target_rms_ds_s)
{
    const std::size_t n = excess_delays_s.size();
    if (n < 2)
        throw std::invalid_argument("exponential_profile_weights: need at least two delays");
    if (!(target_rms_ds_s > 0.0))
        throw std::invalid_argument("exponential_profile_weights: target delay spread must be positive");

    const auto [mn, mx] = std::minmax_element(excess_delays_s.begin(), excess_delays_s.end());
    const double tau_min = *mn, span = *mx - *mn;
    if (!(span > 0.0))
        return std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n)));

    auto spread = [&](double beta) {
        return discrete_rms_delay_spread(tilted_weights(excess_delays_s, tau_min, beta), excess_delays_s);
    };

    // beta in units of 1/span. Scan outwards from 0 for the first sign change
    // of spread(beta) - target on the side that moves towards the target.
    const double s0 = spread(0.0);
    if (s0 == target_rms_ds_s)
        return tilted_weights(excess_delays_s, tau_min, 0.0);
    const double dir = s0 > target_rms_ds_s ? 1.0 : -1.0;
    double lo = 0.0, hi = 0.0;
    double best_beta = 0.0, best_err = std::abs(s0 - target_rms_ds_s);
    bool bracketed = false;
    double prev = 0.0;
    for (int i = 0; i < 400 && !bracketed; ++i)
    {
        const double beta = dir * 1e-3 * std::pow(1.05, i) / span;
        const double s = spread(beta);
        const double err = std::abs(s - target_rms_ds_s);
        if (err < best_err)
        {
            best_err = err;
            best_beta = beta;
        }
        if ((s - target_rms_ds_s) * (s0 - target_rms_ds_s) <= 0.0)
        {
            lo = prev;
            hi = beta;
            bracketed = true;
        }
        prev = beta;
    }
    if (!bracketed)
        return tilted_weights(excess_delays_s, tau_min, best_beta); // closest reachable spread

    for (int it = 0; it < 200; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if ((spread(mid) - target_rms_ds_s) * (s0 - target_rms_ds_s) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (std::abs(hi - lo) <= 1e-14 * std::abs(hi))
            break;
    }
    return tilted_weights(excess_delays_s, tau_min, 0.5 * (lo + hi));
}

std::vector<InteractingObject> place_interacting_objects(Rng &rng, const Box &room, std::size_t n_io,
                                                         double target_rms_ds_s)
{
    if (n_io < 2)
        throw std::invalid_argument("place_interacting_objects: at least two interacting objects are required");
    if (!(target_rms_ds_s > 0.0))
        throw std::invalid_argument("place_interacting_objects: target delay spread must be positive");

    std::uniform_real_distribution<double> ux(room.lo.x(), room.hi.x());
    std::uniform_real_distribution<double> uy(room.lo.y(), room.hi.y());
    std::uniform_real_distribution<double> uz(room.lo.z(), room.hi.z());
    std::exponential_distribution<double> ex(1.0 / target_rms_ds_s);
    std::uniform_real_distribution<double> uphi(0.0, kTwoPi);

    std::vector<InteractingObject> ios(n_io);
    std::vector<double> tau(n_io);
    for (std::size_t i = 0; i < n_io; ++i)
    {
        ios[i].position = Vec3(ux(rng), uy(rng), uz(rng));
        tau[i] = ios[i].excess_delay_s = ex(rng);
        double phi = uphi(rng);
        ios[i].phase0 = phi >= kTwoPi ? 0.0 : phi;
    }
    const auto w = exponential_profile_weights(tau, target_rms_ds_s);
    for (std::size_t i = 0; i < n_io; ++i)
        ios[i].weight = w[i];
    return ios;
}

} // namespace dmimo
