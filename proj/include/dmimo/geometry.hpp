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

#ifndef DMIMO_GEOMETRY_HPP
#define DMIMO_GEOMETRY_HPP

#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace dmimo
{

// Static scene: anchor antennas and the RF numerology shared by all links.
struct Deployment
{
    std::vector<Vec3> anchors;
    double carrier_freq_hz = 3.75e9;
    std::size_t num_tones = 449;
    double tone_spacing_hz = 78.125e3;
    double snapshot_rate_hz = 200.0;

    std::size_t num_anchors() const { return anchors.size(); }
    double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }

    // Absolute frequency of tone n; tones are centered on the carrier.
    double tone_frequency(std::size_t n) const
    {
        return carrier_freq_hz + tone_offset(n);
    }
    double tone_offset(std::size_t n) const
    {
        return (static_cast<double>(n) - 0.5 * static_cast<double>(num_tones - 1)) * tone_spacing_hz;
    }

    // Delay resolution of an N-point transform over the tone grid.
    double delay_bin_s() const
    {
        return 1.0 / (static_cast<double>(num_tones) * tone_spacing_hz);
    }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;

    // Twelve rail-mounted anchors along the long walls of a 30 x 12 m hall, 4 m up.
    static Deployment industrial_hall();
};

// Axis-aligned box [lo, hi].
struct Box
{
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    Vec3 size() const { return hi - lo; }
    bool contains(const Vec3 &p) const
    {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }

    // 30 x 12 x 8 m hall volume.
    static Box industrial_hall();
};

// Agent positions, one per snapshot, sampled at a fixed snapshot rate.
class Trajectory
{
  public:
    static constexpr double kDefaultMaxSpeed = 2.0; // m/s

    Trajectory(std::vector<Vec3> positions, double snapshot_rate_hz, double max_speed_mps = kDefaultMaxSpeed);

    std::size_t size() const { return positions_.size(); }
    double snapshot_rate() const { return snapshot_rate_hz_; }
    const Vec3 &position(std::size_t k) const { return positions_.at(k); }
    const std::vector<Vec3> &positions() const { return positions_; }

    // Distance moved from snapshot k-1 to k; zero for k = 0.
    double step_distance(std::size_t k) const { return steps_.at(k); }
    // Distance travelled from the start up to snapshot k.
    double travelled(std::size_t k) const { return travelled_.at(k); }
    const std::vector<double> &travelled() const { return travelled_; }
    double total_distance() const { return travelled_.back(); }
    double speed(std::size_t k) const { return steps_.at(k) * snapshot_rate_hz_; }
    double duration_s() const { return static_cast<double>(size()) / snapshot_rate_hz_; }

    // Walks a polyline at constant speed. With duration_s > 0 the polyline is
    // traversed back and forth until the duration is filled; otherwise one pass.
    static Trajectory from_waypoints(const std::vector<Vec3> &waypoints, double speed_mps, double snapshot_rate_hz,
                                     double duration_s = 0.0, double max_speed_mps = kDefaultMaxSpeed);

    // Random waypoints inside the xy-footprint of `area` at height z, walked at constant speed.
    static Trajectory random_waypoints(Rng &rng, const Box &area, double height_m, double speed_mps,
                                       double snapshot_rate_hz, double duration_s,
                                       double max_speed_mps = kDefaultMaxSpeed);

    // Agent standing still for n snapshots.
    static Trajectory stationary(const Vec3 &position, std::size_t n, double snapshot_rate_hz);

  private:
    std::vector<Vec3> positions_;
    double snapshot_rate_hz_;
    std::vector<double> steps_;
    std::vector<double> travelled_;
};

// Trajectory CSV `t,x,y,z` with a header line and uniform timestamps.
Trajectory read_trajectory_csv(std::istream &in, double max_speed_mps = Trajectory::kDefaultMaxSpeed);
void write_trajectory_csv(std::ostream &out, const Trajectory &trajectory);

struct PointCloud
{
    std::vector<Vec3> points;
};

// One point per line, three whitespace- or comma-separated decimals, '#' starts a comment.
PointCloud read_point_cloud(std::istream &in);
PointCloud read_point_cloud(const std::filesystem::path &path);

// Last-bounce scatterer used by the small-scale fading synthesis.
struct InteractingObject
{
    Vec3 position = Vec3::Zero();
    double excess_delay_s = 0.0;
    double weight = 0.0;
    double phase0 = 0.0;
};

double distance(std::size_t anchor_idx, const Vec3 &agent_pos, const Deployment &deployment);

inline constexpr int kDefaultCoverageGrid = 64;

// Percentage of the disc of `radius` around the anchor-agent axis that is
// covered by cloud points inside the cylinder between the two endpoints.
// Symmetric in (anchor, agent).
double fresnel_coverage(const Vec3 &anchor_pos, const Vec3 &agent_pos, const PointCloud &cloud, double radius,
                        int grid_n = kDefaultCoverageGrid);

// Coverage of exactly 50 % still counts as LoS.
LinkState classify_state(double coverage_percent);

// Amplitude weights w_i >= 0, sum w_i^2 = 1, tilted as w_i^2 ~ exp(-beta * tau_i)
// so that the discrete power profile over the given excess delays has the
// requested RMS delay spread. Equal delays give equal weights.
std::vector<double> exponential_profile_weights(std::span<const double> excess_delays_s, double target_rms_ds_s);

// Second central moment (square-rooted) of the profile {w_i^2 at tau_i}.
double discrete_rms_delay_spread(std::span<const double> weights, std::span<const double> delays_s);
double discrete_rms_delay_spread(std::span<const InteractingObject> ios);

// Uniform positions in `room`, i.i.d. exponential excess delays with mean
// target_rms_ds_s, profile-shaping weights and uniform start phases.
std::vector<InteractingObject> place_interacting_objects(Rng &rng, const Box &room, std::size_t n_io,
                                                         double target_rms_ds_s);

} // namespace dmimo

#endif
