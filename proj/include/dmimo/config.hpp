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

#ifndef DMIMO_CONFIG_HPP
#define DMIMO_CONFIG_HPP

#include "dmimo/geometry.hpp"
#include "dmimo/report.hpp"
#include "dmimo/synthesis.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace dmimo
{

// Invalid configuration; the message starts with "line N:" when the
// problem can be tied to a position in the document.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct TrajectorySpec
{
    enum class Type
    {
        RandomWaypoints,
        Waypoints,
        Csv,
        Stationary,
    };

    Type type = Type::RandomWaypoints;
    double speed_mps = 0.8;
    double duration_s = 60.0;
    double height_m = 1.0;
    double max_speed_mps = Trajectory::kDefaultMaxSpeed;
    Box area{Vec3(1.6, 1.6, 0.0), Vec3(29.6, 11.6, 8.0)};
    std::vector<Vec3> waypoints;
    std::filesystem::path csv_path;
    Vec3 position = Vec3(15.0, 6.0, 1.0);
    std::size_t snapshots = 0; // stationary: 0 means duration * rate
};

struct RunConfig
{
    Deployment deployment = Deployment::industrial_hall();
    ModelConfig model;
    TrajectorySpec trajectory;
    AnalysisOptions analysis;
};

RunConfig parse_run_config(const std::string &yaml_text, const std::filesystem::path &base_dir = {});
RunConfig load_run_config(const std::filesystem::path &path);

// Random trajectories draw from the Trajectory substream of the model seed.
Trajectory build_trajectory(const RunConfig &config);

// Resolved configuration as YAML, readable by parse_run_config.
std::string run_config_to_yaml(const RunConfig &config);

} // namespace dmimo

#endif
