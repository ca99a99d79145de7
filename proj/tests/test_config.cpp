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

#include "dmimo/config.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace dmimo;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace
{
const char *kMinimal = R"(seed: 7
trajectory:
  type: stationary
  snapshots: 10
)";
}

TEST_CASE("minimal configuration takes the defaults", "[config]")
{
    const auto cfg = parse_run_config(kMinimal);
    CHECK(cfg.model.seed == 7);
    CHECK(cfg.deployment.num_anchors() == 12);
    CHECK(cfg.deployment.num_tones == 449);
    CHECK(cfg.model.shadowing.sigma_db[0] == 2.13);
    CHECK(cfg.trajectory.type == TrajectorySpec::Type::Stationary);
    const auto traj = build_trajectory(cfg);
    CHECK(traj.size() == 10);
}

TEST_CASE("shipped configurations parse", "[config]")
{
    const std::filesystem::path root = DMIMO_SOURCE_DIR;
    const auto cfg = load_run_config(root / "config" / "default.yaml");
    CHECK(cfg.deployment.num_anchors() == 12);
    CHECK(cfg.trajectory.duration_s == 60.0);
    const auto traj = build_trajectory(cfg);
    CHECK(traj.size() == 12000);
    for (std::size_t k = 0; k < traj.size(); k += 100)
        REQUIRE(Box::industrial_hall().contains(traj.position(k)));

    // the key reference lists the built-in defaults
    const auto schema = load_run_config(root / "config" / "schema.yaml");
    const auto minimal = parse_run_config("seed: 1\ntrajectory: {type: random_waypoints}\n");
    CHECK(run_config_to_yaml(schema) == run_config_to_yaml(minimal));
}

TEST_CASE("full configuration", "[config]")
{
    const auto cfg = parse_run_config(R"(seed: 99
deployment:
  anchors: [[0, 0, 4], [10, 0, 4], [0, 10, 4]]
  carrier_freq_hz: 2.4e9
  num_tones: 64
  tone_spacing_hz: 1.0e5
  snapshot_rate_hz: 100
trajectory:
  type: waypoints
  speed_mps: 1.5
  duration_s: 0
  waypoints: [[1, 1, 1], [5, 1, 1]]
model:
  path_gain:
    los: {intercept_db: -40, exponent: 1.2}
    d_max: 50
  shadowing:
    sigma_db: {los: 1.0, olos: 2.0}
    k_forgetting: {los: 0.5, olos: 0.6}
  covariance:
    fixed: [[1, 0.2, 0], [0.2, 1, 0], [0, 0, 1]]
  rice:
    olos: {nu: 0.5, sigma: 0.7}
  transitions:
    fixed_rate: 0.2
    initial: [LOS, OLOS, LOS]
  small_scale:
    n_io: 50
    delay_spread_s: {los: 30e-9, olos: 60e-9}
  lsf:
    enabled: false
  forced_state: OLOS
analysis:
  ds_window: 100
  stationarity: false
)");
    CHECK(cfg.deployment.num_anchors() == 3);
    CHECK(cfg.deployment.carrier_freq_hz == 2.4e9);
    CHECK(cfg.deployment.snapshot_rate_hz == 100.0);
    CHECK(cfg.model.path_gain.los.intercept_db == -40.0);
    CHECK(cfg.model.path_gain.los.exponent == 1.2);
    CHECK(cfg.model.path_gain.olos.intercept_db == -48.78);
    CHECK(cfg.model.shadowing.k_forgetting[1] == 0.6);
    REQUIRE(cfg.model.fixed_covariance);
    CHECK((*cfg.model.fixed_covariance)(0, 1) == 0.2);
    CHECK(cfg.model.rice[1].nu == 0.5);
    CHECK(cfg.model.rice[0].nu == 0.84);
    REQUIRE(cfg.model.fixed_rate);
    CHECK(*cfg.model.fixed_rate == 0.2);
    REQUIRE(cfg.model.initial_states);
    CHECK((*cfg.model.initial_states)[1] == LinkState::OLoS);
    CHECK(cfg.model.n_io == 50);
    CHECK(cfg.model.delay_spread_s[1] == Approx(60e-9));
    CHECK(!cfg.model.lsf_enabled);
    CHECK(cfg.model.forced_state == LinkState::OLoS);
    CHECK(cfg.analysis.ds_window == 100);
    CHECK(!cfg.analysis.stationarity);
    const auto traj = build_trajectory(cfg);
    CHECK(traj.total_distance() == Approx(4.0).margin(0.02));

    // the resolved YAML parses back to the same configuration
    const auto again = parse_run_config(run_config_to_yaml(cfg));
    CHECK(run_config_to_yaml(again) == run_config_to_yaml(cfg));
    CHECK(again.model.delay_spread_s[1] == cfg.model.delay_spread_s[1]);
    CHECK(*again.model.fixed_covariance == *cfg.model.fixed_covariance);
}

TEST_CASE("configuration errors carry line numbers", "[config]")
{
    auto err = [](const std::string &text) {
        try
        {
            parse_run_config(text);
        }
        catch (const ConfigError &e)
        {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK_THAT(err("seed: 1\ntrajectory:\n  type: stationary\n  bogus: 3\n"),
               StartsWith("line 4:") && ContainsSubstring("bogus"));
    CHECK_THAT(err("seed: 1\ntrajectory:\n  type: flying\n"), StartsWith("line 3:"));
    CHECK_THAT(err("seed: -4\ntrajectory:\n  type: stationary\n"), StartsWith("line 1:"));
    CHECK_THAT(err("seed: 1\n"), ContainsSubstring("trajectory"));
    CHECK_THAT(err("trajectory:\n  type: stationary\n"), ContainsSubstring("seed"));
    CHECK_THAT(err("seed: 1\ntrajectory: {type: stationary}\nmodel:\n  shadowing:\n    sigma_db: {los: -1}\n"),
               ContainsSubstring("sigma"));
    CHECK_THAT(err("seed: 1\ntrajectory: {type: stationary}\nmodel:\n  forced_state: MAYBE\n"),
               StartsWith("line 4:"));
    CHECK_THAT(err("seed: 1\ntrajectory: {type: stationary}\nmodel:\n  covariance:\n    fixed: [[1, 0], [0, 1]]\n"),
               ContainsSubstring("covariance"));
    CHECK_THAT(err("seed: 1\ntrajectory: {type: csv}\n"), ContainsSubstring("trajectory.path"));
    CHECK_THAT(err("seed: 1\ntrajectory: [unclosed\n"), StartsWith("line "));
    CHECK_THAT(err("- 1\n- 2\n"), ContainsSubstring("mapping"));
    CHECK_THAT(err("seed: 1\ndeployment:\n  num_tones: 64\n  tone_spacing_hz: 0\ntrajectory: {type: stationary}\n"),
               StartsWith("line 4:"));
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("csv trajectories resolve against the configuration directory", "[config]")
{
    const auto dir = std::filesystem::temp_directory_path() / "dmimo_test_config";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream t(dir / "walk.csv");
        t << "t,x,y,z\n0,1,1,1\n0.005,1.001,1,1\n0.01,1.002,1,1\n";
        std::ofstream c(dir / "run.yaml");
        c << "seed: 3\ntrajectory:\n  type: csv\n  path: walk.csv\n";
        std::ofstream c2(dir / "slow.yaml");
        c2 << "seed: 3\ndeployment: {snapshot_rate_hz: 100}\ntrajectory:\n  type: csv\n  path: walk.csv\n";
    }
    const auto cfg = load_run_config(dir / "run.yaml");
    CHECK(build_trajectory(cfg).size() == 3);
    CHECK_THROWS_AS(build_trajectory(load_run_config(dir / "slow.yaml")), ConfigError);
    std::filesystem::remove_all(dir);
}
