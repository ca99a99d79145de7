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

#include "dmimo/cli.hpp"
#include "dmimo/report.hpp"
#include "dmimo/tensor_file.hpp"

#include <catch_amalgamated.hpp>
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

using namespace dmimo;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace
{
struct Result
{
    int code = -1;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "dmimo");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path &p, const std::string &text)
{
    std::ofstream(p, std::ios::binary) << text;
}

// Small scene that runs in about a second.
const char *kConfig = R"(seed: 5
deployment:
  num_tones: 32
trajectory:
  type: waypoints
  speed_mps: 1.0
  duration_s: 3.0
  waypoints: [[5, 3, 1], [9, 6, 1]]
analysis:
  ssf_window: 100
  ds_window: 100
  ds_hop: 50
  stationarity_window: 50
  stationarity_hop: 25
  hardening_window: 100
)";

struct Workspace
{
    fs::path dir;
    explicit Workspace(const std::string &name)
    {
        dir = fs::temp_directory_path() / ("dmimo_cli_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        put(dir / "run.yaml", kConfig);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string operator/(const std::string &f) const { return (dir / f).string(); }
};

std::string all_tolerances(double value)
{
    std::string s;
    for (const auto &[k, t] : ToleranceSet::defaults().entries)
        s += k + ": " + std::to_string(value) + "\n";
    return s;
}
} // namespace

TEST_CASE("generate writes a tensor and its ground truth", "[cli]")
{
    Workspace ws("generate");
    const auto r = run_cli({"generate", "-c", ws / "run.yaml", "-o", ws / "gen"});
    REQUIRE(r.code == cli::kOk);
    CHECK_THAT(r.out, ContainsSubstring("12 x 600 x 32"));
    for (const char *f : {"channel.dmch", "states.csv", "lsf_truth.csv", "trajectory.csv", "config.yaml", "meta.json"})
        CHECK(fs::exists(ws.dir / "gen" / f));

    const auto meta = nlohmann::json::parse(slurp(ws.dir / "gen" / "meta.json"));
    CHECK(meta["seed"] == 5);
    CHECK(meta["anchors"] == 12);
    CHECK(meta["snapshots"] == 600);
    const auto tensor = read_tensor(ws.dir / "gen" / "channel.dmch");
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << tensor_checksum(tensor);
    CHECK(meta["checksum_crc64"] == hex.str());

    // the written configuration regenerates the same tensor
    const auto again = run_cli({"generate", "-c", ws / "gen/config.yaml", "-o", ws / "gen2"});
    REQUIRE(again.code == cli::kOk);
    CHECK(slurp(ws.dir / "gen" / "channel.dmch") == slurp(ws.dir / "gen2" / "channel.dmch"));

    const auto other = run_cli({"generate", "-c", ws / "run.yaml", "-o", ws / "gen3", "--seed", "6"});
    REQUIRE(other.code == cli::kOk);
    CHECK(slurp(ws.dir / "gen" / "channel.dmch") != slurp(ws.dir / "gen3" / "channel.dmch"));
}

TEST_CASE("analyze reads generated output", "[cli]")
{
    Workspace ws("analyze");
    REQUIRE(run_cli({"generate", "-c", ws / "run.yaml", "-o", ws / "gen"}).code == cli::kOk);
    const auto r = run_cli({"analyze", ws / "gen/channel.dmch", "-t", ws / "gen/trajectory.csv", "-o",
                            ws / "report.json", "-c", ws / "run.yaml", "--states", ws / "gen/states.csv",
                            "--lsf-truth", ws / "gen/lsf_truth.csv", "--emit-figures", ws / "fig"});
    INFO(r.err);
    REQUIRE(r.code == cli::kOk);
    const auto rep = nlohmann::json::parse(slurp(ws.dir / "report.json"));
    CHECK(rep.is_object());
    CHECK(!rep.empty());
    CHECK(fs::is_directory(ws.dir / "fig"));
    CHECK(!fs::is_empty(ws.dir / "fig"));

    // blind analysis needs only the tensor and the trajectory
    CHECK(run_cli({"analyze", ws / "gen/channel.dmch", "-t", ws / "gen/trajectory.csv", "-o", ws / "blind.json",
                   "-c", ws / "run.yaml"})
              .code == cli::kOk);

    // 449-tone default deployment does not match the 32-tone tensor
    const auto mismatch =
        run_cli({"analyze", ws / "gen/channel.dmch", "-t", ws / "gen/trajectory.csv", "-o", ws / "x.json"});
    CHECK(mismatch.code == cli::kConfigError);

    // trajectory of a different length
    std::string traj = slurp(ws.dir / "gen" / "trajectory.csv");
    traj.erase(traj.rfind('\n', traj.size() - 2) + 1);
    put(ws.dir / "short.csv", traj);
    CHECK(run_cli({"analyze", ws / "gen/channel.dmch", "-t", ws / "short.csv", "-o", ws / "x.json", "-c",
                   ws / "run.yaml"})
              .code == cli::kConfigError);

    // truncated and bit-flipped tensors
    std::string bytes = slurp(ws.dir / "gen" / "channel.dmch");
    put(ws.dir / "trunc.dmch", bytes.substr(0, bytes.size() / 2));
    CHECK(run_cli({"analyze", ws / "trunc.dmch", "-t", ws / "gen/trajectory.csv", "-o", ws / "x.json", "-c",
                   ws / "run.yaml"})
              .code == cli::kCorrupt);
    bytes[bytes.size() / 2] ^= 0x10;
    put(ws.dir / "flip.dmch", bytes);
    CHECK(run_cli({"analyze", ws / "flip.dmch", "-t", ws / "gen/trajectory.csv", "-o", ws / "x.json", "-c",
                   ws / "run.yaml"})
              .code == cli::kCorrupt);

    CHECK(run_cli({"analyze", ws / "missing.dmch", "-t", ws / "gen/trajectory.csv", "-o", ws / "x.json", "-c",
                   ws / "run.yaml"})
              .code == cli::kIoError);
    CHECK(!fs::exists(ws.dir / "x.json"));
}

TEST_CASE("validate exit codes and determinism", "[cli]")
{
    Workspace ws("validate");
    put(ws.dir / "loose.yaml", all_tolerances(1e9));
    put(ws.dir / "strict.yaml", all_tolerances(0.0));

    const auto a = run_cli({"validate", "-c", ws / "run.yaml", "--tolerances", ws / "loose.yaml", "-o", ws / "a"});
    INFO(a.err);
    CHECK(a.code == cli::kOk);
    CHECK_THAT(a.out, ContainsSubstring("PASS (seed 5)"));
    CHECK_THAT(a.out, ContainsSubstring("expected"));
    for (const char *f : {"channel.dmch", "report.json", "validation.txt", "meta.json"})
        CHECK(fs::exists(ws.dir / "a" / f));

    const auto b = run_cli({"validate", "-c", ws / "run.yaml", "--tolerances", ws / "loose.yaml", "-o", ws / "b"});
    CHECK(b.out == a.out);
    CHECK(slurp(ws.dir / "a" / "channel.dmch") == slurp(ws.dir / "b" / "channel.dmch"));
    CHECK(slurp(ws.dir / "a" / "report.json") == slurp(ws.dir / "b" / "report.json"));

    const auto s = run_cli({"validate", "-c", ws / "run.yaml", "--tolerances", ws / "strict.yaml"});
    CHECK(s.code == cli::kValidationFailed);
    CHECK_THAT(s.out, ContainsSubstring("FAIL (seed 5)"));

    put(ws.dir / "unknown.yaml", "no_such_parameter: 1\n");
    CHECK(run_cli({"validate", "-c", ws / "run.yaml", "--tolerances", ws / "unknown.yaml"}).code ==
          cli::kConfigError);
    put(ws.dir / "relative.yaml", "los.delay_spread_ns: {value: 0.5, relative: true}\nbogus_field: 1\n");
    CHECK(run_cli({"validate", "-c", ws / "run.yaml", "--tolerances", ws / "relative.yaml"}).code ==
          cli::kConfigError);
}

TEST_CASE("configuration and usage errors", "[cli]")
{
    Workspace ws("errors");
    put(ws.dir / "bad.yaml", "seed: 1\ntrajectory:\n  type: stationary\n  colour: red\n");
    const auto r = run_cli({"generate", "-c", ws / "bad.yaml", "-o", ws / "out"});
    CHECK(r.code == cli::kConfigError);
    CHECK_THAT(r.err, ContainsSubstring("line 4"));

    CHECK(run_cli({"generate", "-c", ws / "absent.yaml", "-o", ws / "out"}).code == cli::kIoError);
    CHECK(run_cli({"generate", "-c", ws / "run.yaml"}).code == cli::kConfigError);
    CHECK(run_cli({}).code == cli::kConfigError);
    CHECK(run_cli({"transmogrify"}).code == cli::kConfigError);
    CHECK(run_cli({"--help"}).code == cli::kOk);

    // output directory blocked by a regular file
    put(ws.dir / "file", "x");
    CHECK(run_cli({"generate", "-c", ws / "run.yaml", "-o", ws / "file/sub"}).code == cli::kIoError);
}

TEST_CASE("classify labels links from a point cloud", "[cli]")
{
    Workspace ws("classify");
    put(ws.dir / "anchors.txt", "0 0 2\n0 4 2\n");
    put(ws.dir / "traj.csv", "t,x,y,z\n0,10,0,2\n0.1,10,0.1,2\n0.2,10,0.2,2\n");
    put(ws.dir / "one.csv", "t,x,y,z\n0,10,0,2\n");
    put(ws.dir / "empty.csv", "t,x,y,z\n");
    std::string wall;
    for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 100; ++j)
            wall += "5 " + std::to_string(-2.0 + 0.02 * i) + " " + std::to_string(1.0 + 0.02 * j) + "\n";
    put(ws.dir / "wall.xyz", wall);
    put(ws.dir / "none.xyz", "# empty hall\n");

    auto r = run_cli({"classify", "--cloud", ws / "wall.xyz", "-t", ws / "traj.csv", "--anchors",
                      ws / "anchors.txt", "-o", ws / "states.csv", "--radius", "0.5", "--grid", "32"});
    INFO(r.err);
    REQUIRE(r.code == cli::kOk);
    std::ifstream in(ws.dir / "states.csv");
    const auto trace = read_states_csv(in);
    CHECK(trace.num_anchors == 2);
    CHECK(trace.num_snapshots == 3);
    for (auto s : trace.states)
        CHECK(s == LinkState::OLoS);

    r = run_cli({"classify", "--cloud", ws / "none.xyz", "-t", ws / "one.csv", "--anchors", ws / "anchors.txt",
                 "-o", ws / "free.csv"});
    REQUIRE(r.code == cli::kOk);
    std::ifstream in2(ws.dir / "free.csv");
    const auto free_trace = read_states_csv(in2);
    CHECK(free_trace.num_snapshots == 1);
    for (auto s : free_trace.states)
        CHECK(s == LinkState::LoS);

    CHECK(run_cli({"classify", "--cloud", ws / "none.xyz", "-t", ws / "empty.csv", "--anchors",
                   ws / "anchors.txt", "-o", ws / "x.csv"})
              .code == cli::kConfigError);
    CHECK(run_cli({"classify", "--cloud", ws / "missing.xyz", "-t", ws / "traj.csv", "--anchors",
                   ws / "anchors.txt", "-o", ws / "x.csv"})
              .code == cli::kIoError);
    CHECK(run_cli({"classify", "--cloud", ws / "none.xyz", "-t", ws / "traj.csv", "--anchors", ws / "anchors.txt",
                   "-o", ws / "x.csv", "--grid", "1"})
              .code == cli::kConfigError);
}
