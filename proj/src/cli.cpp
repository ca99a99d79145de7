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

#include "dmimo/config.hpp"
#include "dmimo/link_state.hpp"
#include "dmimo/tensor_file.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace dmimo::cli
{
namespace
{
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Input that parses but is unusable (bad CSV, mismatched dimensions).
class InputError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path.string());
    return in;
}

template <typename F> auto parse_file(const fs::path &path, F &&parse)
{
    auto in = open_in(path);
    try
    {
        return parse(in);
    }
    catch (const std::invalid_argument &e)
    {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string to_text(const auto &write, const auto &value)
{
    std::ostringstream os;
    write(os, value);
    return os.str();
}

void ensure_dir(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

RunConfig load_config(const fs::path &path)
{
    if (!fs::exists(path))
        throw IoError("cannot read " + path.string());
    return load_run_config(path);
}

Trajectory make_trajectory(const RunConfig &cfg)
{
    if (cfg.trajectory.type == TrajectorySpec::Type::Csv && !fs::exists(cfg.trajectory.csv_path))
        throw IoError("cannot read trajectory " + cfg.trajectory.csv_path.string());
    return build_trajectory(cfg);
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void write_generated(const fs::path &dir, const Generated &gen, const Trajectory &traj, const RunConfig &cfg)
{
    ensure_dir(dir);
    write_tensor(dir / "channel.dmch", gen.tensor);
    write_text_atomic(dir / "states.csv", to_text([](std::ostream &o, const auto &t) { write_states_csv(o, t); },
                                                  gen.truth.states));
    write_text_atomic(dir / "lsf_truth.csv",
                      to_text([](std::ostream &o, const auto &t) { write_truth_csv(o, t); }, gen.truth));
    write_text_atomic(dir / "trajectory.csv",
                      to_text([](std::ostream &o, const auto &t) { write_trajectory_csv(o, t); }, traj));
    write_text_atomic(dir / "config.yaml", run_config_to_yaml(cfg));

    json meta;
    meta["seed"] = cfg.model.seed;
    meta["anchors"] = gen.tensor.M;
    meta["snapshots"] = gen.tensor.T;
    meta["tones"] = gen.tensor.F;
    meta["tensor"] = "channel.dmch";
    meta["checksum_crc64"] = hex64(tensor_checksum(gen.tensor));
    meta["distance_m"] = traj.total_distance();
    meta["out_of_range_links"] = gen.truth.out_of_range;
    meta["config"] = run_config_to_yaml(cfg);
    write_text_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

ToleranceSet load_tolerances(const fs::path &path)
{
    ToleranceSet tol = ToleranceSet::defaults();
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    YAML::Node root;
    try
    {
        root = YAML::Load(ss.str());
    }
    catch (const YAML::ParserException &e)
    {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (root.IsNull())
        return tol;
    if (!root.IsMap())
        throw ConfigError("tolerances must be a mapping");
    for (const auto &kv : root)
    {
        const auto key = kv.first.as<std::string>();
        const auto line = "line " + std::to_string(kv.first.Mark().line + 1) + ": ";
        auto it = tol.entries.find(key);
        if (it == tol.entries.end())
            throw ConfigError(line + "unknown tolerance '" + key + "'");
        try
        {
            if (kv.second.IsMap())
            {
                for (const auto &f : kv.second)
                {
                    const auto name = f.first.as<std::string>();
                    if (name == "value")
                        it->second.value = f.second.as<double>();
                    else if (name == "relative")
                        it->second.relative = f.second.as<bool>();
                    else
                        throw ConfigError(line + "unknown field '" + name + "' in tolerance '" + key + "'");
                }
            }
            else
                it->second.value = kv.second.as<double>();
        }
        catch (const YAML::Exception &)
        {
            throw ConfigError(line + "invalid tolerance '" + key + "'");
        }
        if (!(it->second.value >= 0.0))
            throw ConfigError(line + "tolerance '" + key + "' must be non-negative");
    }
    return tol;
}

int cmd_generate(const fs::path &config_path, const fs::path &out_dir, std::optional<std::uint64_t> seed,
                 std::ostream &out)
{
    RunConfig cfg = load_config(config_path);
    if (seed)
        cfg.model.seed = *seed;
    const Trajectory traj = make_trajectory(cfg);
    const Generated gen = generate(cfg.model, cfg.deployment, traj);
    write_generated(out_dir, gen, traj, cfg);
    out << "wrote " << gen.tensor.M << " x " << gen.tensor.T << " x " << gen.tensor.F << " tensor to "
        << (out_dir / "channel.dmch").string() << " (seed " << cfg.model.seed << ")\n";
    if (gen.truth.out_of_range > 0)
        out << "warning: " << gen.truth.out_of_range
            << " anchor-snapshot pairs lie outside the fitted path-gain distance range\n";
    return kOk;
}

struct AnalyzeArgs
{
    fs::path tensor, trajectory, report, config, states, lsf_truth, figures;
};

int cmd_analyze(const AnalyzeArgs &a, std::ostream &out)
{
    RunConfig cfg;
    if (!a.config.empty())
        cfg = load_config(a.config);
    const ChannelTensor tensor = read_tensor(a.tensor);
    const Trajectory traj =
        parse_file(a.trajectory, [&](std::istream &in) { return read_trajectory_csv(in, cfg.trajectory.max_speed_mps); });

    if (tensor.M != cfg.deployment.num_anchors() || tensor.F != cfg.deployment.num_tones)
        throw InputError("tensor is " + std::to_string(tensor.M) + " anchors x " + std::to_string(tensor.F) +
                         " tones, deployment has " + std::to_string(cfg.deployment.num_anchors()) + " x " +
                         std::to_string(cfg.deployment.num_tones));
    if (tensor.T != traj.size())
        throw InputError("tensor has " + std::to_string(tensor.T) + " snapshots, trajectory has " +
                         std::to_string(traj.size()));

    SideChannel side;
    std::optional<LinkStateTrace> states;
    std::optional<GroundTruth> truth;
    if (!a.states.empty())
    {
        states = parse_file(a.states, [](std::istream &in) { return read_states_csv(in); });
        if (states->num_anchors != tensor.M || states->num_snapshots != tensor.T)
            throw InputError("state trace dimensions do not match the tensor");
        side.states = &*states;
    }
    if (!a.lsf_truth.empty())
    {
        truth = parse_file(a.lsf_truth, [](std::istream &in) { return read_truth_csv(in); });
        if (static_cast<std::size_t>(truth->lsf_db.rows()) != tensor.M ||
            static_cast<std::size_t>(truth->lsf_db.cols()) != tensor.T)
            throw InputError("ground-truth dimensions do not match the tensor");
        side.lsf_db = &truth->lsf_db;
        side.pg_db = &truth->pg_db;
    }

    FigureData figures;
    const StatsReport r = analyze(tensor, cfg.deployment, traj, side, cfg.analysis,
                                  a.figures.empty() ? nullptr : &figures);
    write_text_atomic(a.report, report_to_json(r) + "\n");
    if (!a.figures.empty())
    {
        ensure_dir(a.figures);
        write_figures(a.figures, figures, r);
    }
    out << "wrote report " << a.report.string() << "\n";
    return kOk;
}

int cmd_validate(const fs::path &config_path, const fs::path &tol_path, std::optional<std::uint64_t> seed,
                 const fs::path &out_dir, std::ostream &out)
{
    RunConfig cfg = load_config(config_path);
    if (seed)
        cfg.model.seed = *seed;
    const ToleranceSet tol = tol_path.empty() ? ToleranceSet::defaults() : load_tolerances(tol_path);
    const Trajectory traj = make_trajectory(cfg);
    const Generated gen = generate(cfg.model, cfg.deployment, traj);
    const ValidationResult res = validate_generated(gen, cfg.model, cfg.deployment, traj, tol, cfg.analysis);
    if (!out_dir.empty())
    {
        write_generated(out_dir, gen, traj, cfg);
        write_text_atomic(out_dir / "report.json", report_to_json(res.report) + "\n");
        write_text_atomic(out_dir / "validation.txt", res.table());
    }
    out << res.table();
    out << (res.pass() ? "PASS" : "FAIL") << " (seed " << cfg.model.seed << ")\n";
    return res.pass() ? kOk : kValidationFailed;
}

struct ClassifyArgs
{
    fs::path cloud, trajectory, anchors, out;
    double radius = 0.0;
    double carrier = 3.75e9;
    int grid = kDefaultCoverageGrid;
};

int cmd_classify(const ClassifyArgs &a, std::ostream &out)
{
    const PointCloud cloud = parse_file(a.cloud, [](std::istream &in) { return read_point_cloud(in); });
    const PointCloud anchors = parse_file(a.anchors, [](std::istream &in) { return read_point_cloud(in); });
    if (anchors.points.empty())
        throw InputError(a.anchors.string() + ": no anchors");

    auto in = open_in(a.trajectory);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<Vec3> positions;
    double rate = 1.0;
    {
        // Single-sample trajectories are valid input here.
        std::istringstream probe(ss.str());
        try
        {
            const Trajectory t = read_trajectory_csv(probe, 1e9);
            positions = t.positions();
            rate = t.snapshot_rate();
        }
        catch (const std::invalid_argument &e)
        {
            std::istringstream again(ss.str());
            std::string line;
            std::size_t rows = 0;
            bool header = false;
            while (std::getline(again, line))
            {
                if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
                    continue;
                if (!header)
                {
                    header = true;
                    continue;
                }
                ++rows;
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream fields(line);
                double t, x, y, z;
                if (!(fields >> t >> x >> y >> z))
                    throw InputError(a.trajectory.string() + ": " + e.what());
                positions.emplace_back(x, y, z);
            }
            if (rows != 1)
                throw InputError(a.trajectory.string() + (rows == 0 ? ": empty trajectory" : ": ") +
                                 (rows == 0 ? "" : e.what()));
        }
    }
    const Trajectory traj(positions, rate, 1e9);

    Deployment dep;
    dep.anchors = anchors.points;
    dep.carrier_freq_hz = a.carrier;
    const double radius = a.radius > 0.0 ? a.radius : 2.0 * dep.wavelength();
    const LinkStateTrace trace = classify_trajectory(dep, traj, cloud, radius, a.grid);
    write_text_atomic(a.out, to_text([](std::ostream &o, const auto &t) { write_states_csv(o, t); }, trace));
    out << "classified " << trace.num_anchors << " anchors x " << trace.num_snapshots << " snapshots\n";
    return kOk;
}
} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"D-MIMO industrial channel simulator and estimator suite", "dmimo"};
    app.require_subcommand(1);

    fs::path gen_config, gen_out;
    std::optional<std::uint64_t> gen_seed;
    auto *gen = app.add_subcommand("generate", "Generate a channel tensor and its ground truth");
    gen->add_option("-c,--config", gen_config, "Run configuration (YAML)")->required();
    gen->add_option("-o,--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Override the master seed");

    AnalyzeArgs an_args;
    auto *an = app.add_subcommand("analyze", "Run the estimator suite on a channel tensor");
    an->add_option("tensor", an_args.tensor, "Channel tensor file")->required();
    an->add_option("-t,--trajectory", an_args.trajectory, "Trajectory CSV t,x,y,z")->required();
    an->add_option("-o,--out", an_args.report, "Report file (JSON)")->required();
    an->add_option("-c,--config", an_args.config, "Configuration supplying deployment and analysis options");
    an->add_option("--states", an_args.states, "Link-state CSV for state-conditioned statistics");
    an->add_option("--lsf-truth", an_args.lsf_truth, "Ground-truth CSV from generate");
    an->add_option("--emit-figures", an_args.figures, "Directory for per-statistic CSV files");

    fs::path val_config, val_tol, val_out;
    std::optional<std::uint64_t> val_seed;
    auto *val = app.add_subcommand("validate", "Generate, analyze and compare against the configuration");
    val->add_option("-c,--config", val_config, "Run configuration (YAML)")->required();
    val->add_option("--tolerances", val_tol, "Tolerance overrides (YAML)");
    val->add_option("--seed", val_seed, "Override the master seed");
    val->add_option("-o,--out-dir", val_out, "Directory for the tensor, ground truth and report");

    ClassifyArgs cl_args;
    auto *cl = app.add_subcommand("classify", "Label links from a point cloud by Fresnel-zone coverage");
    cl->add_option("--cloud", cl_args.cloud, "Point cloud, one x y z per line")->required();
    cl->add_option("-t,--trajectory", cl_args.trajectory, "Trajectory CSV t,x,y,z")->required();
    cl->add_option("--anchors", cl_args.anchors, "Anchor positions, one x y z per line")->required();
    cl->add_option("-o,--out", cl_args.out, "Output CSV")->required();
    cl->add_option("--radius", cl_args.radius, "Disc radius in m (default two wavelengths)");
    cl->add_option("--carrier", cl_args.carrier, "Carrier frequency in Hz")->check(CLI::PositiveNumber);
    cl->add_option("--grid", cl_args.grid, "Raster cells per disc diameter")->check(CLI::Range(4, 4096));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return kOk;
    }
    catch (const CLI::CallForAllHelp &)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try
    {
        if (*gen)
            return cmd_generate(gen_config, gen_out, gen_seed, out);
        if (*an)
            return cmd_analyze(an_args, out);
        if (*val)
            return cmd_validate(val_config, val_tol, val_seed, val_out, out);
        if (*cl)
            return cmd_classify(cl_args, out);
    }
    catch (const ConfigError &e)
    {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const InputError &e)
    {
        err << "input error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const TensorCorruptError &e)
    {
        err << "corrupt tensor: " << e.what() << "\n";
        return kCorrupt;
    }
    catch (const TensorIoError &e)
    {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    }
    catch (const IoError &e)
    {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    }
    catch (const std::invalid_argument &e)
    {
        err << "invalid input: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return kIoError;
    }
    return kConfigError;
}

} // namespace dmimo::cli
