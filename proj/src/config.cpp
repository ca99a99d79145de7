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

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dmimo
{
namespace
{
std::string where(const YAML::Node &n)
{
    const auto m = n.Mark();
    if (m.line < 0)
        return "";
    return "line " + std::to_string(m.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node &n, const std::string &msg)
{
    throw ConfigError(where(n) + msg);
}

// Mapping node with a fixed set of permitted keys.
class Section
{
  public:
    Section(const YAML::Node &node, std::string name, std::set<std::string> allowed)
        : node_(node), name_(std::move(name))
    {
        if (!node_.IsMap())
            fail(node_, "'" + name_ + "' must be a mapping");
        for (const auto &kv : node_)
        {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key))
                fail(kv.first, "unknown key '" + key + "' in '" + name_ + "'");
        }
    }

    bool has(const std::string &key) const { return static_cast<bool>(node_[key]); }
    YAML::Node node(const std::string &key) const { return node_[key]; }
    std::string path(const std::string &key) const { return name_.empty() ? key : name_ + "." + key; }

    YAML::Node require(const std::string &key) const
    {
        if (!has(key))
            fail(node_, "missing required key '" + path(key) + "'");
        return node_[key];
    }

    template <typename V> void get(const std::string &key, V &out) const
    {
        if (!has(key))
            return;
        const YAML::Node n = node_[key];
        try
        {
            out = n.as<V>();
        }
        catch (const YAML::Exception &)
        {
            fail(n, "'" + path(key) + "' has an invalid value");
        }
        if constexpr (std::is_floating_point_v<V>)
            if (!std::isfinite(out))
                fail(n, "'" + path(key) + "' must be finite");
    }

    void get_positive(const std::string &key, double &out) const
    {
        get(key, out);
        if (has(key) && !(out > 0.0))
            fail(node_[key], "'" + path(key) + "' must be positive");
    }

    void get_vec3(const std::string &key, Vec3 &out) const
    {
        if (has(key))
            out = to_vec3(node_[key], path(key));
    }

    static Vec3 to_vec3(const YAML::Node &n, const std::string &what)
    {
        if (!n.IsSequence() || n.size() != 3)
            fail(n, "'" + what + "' must be a list of three numbers");
        Vec3 v;
        for (std::size_t i = 0; i < 3; ++i)
        {
            try
            {
                v[static_cast<Eigen::Index>(i)] = n[i].as<double>();
            }
            catch (const YAML::Exception &)
            {
                fail(n[i], "'" + what + "' must contain numbers");
            }
        }
        if (!v.allFinite())
            fail(n, "'" + what + "' must be finite");
        return v;
    }

    const YAML::Node &raw() const { return node_; }

  private:
    YAML::Node node_;
    std::string name_;
};

std::vector<Vec3> to_points(const YAML::Node &n, const std::string &what)
{
    if (!n.IsSequence())
        fail(n, "'" + what + "' must be a list of [x, y, z] points");
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n.size(); ++i)
        pts.push_back(Section::to_vec3(n[i], what));
    return pts;
}

LinkState to_state(const YAML::Node &n, const std::string &what)
{
    const auto s = parse_link_state(n.as<std::string>(""));
    if (!s)
        fail(n, "'" + what + "' must be LOS or OLOS");
    return *s;
}

// Reads {los: x, olos: y}.
void get_pair(const Section &parent, const std::string &key, std::array<double, 2> &out)
{
    if (!parent.has(key))
        return;
    Section s(parent.node(key), parent.path(key), {"los", "olos"});
    s.get("los", out[0]);
    s.get("olos", out[1]);
}

Box to_box(const Section &parent, const std::string &key, Box box)
{
    if (!parent.has(key))
        return box;
    Section s(parent.node(key), parent.path(key), {"lo", "hi"});
    s.get_vec3("lo", box.lo);
    s.get_vec3("hi", box.hi);
    if (!((box.hi.array() > box.lo.array()).all()))
        fail(parent.node(key), "'" + parent.path(key) + "' must have hi > lo in every axis");
    return box;
}

void parse_deployment(const Section &top, Deployment &d)
{
    if (!top.has("deployment"))
        return;
    Section s(top.node("deployment"), "deployment",
              {"anchors", "carrier_freq_hz", "num_tones", "tone_spacing_hz", "snapshot_rate_hz"});
    if (s.has("anchors"))
    {
        const auto n = s.node("anchors");
        if (n.IsScalar() && n.as<std::string>() == "industrial_hall")
            d.anchors = Deployment::industrial_hall().anchors;
        else
            d.anchors = to_points(n, "deployment.anchors");
    }
    s.get_positive("carrier_freq_hz", d.carrier_freq_hz);
    s.get("num_tones", d.num_tones);
    s.get_positive("tone_spacing_hz", d.tone_spacing_hz);
    s.get_positive("snapshot_rate_hz", d.snapshot_rate_hz);
    try
    {
        d.validate();
    }
    catch (const std::invalid_argument &e)
    {
        fail(s.raw(), e.what());
    }
}

void parse_trajectory(const Section &top, TrajectorySpec &t, const std::filesystem::path &base)
{
    Section s(top.require("trajectory"), "trajectory",
              {"type", "speed_mps", "duration_s", "height_m", "max_speed_mps", "area", "waypoints", "path",
               "position", "snapshots"});
    const auto type_node = s.require("type");
    const auto type = type_node.as<std::string>("");
    if (type == "random_waypoints")
        t.type = TrajectorySpec::Type::RandomWaypoints;
    else if (type == "waypoints")
        t.type = TrajectorySpec::Type::Waypoints;
    else if (type == "csv")
        t.type = TrajectorySpec::Type::Csv;
    else if (type == "stationary")
        t.type = TrajectorySpec::Type::Stationary;
    else
        fail(type_node, "'trajectory.type' must be one of random_waypoints, waypoints, csv, stationary");

    s.get_positive("speed_mps", t.speed_mps);
    s.get("duration_s", t.duration_s);
    if (t.duration_s < 0.0)
        fail(s.node("duration_s"), "'trajectory.duration_s' must be non-negative");
    s.get("height_m", t.height_m);
    s.get_positive("max_speed_mps", t.max_speed_mps);
    t.area = to_box(s, "area", t.area);
    s.get_vec3("position", t.position);
    s.get("snapshots", t.snapshots);
    if (s.has("waypoints"))
        t.waypoints = to_points(s.node("waypoints"), "trajectory.waypoints");
    if (s.has("path"))
    {
        t.csv_path = s.node("path").as<std::string>();
        if (t.csv_path.is_relative() && !base.empty())
            t.csv_path = base / t.csv_path;
    }
    if (t.type == TrajectorySpec::Type::Waypoints && t.waypoints.size() < 2)
        fail(s.raw(), "'trajectory.waypoints' needs at least two points");
    if (t.type == TrajectorySpec::Type::Csv && t.csv_path.empty())
        fail(s.raw(), "missing required key 'trajectory.path'");
    if (t.type == TrajectorySpec::Type::RandomWaypoints && !(t.duration_s > 0.0))
        fail(s.raw(), "'trajectory.duration_s' must be positive for random_waypoints");
    if (t.speed_mps > t.max_speed_mps)
        fail(s.raw(), "'trajectory.speed_mps' exceeds 'trajectory.max_speed_mps'");
}

void parse_model(const Section &top, ModelConfig &m, std::size_t num_anchors)
{
    if (!top.has("model"))
        return;
    Section s(top.node("model"), "model",
              {"path_gain", "shadowing", "covariance", "rice", "transitions", "small_scale", "room", "lsf",
               "forced_state", "direct_path_only"});

    if (s.has("path_gain"))
    {
        Section pg(s.node("path_gain"), "model.path_gain", {"los", "olos", "d_max"});
        for (const char *st : {"los", "olos"})
            if (pg.has(st))
            {
                Section e(pg.node(st), pg.path(st), {"intercept_db", "exponent"});
                auto &model = std::string(st) == "los" ? m.path_gain.los : m.path_gain.olos;
                e.get("intercept_db", model.intercept_db);
                e.get("exponent", model.exponent);
                if (model.exponent < 0.0)
                    fail(e.node("exponent"), "'" + e.path("exponent") + "' must be non-negative");
            }
        if (pg.has("d_max"))
        {
            pg.get_positive("d_max", m.path_gain.los.d_max);
            m.path_gain.olos.d_max = m.path_gain.los.d_max;
        }
    }
    if (s.has("shadowing"))
    {
        Section sh(s.node("shadowing"), "model.shadowing", {"sigma_db", "k_forgetting"});
        get_pair(sh, "sigma_db", m.shadowing.sigma_db);
        get_pair(sh, "k_forgetting", m.shadowing.k_forgetting);
    }
    if (s.has("covariance"))
    {
        Section c(s.node("covariance"), "model.covariance",
                  {"mean", "spread", "spread_is_variance", "truncation", "selection", "fixed"});
        get_pair(c, "mean", m.covariance.mean);
        get_pair(c, "spread", m.covariance.spread);
        c.get("spread_is_variance", m.covariance.spread_is_variance);
        c.get("truncation", m.covariance.truncation);
        if (c.has("selection"))
        {
            const auto sel = c.node("selection").as<std::string>("");
            if (sel == "agent_majority")
                m.covariance_selection = CovarianceSelection::AgentMajority;
            else if (sel == "always_olos")
                m.covariance_selection = CovarianceSelection::AlwaysOLoS;
            else
                fail(c.node("selection"), "'model.covariance.selection' must be agent_majority or always_olos");
        }
        if (c.has("fixed"))
        {
            const auto n = c.node("fixed");
            if (!n.IsSequence() || n.size() != num_anchors)
                fail(n, "'model.covariance.fixed' must be an M x M list of rows");
            const auto M = static_cast<Eigen::Index>(num_anchors);
            Eigen::MatrixXd C(M, M);
            for (Eigen::Index r = 0; r < M; ++r)
            {
                const auto row = n[static_cast<std::size_t>(r)];
                if (!row.IsSequence() || row.size() != num_anchors)
                    fail(row, "'model.covariance.fixed' row has the wrong length");
                for (Eigen::Index col = 0; col < M; ++col)
                    C(r, col) = row[static_cast<std::size_t>(col)].as<double>();
            }
            m.fixed_covariance = C;
        }
    }
    if (s.has("rice"))
    {
        Section r(s.node("rice"), "model.rice", {"los", "olos"});
        for (const char *st : {"los", "olos"})
            if (r.has(st))
            {
                Section e(r.node(st), r.path(st), {"nu", "sigma"});
                auto &model = m.rice[std::string(st) == "los" ? 0 : 1];
                e.get("nu", model.nu);
                e.get_positive("sigma", model.sigma);
            }
    }
    if (s.has("transitions"))
    {
        Section t(s.node("transitions"), "model.transitions", {"rate_low", "rate_high", "fixed_rate", "initial"});
        t.get_positive("rate_low", m.rate_low);
        t.get_positive("rate_high", m.rate_high);
        if (t.has("fixed_rate"))
        {
            double r = 0.0;
            t.get("fixed_rate", r);
            m.fixed_rate = r;
        }
        if (t.has("initial"))
        {
            const auto n = t.node("initial");
            if (!n.IsSequence())
                fail(n, "'model.transitions.initial' must be a list of LOS/OLOS labels");
            std::vector<LinkState> init;
            for (std::size_t i = 0; i < n.size(); ++i)
                init.push_back(to_state(n[i], "model.transitions.initial"));
            m.initial_states = init;
        }
    }
    if (s.has("small_scale"))
    {
        Section ss(s.node("small_scale"), "model.small_scale",
                   {"n_io", "delay_spread_s", "ds_log_sigma", "calibrate_delay_spread"});
        ss.get("n_io", m.n_io);
        get_pair(ss, "delay_spread_s", m.delay_spread_s);
        ss.get("ds_log_sigma", m.ds_log_sigma);
        ss.get("calibrate_delay_spread", m.calibrate_delay_spread);
    }
    m.room = to_box(s, "room", m.room);
    if (s.has("lsf"))
    {
        Section l(s.node("lsf"), "model.lsf", {"enabled", "sigma_scale", "compensate_window", "window_m", "smooth", "scale_output"});
        l.get("enabled", m.lsf_enabled);
        l.get("sigma_scale", m.lsf_sigma_scale);
        l.get("compensate_window", m.compensate_lsf_window);
        l.get("window_m", m.lsf_window_m);
        l.get("smooth", m.smooth_lsf);
        l.get("scale_output", m.lsf_scale_output);
    }
    if (s.has("forced_state"))
        m.forced_state = to_state(s.node("forced_state"), "model.forced_state");
    s.get("direct_path_only", m.direct_path_only);

    try
    {
        m.validate(num_anchors);
    }
    catch (const std::invalid_argument &e)
    {
        fail(s.raw(), e.what());
    }
}

void parse_analysis(const Section &top, AnalysisOptions &a)
{
    if (!top.has("analysis"))
        return;
    Section s(top.node("analysis"), "analysis",
              {"lsf_window_m", "d_exclude_m", "ssf_window", "ssf_tone_stride", "ds_window", "ds_hop",
               "peak_threshold_db", "noise_margin_db", "stationarity", "stationarity_window", "stationarity_hop",
               "collinearity_threshold", "hardening", "hardening_window", "hardening_tone_stride",
               "hardening_snapshot_stride"});
    s.get("lsf_window_m", a.lsf_window_m);
    s.get("d_exclude_m", a.d_exclude_m);
    s.get("ssf_window", a.ssf_window);
    s.get("ssf_tone_stride", a.ssf_tone_stride);
    s.get("ds_window", a.ds_window);
    s.get("ds_hop", a.ds_hop);
    s.get("peak_threshold_db", a.peak_threshold_db);
    s.get("noise_margin_db", a.noise_margin_db);
    s.get("stationarity", a.stationarity);
    s.get("stationarity_window", a.stationarity_window);
    s.get("stationarity_hop", a.stationarity_hop);
    s.get("collinearity_threshold", a.collinearity_threshold);
    s.get("hardening", a.hardening);
    s.get("hardening_window", a.hardening_window);
    s.get("hardening_tone_stride", a.hardening_tone_stride);
    s.get("hardening_snapshot_stride", a.hardening_snapshot_stride);
}
} // namespace

RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException &e)
    {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap())
        throw ConfigError("configuration must be a mapping");

    RunConfig cfg;
    try
    {
        Section top(root, "", {"seed", "deployment", "trajectory", "model", "analysis"});
        const auto seed = top.require("seed");
        try
        {
            cfg.model.seed = seed.as<std::uint64_t>();
        }
        catch (const YAML::Exception &)
        {
            fail(seed, "'seed' must be a non-negative integer");
        }
        parse_deployment(top, cfg.deployment);
        parse_trajectory(top, cfg.trajectory, base_dir);
        parse_model(top, cfg.model, cfg.deployment.num_anchors());
        parse_analysis(top, cfg.analysis);
    }
    catch (const YAML::Exception &e)
    {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read configuration " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

Trajectory build_trajectory(const RunConfig &cfg)
{
    const auto &t = cfg.trajectory;
    const double rate = cfg.deployment.snapshot_rate_hz;
    try
    {
        switch (t.type)
        {
        case TrajectorySpec::Type::RandomWaypoints: {
            Rng rng = make_rng(cfg.model.seed, Stream::Trajectory);
            return Trajectory::random_waypoints(rng, t.area, t.height_m, t.speed_mps, rate, t.duration_s,
                                                t.max_speed_mps);
        }
        case TrajectorySpec::Type::Waypoints:
            return Trajectory::from_waypoints(t.waypoints, t.speed_mps, rate, t.duration_s, t.max_speed_mps);
        case TrajectorySpec::Type::Csv: {
            std::ifstream in(t.csv_path);
            if (!in)
                throw ConfigError("cannot read trajectory " + t.csv_path.string());
            Trajectory traj = read_trajectory_csv(in, t.max_speed_mps);
            if (std::abs(traj.snapshot_rate() - rate) > 1e-6 * rate)
                throw ConfigError("trajectory sample rate " + std::to_string(traj.snapshot_rate()) +
                                  " Hz differs from the deployment snapshot rate");
            return traj;
        }
        case TrajectorySpec::Type::Stationary: {
            const std::size_t n =
                t.snapshots > 0 ? t.snapshots : static_cast<std::size_t>(std::llround(t.duration_s * rate));
            return Trajectory::stationary(t.position, std::max<std::size_t>(n, 1), rate);
        }
        }
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(std::string("trajectory: ") + e.what());
    }
    throw ConfigError("unknown trajectory type");
}

// ------------------------------------------------------------------------

namespace
{
YAML::Node vec_node(const Vec3 &v)
{
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    for (int i = 0; i < 3; ++i)
        n.push_back(v[i]);
    return n;
}

YAML::Node pair_node(const std::array<double, 2> &p)
{
    YAML::Node n;
    n["los"] = p[0];
    n["olos"] = p[1];
    return n;
}

YAML::Node box_node(const Box &b)
{
    YAML::Node n;
    n["lo"] = vec_node(b.lo);
    n["hi"] = vec_node(b.hi);
    return n;
}
} // namespace

namespace
{
// Rewrites floating-point scalars in their shortest round-trip form.
void shorten_numbers(YAML::Node node)
{
    if (node.IsSequence() || node.IsMap())
    {
        for (auto it = node.begin(); it != node.end(); ++it)
            shorten_numbers(node.IsMap() ? it->second : *it);
        return;
    }
    if (!node.IsScalar())
        return;
    const std::string text = node.Scalar();
    if (text.find_first_of(".eE") == std::string::npos)
        return;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        return;
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    node = std::string(buf, res.ptr);
}
} // namespace

std::string run_config_to_yaml(const RunConfig &cfg)
{
    YAML::Node root;
    root["seed"] = cfg.model.seed;

    YAML::Node dep;
    YAML::Node anchors(YAML::NodeType::Sequence);
    for (const auto &a : cfg.deployment.anchors)
        anchors.push_back(vec_node(a));
    dep["anchors"] = anchors;
    dep["carrier_freq_hz"] = cfg.deployment.carrier_freq_hz;
    dep["num_tones"] = cfg.deployment.num_tones;
    dep["tone_spacing_hz"] = cfg.deployment.tone_spacing_hz;
    dep["snapshot_rate_hz"] = cfg.deployment.snapshot_rate_hz;
    root["deployment"] = dep;

    const auto &t = cfg.trajectory;
    YAML::Node tr;
    switch (t.type)
    {
    case TrajectorySpec::Type::RandomWaypoints:
        tr["type"] = "random_waypoints";
        break;
    case TrajectorySpec::Type::Waypoints:
        tr["type"] = "waypoints";
        break;
    case TrajectorySpec::Type::Csv:
        tr["type"] = "csv";
        break;
    case TrajectorySpec::Type::Stationary:
        tr["type"] = "stationary";
        break;
    }
    tr["speed_mps"] = t.speed_mps;
    tr["duration_s"] = t.duration_s;
    tr["height_m"] = t.height_m;
    tr["max_speed_mps"] = t.max_speed_mps;
    tr["area"] = box_node(t.area);
    if (!t.waypoints.empty())
    {
        YAML::Node w(YAML::NodeType::Sequence);
        for (const auto &p : t.waypoints)
            w.push_back(vec_node(p));
        tr["waypoints"] = w;
    }
    if (!t.csv_path.empty())
        tr["path"] = t.csv_path.string();
    if (t.type == TrajectorySpec::Type::Stationary)
    {
        tr["position"] = vec_node(t.position);
        tr["snapshots"] = t.snapshots;
    }
    root["trajectory"] = tr;

    const auto &m = cfg.model;
    YAML::Node model;
    for (LinkState s : {LinkState::LoS, LinkState::OLoS})
    {
        const char *key = s == LinkState::LoS ? "los" : "olos";
        model["path_gain"][key]["intercept_db"] = m.path_gain[s].intercept_db;
        model["path_gain"][key]["exponent"] = m.path_gain[s].exponent;
        model["rice"][key]["nu"] = m.rice[state_index(s)].nu;
        model["rice"][key]["sigma"] = m.rice[state_index(s)].sigma;
    }
    model["path_gain"]["d_max"] = m.path_gain.los.d_max;
    model["shadowing"]["sigma_db"] = pair_node(m.shadowing.sigma_db);
    model["shadowing"]["k_forgetting"] = pair_node(m.shadowing.k_forgetting);
    model["covariance"]["mean"] = pair_node(m.covariance.mean);
    model["covariance"]["spread"] = pair_node(m.covariance.spread);
    model["covariance"]["spread_is_variance"] = m.covariance.spread_is_variance;
    model["covariance"]["truncation"] = m.covariance.truncation;
    model["covariance"]["selection"] =
        m.covariance_selection == CovarianceSelection::AgentMajority ? "agent_majority" : "always_olos";
    if (m.fixed_covariance)
    {
        YAML::Node rows(YAML::NodeType::Sequence);
        for (Eigen::Index r = 0; r < m.fixed_covariance->rows(); ++r)
        {
            YAML::Node row(YAML::NodeType::Sequence);
            row.SetStyle(YAML::EmitterStyle::Flow);
            for (Eigen::Index c = 0; c < m.fixed_covariance->cols(); ++c)
                row.push_back((*m.fixed_covariance)(r, c));
            rows.push_back(row);
        }
        model["covariance"]["fixed"] = rows;
    }
    model["transitions"]["rate_low"] = m.rate_low;
    model["transitions"]["rate_high"] = m.rate_high;
    if (m.fixed_rate)
        model["transitions"]["fixed_rate"] = *m.fixed_rate;
    if (m.initial_states)
    {
        YAML::Node init(YAML::NodeType::Sequence);
        init.SetStyle(YAML::EmitterStyle::Flow);
        for (auto s : *m.initial_states)
            init.push_back(std::string(to_string(s)));
        model["transitions"]["initial"] = init;
    }
    model["small_scale"]["n_io"] = m.n_io;
    model["small_scale"]["delay_spread_s"] = pair_node(m.delay_spread_s);
    model["small_scale"]["ds_log_sigma"] = m.ds_log_sigma;
    model["small_scale"]["calibrate_delay_spread"] = m.calibrate_delay_spread;
    model["room"] = box_node(m.room);
    model["lsf"]["enabled"] = m.lsf_enabled;
    model["lsf"]["sigma_scale"] = m.lsf_sigma_scale;
    model["lsf"]["compensate_window"] = m.compensate_lsf_window;
    model["lsf"]["window_m"] = m.lsf_window_m;
    model["lsf"]["smooth"] = m.smooth_lsf;
    model["lsf"]["scale_output"] = m.lsf_scale_output;
    if (m.forced_state)
        model["forced_state"] = std::string(to_string(*m.forced_state));
    model["direct_path_only"] = m.direct_path_only;
    root["model"] = model;

    const auto &a = cfg.analysis;
    YAML::Node an;
    an["lsf_window_m"] = a.lsf_window_m;
    an["d_exclude_m"] = a.d_exclude_m;
    an["ssf_window"] = a.ssf_window;
    an["ssf_tone_stride"] = a.ssf_tone_stride;
    an["ds_window"] = a.ds_window;
    an["ds_hop"] = a.ds_hop;
    an["peak_threshold_db"] = a.peak_threshold_db;
    an["noise_margin_db"] = a.noise_margin_db;
    an["stationarity"] = a.stationarity;
    an["stationarity_window"] = a.stationarity_window;
    an["stationarity_hop"] = a.stationarity_hop;
    an["collinearity_threshold"] = a.collinearity_threshold;
    an["hardening"] = a.hardening;
    an["hardening_window"] = a.hardening_window;
    an["hardening_tone_stride"] = a.hardening_tone_stride;
    an["hardening_snapshot_stride"] = a.hardening_snapshot_stride;
    root["analysis"] = an;

    shorten_numbers(root);
    YAML::Emitter out;
    out << root;
    return std::string(out.c_str()) + "\n";
}

} // namespace dmimo
