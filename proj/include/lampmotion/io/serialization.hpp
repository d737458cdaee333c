/**
 * @file serialization.hpp
 * @brief Versioned JSON documents for chains, tasks, trajectories, planner
 * configurations and metrics.
 *
 * Every document carries "format" and "version" fields. Loaders reject a
 * different format, an unknown major version, missing required fields and
 * unknown fields. Doubles are written in shortest round-trip form, so
 * save -> load -> save is byte-identical.
 */
#pragma once

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lampmotion/errors.hpp"
#include "lampmotion/kinematics.hpp"
#include "lampmotion/planner.hpp"
#include "lampmotion/primitives.hpp"
#include "lampmotion/task.hpp"
#include "lampmotion/trajectory.hpp"
#include "lampmotion/utility.hpp"

namespace lampmotion::io {

using json = nlohmann::json;

inline constexpr int kMajorVersion = 1;
inline constexpr std::string_view kVersion = "1.0";

inline constexpr std::string_view kChainFormat = "lampmotion.chain";
inline constexpr std::string_view kTaskFormat = "lampmotion.task";
inline constexpr std::string_view kTrajectoryFormat = "lampmotion.trajectory";
inline constexpr std::string_view kPlannerFormat = "lampmotion.planner";
inline constexpr std::string_view kMetricsFormat = "lampmotion.metrics";

// ---------------------------------------------------------------------------
// Field access with strict checking

inline void expect_keys(const json& j, std::initializer_list<std::string_view> required,
                        std::initializer_list<std::string_view> optional, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::InvalidInput, where + ": expected an object");
  for (auto key : required)
    if (!j.contains(std::string(key))) fail(ErrorCode::InvalidInput, where + ": missing field '" + std::string(key) + "'");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) fail(ErrorCode::InvalidInput, where + ": unknown field '" + key + "'");
  }
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) fail(ErrorCode::InvalidInput, where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

inline std::string get_string(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) fail(ErrorCode::InvalidInput, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<std::string> get_optional_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return get_string(j, key, where);
}

inline bool get_bool(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(ErrorCode::InvalidInput, where + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

inline std::uint64_t get_unsigned(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(ErrorCode::InvalidInput, where + ": field '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

template <int N>
Eigen::Matrix<double, N, 1> get_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(N))
    fail(ErrorCode::InvalidInput, where + ": expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) fail(ErrorCode::InvalidInput, where + ": array entries must be numbers");
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

template <typename Derived>
json to_array(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json document(std::string_view format) {
  return json{{"format", format}, {"version", kVersion}};
}

/// Checks the format tag and that the major version is supported.
inline void check_document(const json& j, std::string_view format) {
  if (!j.is_object()) fail(ErrorCode::InvalidInput, std::string(format) + ": document must be an object");
  if (!j.contains("format") || !j["format"].is_string() || j["format"].get<std::string>() != format)
    fail(ErrorCode::InvalidInput, "expected a '" + std::string(format) + "' document");
  if (!j.contains("version") || !j["version"].is_string())
    fail(ErrorCode::InvalidInput, std::string(format) + ": missing version");
  const std::string v = j["version"].get<std::string>();
  const auto dot = v.find('.');
  int major = -1;
  try {
    major = std::stoi(v.substr(0, dot));
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidInput, std::string(format) + ": malformed version '" + v + "'");
  }
  if (major != kMajorVersion)
    fail(ErrorCode::UnsupportedVersion, std::string(format) + ": unsupported major version '" + v + "'");
}

inline json parse(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidInput, where + ": malformed JSON: " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << bytes;
  if (!out) fail(ErrorCode::InvalidInput, "failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Chain

inline json to_json(const ChainSpec& c) {
  json j = document(kChainFormat);
  j["id"] = c.id;
  j["joints"] = json::array();
  for (const auto& jt : c.joints)
    j["joints"].push_back({{"name", jt.name},
                           {"axis", to_array(jt.axis)},
                           {"offset", to_array(jt.offset)},
                           {"lower", jt.lower},
                           {"upper", jt.upper},
                           {"max_speed", jt.max_speed}});
  j["head_offset"] = to_array(c.head_offset);
  j["forward_axis"] = to_array(c.forward_axis);
  j["gestures"] = json::object();
  for (const auto& [name, terms] : c.gestures) {
    json a = json::array();
    for (const auto& t : terms) a.push_back({{"joint", t.joint}, {"gain", t.gain}});
    j["gestures"][name] = a;
  }
  j["ik"] = {{"damping", c.ik.damping},
             {"max_iterations", c.ik.max_iterations},
             {"step_clamp", c.ik.step_clamp},
             {"position_tolerance", c.ik.position_tolerance},
             {"facing_tolerance", c.ik.facing_tolerance},
             {"facing_weight", c.ik.facing_weight}};
  return j;
}

inline ChainSpec chain_from_json(const json& j) {
  check_document(j, kChainFormat);
  const std::string w = "chain";
  expect_keys(j, {"format", "version", "id", "joints", "head_offset", "forward_axis"}, {"gestures", "ik"}, w);
  ChainSpec c;
  c.id = get_string(j, "id", w);
  const auto& joints = j["joints"];
  if (!joints.is_array() || joints.size() != kJointCount)
    fail(ErrorCode::InvalidConfig, w + ": exactly 6 joints are required");
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto& jt = joints[i];
    const std::string jw = w + ".joints[" + std::to_string(i) + "]";
    expect_keys(jt, {"name", "axis", "offset", "lower", "upper", "max_speed"}, {}, jw);
    c.joints[i].name = get_string(jt, "name", jw);
    c.joints[i].axis = get_vector<3>(jt["axis"], jw + ".axis");
    c.joints[i].offset = get_vector<3>(jt["offset"], jw + ".offset");
    c.joints[i].lower = get_number(jt, "lower", jw);
    c.joints[i].upper = get_number(jt, "upper", jw);
    c.joints[i].max_speed = get_number(jt, "max_speed", jw);
  }
  c.head_offset = get_vector<3>(j["head_offset"], w + ".head_offset");
  c.forward_axis = get_vector<3>(j["forward_axis"], w + ".forward_axis");
  if (j.contains("gestures")) {
    if (!j["gestures"].is_object()) fail(ErrorCode::InvalidInput, w + ".gestures must be an object");
    for (const auto& [name, terms] : j["gestures"].items()) {
      if (!terms.is_array()) fail(ErrorCode::InvalidInput, w + ".gestures." + name + " must be an array");
      std::vector<GestureTerm> out;
      for (const auto& t : terms) {
        const std::string tw = w + ".gestures." + name;
        expect_keys(t, {"joint", "gain"}, {}, tw);
        if (!t["joint"].is_number_integer()) fail(ErrorCode::InvalidInput, tw + ": joint must be an integer");
        out.push_back({t["joint"].get<int>(), get_number(t, "gain", tw)});
      }
      c.gestures[name] = std::move(out);
    }
  }
  if (j.contains("ik")) {
    const auto& k = j["ik"];
    const std::string kw = w + ".ik";
    expect_keys(k, {}, {"damping", "max_iterations", "step_clamp", "position_tolerance", "facing_tolerance", "facing_weight"},
                kw);
    c.ik.damping = get_number_or(k, "damping", c.ik.damping, kw);
    if (k.contains("max_iterations")) {
      if (!k["max_iterations"].is_number_integer()) fail(ErrorCode::InvalidInput, kw + ": max_iterations must be an integer");
      c.ik.max_iterations = k["max_iterations"].get<int>();
    }
    c.ik.step_clamp = get_number_or(k, "step_clamp", c.ik.step_clamp, kw);
    c.ik.position_tolerance = get_number_or(k, "position_tolerance", c.ik.position_tolerance, kw);
    c.ik.facing_tolerance = get_number_or(k, "facing_tolerance", c.ik.facing_tolerance, kw);
    c.ik.facing_weight = get_number_or(k, "facing_weight", c.ik.facing_weight, kw);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Tool and world state

inline json to_json(const ToolState& t) {
  json j{{"light_on", t.light_on}, {"light_intensity", t.light_intensity}, {"projector_on", t.projector_on}};
  if (t.projected_content) j["projected_content"] = *t.projected_content;
  return j;
}

inline ToolState tool_from_json(const json& j, const std::string& w) {
  expect_keys(j, {"light_on", "light_intensity", "projector_on"}, {"projected_content"}, w);
  ToolState t;
  t.light_on = get_bool(j, "light_on", w);
  t.light_intensity = get_number(j, "light_intensity", w);
  t.projector_on = get_bool(j, "projector_on", w);
  t.projected_content = get_optional_string(j, "projected_content", w);
  return t;
}

inline json to_json(const WorldState& s) {
  json j{{"user_position", to_array(s.user_position)}, {"objects", json::object()}, {"beat_times", s.beat_times}};
  if (s.user_attention_point) j["user_attention_point"] = to_array(*s.user_attention_point);
  for (const auto& [name, p] : s.objects) j["objects"][name] = to_array(p);
  return j;
}

inline WorldState world_from_json(const json& j, const std::string& w) {
  expect_keys(j, {"user_position"}, {"user_attention_point", "objects", "beat_times"}, w);
  WorldState s;
  s.user_position = get_vector<3>(j["user_position"], w + ".user_position");
  if (j.contains("user_attention_point"))
    s.user_attention_point = get_vector<3>(j["user_attention_point"], w + ".user_attention_point");
  if (j.contains("objects")) {
    if (!j["objects"].is_object()) fail(ErrorCode::InvalidInput, w + ".objects must be an object");
    for (const auto& [name, p] : j["objects"].items()) s.objects[name] = get_vector<3>(p, w + ".objects." + name);
  }
  if (j.contains("beat_times")) {
    if (!j["beat_times"].is_array()) fail(ErrorCode::InvalidInput, w + ".beat_times must be an array");
    for (const auto& b : j["beat_times"]) {
      if (!b.is_number()) fail(ErrorCode::InvalidInput, w + ".beat_times entries must be numbers");
      s.beat_times.push_back(b.get<double>());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Primitives

inline json to_json(const Anchor& a) {
  if (a.kind == Anchor::Kind::Time) return json{{"time", a.time}};
  return to_string(a);
}

inline Anchor anchor_from_json(const json& j, const std::string& w) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "pre") return Anchor::pre();
    if (s == "mid") return Anchor::mid();
    if (s == "post") return Anchor::post();
    if (s == "terminal-") return Anchor::terminal_minus();
    fail(ErrorCode::InvalidInput, w + ": unknown anchor '" + s + "'");
  }
  expect_keys(j, {"time"}, {}, w);
  return Anchor::at(get_number(j, "time", w));
}

inline json to_json(const PrimitiveInstance& p) {
  json params = json::object();
  for (const auto& [k, v] : p.params) std::visit([&](const auto& x) { params[k] = x; }, v);
  return json{{"kind", to_string(p.kind)}, {"params", params}, {"anchor", to_json(p.anchor)}};
}

inline PrimitiveInstance primitive_from_json(const json& j, const std::string& w) {
  expect_keys(j, {"kind"}, {"params", "anchor"}, w);
  PrimitiveInstance p;
  p.kind = parse_primitive_kind(get_string(j, "kind", w));
  if (j.contains("params")) {
    if (!j["params"].is_object()) fail(ErrorCode::InvalidInput, w + ".params must be an object");
    for (const auto& [k, v] : j["params"].items()) {
      if (v.is_number()) p.params[k] = v.get<double>();
      else if (v.is_string()) p.params[k] = v.get<std::string>();
      else fail(ErrorCode::InvalidInput, w + ".params." + k + " must be a number or a string");
    }
  }
  if (j.contains("anchor")) p.anchor = anchor_from_json(j["anchor"], w + ".anchor");
  return p;
}

inline json to_json(const std::vector<PrimitiveInstance>& plan) {
  json a = json::array();
  for (const auto& p : plan) a.push_back(to_json(p));
  return a;
}

inline std::vector<PrimitiveInstance> plan_from_json(const json& j, const std::string& w) {
  if (!j.is_array()) fail(ErrorCode::InvalidInput, w + " must be an array");
  std::vector<PrimitiveInstance> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(primitive_from_json(j[i], w + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Task

inline json to_json(const ExpressionSpec& e) {
  json j{{"weights",
          {{"intention", e.weights.intention},
           {"attention", e.weights.attention},
           {"attitude", e.weights.attitude},
           {"emotion", e.weights.emotion}}},
         {"intention_window", e.intention_window},
         {"attitude_profile",
          {{"pause_fraction", e.attitude_profile.pause_fraction},
           {"jerk_level", e.attitude_profile.jerk_level},
           {"speed_level", e.attitude_profile.speed_level}}},
         {"emotion_profile", {{"amplitude", e.emotion_profile.amplitude}, {"tempo", e.emotion_profile.tempo}}}};
  if (e.attention_target) j["attention_target"] = *e.attention_target;
  if (e.intention_target) j["intention_target"] = *e.intention_target;
  return j;
}

inline ExpressionSpec expression_from_json(const json& j, const std::string& w) {
  expect_keys(j, {"weights"},
              {"attention_target", "intention_target", "intention_window", "attitude_profile", "emotion_profile"}, w);
  ExpressionSpec e;
  const auto& wt = j["weights"];
  expect_keys(wt, {}, {"intention", "attention", "attitude", "emotion"}, w + ".weights");
  e.weights.intention = get_number_or(wt, "intention", 0.0, w);
  e.weights.attention = get_number_or(wt, "attention", 0.0, w);
  e.weights.attitude = get_number_or(wt, "attitude", 0.0, w);
  e.weights.emotion = get_number_or(wt, "emotion", 0.0, w);
  e.attention_target = get_optional_string(j, "attention_target", w);
  e.intention_target = get_optional_string(j, "intention_target", w);
  e.intention_window = get_number_or(j, "intention_window", e.intention_window, w);
  if (j.contains("attitude_profile")) {
    const auto& a = j["attitude_profile"];
    const std::string aw = w + ".attitude_profile";
    expect_keys(a, {}, {"pause_fraction", "jerk_level", "speed_level"}, aw);
    e.attitude_profile.pause_fraction = get_number_or(a, "pause_fraction", 0.0, aw);
    e.attitude_profile.jerk_level = get_number_or(a, "jerk_level", 0.0, aw);
    e.attitude_profile.speed_level = get_number_or(a, "speed_level", 0.0, aw);
  }
  if (j.contains("emotion_profile")) {
    const auto& m = j["emotion_profile"];
    const std::string mw = w + ".emotion_profile";
    expect_keys(m, {}, {"amplitude", "tempo"}, mw);
    e.emotion_profile.amplitude = get_number_or(m, "amplitude", 0.0, mw);
    e.emotion_profile.tempo = get_number_or(m, "tempo", 0.0, mw);
  }
  return e;
}

inline json to_json(const TaskSpec& t) {
  json j = document(kTaskFormat);
  j["id"] = t.id;
  j["variant"] = to_string(t.variant);
  j["orientation"] = to_string(t.orientation);
  j["agency"] = to_string(t.agency);
  if (!t.comment.empty()) j["comment"] = t.comment;
  j["start"] = to_array(t.start);
  j["start_tool"] = to_json(t.start_tool);
  if (const auto* q = std::get_if<JointVector>(&t.goal)) {
    j["goal"] = {{"joints", to_array(*q)}};
  } else {
    const auto& pg = std::get<TaskPoseGoal>(t.goal);
    json g{{"position", to_array(pg.position)}};
    if (pg.look_at) g["look_at"] = *pg.look_at;
    if (pg.facing) g["facing"] = to_array(*pg.facing);
    j["goal"] = g;
  }
  j["goal_tool"] = to_json(t.goal_tool);
  if (t.goal_target) j["goal_target"] = *t.goal_target;
  j["epsilon"] = t.epsilon;
  j["horizon"] = t.horizon;
  j["world"] = to_json(t.world);
  if (t.expression) j["expression"] = to_json(*t.expression);
  if (t.scripted_plan) j["scripted_plan"] = to_json(*t.scripted_plan);
  if (!t.utterances.empty()) {
    j["utterances"] = json::array();
    for (const auto& u : t.utterances) j["utterances"].push_back({{"time", u.time}, {"label", u.label}});
  }
  return j;
}

inline TaskSpec task_from_json(const json& j) {
  check_document(j, kTaskFormat);
  const std::string w = "task";
  expect_keys(j, {"format", "version", "id", "variant", "start", "goal", "goal_tool", "world"},
              {"orientation", "agency", "comment", "start_tool", "goal_target", "epsilon", "horizon", "expression",
               "scripted_plan", "utterances"},
              w);
  TaskSpec t;
  t.id = get_string(j, "id", w);
  const std::string variant = get_string(j, "variant", w);
  if (variant == "F") t.variant = Variant::F;
  else if (variant == "E") t.variant = Variant::E;
  else fail(ErrorCode::InvalidInput, w + ": variant must be 'F' or 'E'");
  if (j.contains("orientation")) {
    const auto o = get_string(j, "orientation", w);
    if (o == "function") t.orientation = Orientation::Function;
    else if (o == "social") t.orientation = Orientation::Social;
    else fail(ErrorCode::InvalidInput, w + ": orientation must be 'function' or 'social'");
  }
  if (j.contains("agency")) {
    const auto a = get_string(j, "agency", w);
    if (a == "proactive") t.agency = Agency::Proactive;
    else if (a == "reactive") t.agency = Agency::Reactive;
    else fail(ErrorCode::InvalidInput, w + ": agency must be 'proactive' or 'reactive'");
  }
  if (j.contains("comment")) t.comment = get_string(j, "comment", w);
  t.start = get_vector<6>(j["start"], w + ".start");
  if (j.contains("start_tool")) t.start_tool = tool_from_json(j["start_tool"], w + ".start_tool");
  const auto& g = j["goal"];
  if (g.is_object() && g.contains("joints")) {
    expect_keys(g, {"joints"}, {}, w + ".goal");
    t.goal = get_vector<6>(g["joints"], w + ".goal.joints");
  } else {
    expect_keys(g, {"position"}, {"look_at", "facing"}, w + ".goal");
    TaskPoseGoal pg;
    pg.position = get_vector<3>(g["position"], w + ".goal.position");
    pg.look_at = get_optional_string(g, "look_at", w + ".goal");
    if (g.contains("facing")) pg.facing = get_vector<3>(g["facing"], w + ".goal.facing");
    t.goal = pg;
  }
  t.goal_tool = tool_from_json(j["goal_tool"], w + ".goal_tool");
  t.goal_target = get_optional_string(j, "goal_target", w);
  t.epsilon = get_number_or(j, "epsilon", t.epsilon, w);
  t.horizon = get_number_or(j, "horizon", t.horizon, w);
  t.world = world_from_json(j["world"], w + ".world");
  if (j.contains("expression")) t.expression = expression_from_json(j["expression"], w + ".expression");
  if (j.contains("scripted_plan")) t.scripted_plan = plan_from_json(j["scripted_plan"], w + ".scripted_plan");
  if (j.contains("utterances")) {
    if (!j["utterances"].is_array()) fail(ErrorCode::InvalidInput, w + ".utterances must be an array");
    for (const auto& u : j["utterances"]) {
      expect_keys(u, {"time", "label"}, {}, w + ".utterances");
      t.utterances.push_back({get_number(u, "time", w), get_string(u, "label", w)});
    }
  }
  t.validate();
  return t;
}

inline TaskSpec task_from_text(std::string_view text) { return task_from_json(parse(text, "task")); }

// ---------------------------------------------------------------------------
// Trajectory

/// Provenance written at the top of a trajectory document.
struct TrajectoryHeader {
  std::string chain_id;
  std::string scenario;
  std::string variant;
  std::string mode;
  double gamma = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const TrajectoryHeader&) const = default;
};

inline json to_json(const Trajectory& traj, const TrajectoryHeader& h) {
  json j = document(kTrajectoryFormat);
  j["header"] = {{"chain_id", h.chain_id}, {"dt", traj.dt},     {"scenario", h.scenario}, {"variant", h.variant},
                 {"mode", h.mode},         {"gamma", h.gamma}, {"seed", h.seed}};
  json samples = json::array();
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    json s = to_json(traj.samples[i].tool);
    s["t"] = traj.time(i);
    s["q"] = to_array(traj.samples[i].q);
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  j["annotations"] = json::array();
  for (const auto& a : traj.annotations)
    j["annotations"].push_back({{"first", a.first}, {"last", a.last}, {"primitive", a.primitive}});
  return j;
}

struct TrajectoryDocument {
  TrajectoryHeader header;
  Trajectory trajectory;
};

inline TrajectoryDocument trajectory_from_json(const json& j) {
  check_document(j, kTrajectoryFormat);
  const std::string w = "trajectory";
  expect_keys(j, {"format", "version", "header", "samples"}, {"annotations"}, w);
  TrajectoryDocument d;
  const auto& h = j["header"];
  expect_keys(h, {"chain_id", "dt"}, {"scenario", "variant", "mode", "gamma", "seed"}, w + ".header");
  d.header.chain_id = get_string(h, "chain_id", w);
  d.trajectory.dt = get_number(h, "dt", w);
  if (!(d.trajectory.dt > 0.0)) fail(ErrorCode::InvalidInput, w + ": dt must be positive");
  d.header.scenario = get_optional_string(h, "scenario", w).value_or("");
  d.header.variant = get_optional_string(h, "variant", w).value_or("");
  d.header.mode = get_optional_string(h, "mode", w).value_or("");
  d.header.gamma = get_number_or(h, "gamma", 0.0, w);
  if (h.contains("seed")) d.header.seed = get_unsigned(h, "seed", w);
  if (!j["samples"].is_array()) fail(ErrorCode::InvalidInput, w + ".samples must be an array");
  for (const auto& s : j["samples"]) {
    const std::string sw = w + ".samples";
    expect_keys(s, {"t", "q", "light_on", "light_intensity", "projector_on"}, {"projected_content"}, sw);
    Sample sample;
    sample.q = get_vector<6>(s["q"], sw + ".q");
    json tool = s;
    tool.erase("t");
    tool.erase("q");
    sample.tool = tool_from_json(tool, sw);
    d.trajectory.samples.push_back(std::move(sample));
  }
  if (j.contains("annotations")) {
    if (!j["annotations"].is_array()) fail(ErrorCode::InvalidInput, w + ".annotations must be an array");
    for (const auto& a : j["annotations"]) {
      expect_keys(a, {"first", "last", "primitive"}, {}, w + ".annotations");
      d.trajectory.annotations.push_back({static_cast<std::size_t>(get_unsigned(a, "first", w)),
                                          static_cast<std::size_t>(get_unsigned(a, "last", w)),
                                          get_string(a, "primitive", w)});
    }
  }
  return d;
}

inline std::string trajectory_text(const Trajectory& traj, const TrajectoryHeader& h) { return dump(to_json(traj, h)); }

// ---------------------------------------------------------------------------
// Planner configuration

inline json to_json(const PlannerConfig& c) {
  json j = document(kPlannerFormat);
  j["gamma"] = c.gamma;
  j["seed"] = c.seed;
  j["beam_width"] = c.beam_width;
  j["max_candidates"] = c.max_candidates;
  j["max_plan_length"] = c.max_plan_length;
  j["exhaustive"] = c.exhaustive;
  j["threads"] = c.threads;
  j["dt"] = c.trajectory.dt;
  j["ramp_time"] = c.trajectory.ramp_time;
  j["catalog"] = json::array();
  for (auto k : c.catalog) j["catalog"].push_back(to_string(k));
  j["grids"] = json::object();
  for (const auto& [kind, entries] : c.grids) j["grids"][std::string(to_string(kind))] = to_json(entries);
  j["scoring"] = {{"pause_speed", c.scoring.features.pause_speed},
                  {"pause_min_duration", c.scoring.features.pause_min_duration},
                  {"speed_norm", c.scoring.speed_norm},
                  {"jerk_norm", c.scoring.jerk_norm},
                  {"amplitude_norm", c.scoring.amplitude_norm},
                  {"tempo_norm", c.scoring.tempo_norm},
                  {"detrend_window", c.scoring.detrend_window}};
  return j;
}

inline PlannerConfig planner_config_from_json(const json& j) {
  check_document(j, kPlannerFormat);
  const std::string w = "planner";
  expect_keys(j, {"format", "version"},
              {"gamma", "seed", "beam_width", "max_candidates", "max_plan_length", "exhaustive", "threads", "dt",
               "ramp_time", "catalog", "grids", "scoring"},
              w);
  PlannerConfig c = default_planner_config();
  c.gamma = get_number_or(j, "gamma", c.gamma, w);
  if (j.contains("seed")) c.seed = get_unsigned(j, "seed", w);
  if (j.contains("beam_width")) c.beam_width = get_unsigned(j, "beam_width", w);
  if (j.contains("max_candidates")) c.max_candidates = get_unsigned(j, "max_candidates", w);
  if (j.contains("max_plan_length")) c.max_plan_length = get_unsigned(j, "max_plan_length", w);
  if (j.contains("exhaustive")) c.exhaustive = get_bool(j, "exhaustive", w);
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_unsigned(j, "threads", w));
  c.trajectory.dt = get_number_or(j, "dt", c.trajectory.dt, w);
  c.trajectory.ramp_time = get_number_or(j, "ramp_time", c.trajectory.ramp_time, w);
  if (j.contains("catalog")) {
    if (!j["catalog"].is_array()) fail(ErrorCode::InvalidConfig, w + ".catalog must be an array");
    c.catalog.clear();
    for (const auto& k : j["catalog"]) {
      if (!k.is_string()) fail(ErrorCode::InvalidConfig, w + ".catalog entries must be strings");
      c.catalog.push_back(parse_primitive_kind(k.get<std::string>()));
    }
  }
  if (j.contains("grids")) {
    if (!j["grids"].is_object()) fail(ErrorCode::InvalidConfig, w + ".grids must be an object");
    c.grids.clear();
    for (const auto& [kind, entries] : j["grids"].items())
      c.grids[parse_primitive_kind(kind)] = plan_from_json(entries, w + ".grids." + kind);
  }
  if (j.contains("scoring")) {
    const auto& s = j["scoring"];
    const std::string sw = w + ".scoring";
    expect_keys(s, {},
                {"pause_speed", "pause_min_duration", "speed_norm", "jerk_norm", "amplitude_norm", "tempo_norm",
                 "detrend_window"},
                sw);
    c.scoring.features.pause_speed = get_number_or(s, "pause_speed", c.scoring.features.pause_speed, sw);
    c.scoring.features.pause_min_duration =
        get_number_or(s, "pause_min_duration", c.scoring.features.pause_min_duration, sw);
    c.scoring.speed_norm = get_number_or(s, "speed_norm", c.scoring.speed_norm, sw);
    c.scoring.jerk_norm = get_number_or(s, "jerk_norm", c.scoring.jerk_norm, sw);
    c.scoring.amplitude_norm = get_number_or(s, "amplitude_norm", c.scoring.amplitude_norm, sw);
    c.scoring.tempo_norm = get_number_or(s, "tempo_norm", c.scoring.tempo_norm, sw);
    c.scoring.detrend_window = get_number_or(s, "detrend_window", c.scoring.detrend_window, sw);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const UtilityReport& r) {
  return json{{"F", r.F},
              {"E", r.E},
              {"per_category", r.per_category},
              {"category_scores", r.category_scores},
              {"gamma", r.gamma},
              {"total", r.total}};
}

inline UtilityReport report_from_json(const json& j, const std::string& w = "report") {
  expect_keys(j, {"F", "E", "gamma", "total"}, {"per_category", "category_scores"}, w);
  UtilityReport r;
  r.F = get_number(j, "F", w);
  r.E = get_number(j, "E", w);
  r.gamma = get_number(j, "gamma", w);
  r.total = get_number(j, "total", w);
  if (j.contains("per_category")) r.per_category = j["per_category"].get<std::map<std::string, double>>();
  if (j.contains("category_scores")) r.category_scores = j["category_scores"].get<std::map<std::string, double>>();
  return r;
}

}  // namespace lampmotion::io
