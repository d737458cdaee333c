#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <regex>

#include "lampmotion/app/commands.hpp"
#include "lampmotion/io/digest.hpp"
#include "lampmotion/io/serialization.hpp"

using namespace lampmotion;
using io::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const MotionError& e) {
    return e.code();
  }
  FAIL("expected a MotionError");
  return ErrorCode::InvalidInput;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lampmotion_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Restores an environment variable when the test leaves scope.
struct EnvGuard {
  std::string name;
  std::optional<std::string> saved;
  explicit EnvGuard(std::string n) : name(std::move(n)) {
    if (const char* v = std::getenv(name.c_str())) saved = v;
  }
  ~EnvGuard() {
    if (saved) ::setenv(name.c_str(), saved->c_str(), 1);
    else ::unsetenv(name.c_str());
  }
};

}  // namespace

TEST_CASE("chain round trip is byte-identical") {
  const std::string once = io::dump(io::to_json(default_chain()));
  const ChainSpec back = io::chain_from_json(io::parse(once, "chain"));
  CHECK(io::dump(io::to_json(back)) == once);
  CHECK(back.id == default_chain().id);
}

TEST_CASE("shipped chain config equals the built-in chain") {
  const std::string file = io::read_file(std::string(LAMPMOTION_CONFIG_SOURCE_DIR) + "/lamp_chain_v1.json");
  CHECK(file == io::dump(io::to_json(default_chain())));
}

TEST_CASE("shipped planner config equals the built-in catalog") {
  const std::string file = io::read_file(std::string(LAMPMOTION_CONFIG_SOURCE_DIR) + "/planner_v1.json");
  CHECK(file == io::dump(io::to_json(default_planner_config())));
}

TEST_CASE("planner config round trip") {
  PlannerConfig c = default_planner_config();
  c.gamma = 0.75;
  c.seed = 1234567890123ULL;
  c.exhaustive = true;
  c.threads = 3;
  const std::string once = io::dump(io::to_json(c));
  CHECK(io::dump(io::to_json(io::planner_config_from_json(io::parse(once, "planner")))) == once);
}

TEST_CASE("trajectory round trip is byte-identical") {
  const ChainSpec c = default_chain();
  const ScenarioPair p = build_pair(c, "project_assistance", default_planner_config());
  const io::TrajectoryHeader h{c.id, "project_assistance", "E", "scripted", 1.0, 42};
  const std::string once = io::trajectory_text(p.traj_E, h);
  const io::TrajectoryDocument doc = io::trajectory_from_json(io::parse(once, "trajectory"));
  CHECK(doc.header == h);
  CHECK(doc.trajectory == p.traj_E);
  CHECK(io::trajectory_text(doc.trajectory, doc.header) == once);
}

TEST_CASE("report round trip") {
  const ChainSpec c = default_chain();
  const ScenarioPair p = build_pair(c, "remind_water", default_planner_config());
  const json j = io::to_json(p.report_E);
  const UtilityReport back = io::report_from_json(j);
  CHECK(back.F == p.report_E.F);
  CHECK(back.E == p.report_E.E);
  CHECK(back.total == p.report_E.total);
  CHECK(back.per_category == p.report_E.per_category);
  CHECK(back.category_scores == p.report_E.category_scores);
}

TEST_CASE("loaders reject unknown fields, missing fields and wrong formats") {
  json task = io::to_json(load_scenario("remind_water", Variant::E));
  SECTION("unknown top-level field") {
    task["colour"] = "blue";
    CHECK(code_of([&] { io::task_from_json(task); }) == ErrorCode::InvalidInput);
  }
  SECTION("unknown nested field") {
    task["world"]["gravity"] = 9.81;
    CHECK(code_of([&] { io::task_from_json(task); }) == ErrorCode::InvalidInput);
  }
  SECTION("missing field") {
    task.erase("goal");
    CHECK(code_of([&] { io::task_from_json(task); }) == ErrorCode::InvalidInput);
  }
  SECTION("wrong format") {
    task["format"] = "lampmotion.chain";
    CHECK(code_of([&] { io::task_from_json(task); }) == ErrorCode::InvalidInput);
  }
  SECTION("unknown primitive") {
    task["scripted_plan"][0]["kind"] = "Somersault";
    CHECK(code_of([&] { io::task_from_json(task); }) == ErrorCode::InvalidInput);
  }
  SECTION("malformed text") { CHECK(code_of([] { io::task_from_text("{\"format\": "); }) == ErrorCode::InvalidInput); }
}

TEST_CASE("major version gates loading, minor versions are accepted") {
  json chain = io::to_json(default_chain());
  chain["version"] = "2.0";
  CHECK(code_of([&] { io::chain_from_json(chain); }) == ErrorCode::UnsupportedVersion);
  chain["version"] = "1.7";
  CHECK_NOTHROW(io::chain_from_json(chain));
  chain["version"] = "one";
  CHECK(code_of([&] { io::chain_from_json(chain); }) == ErrorCode::InvalidInput);
}

TEST_CASE("content digest") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(std::regex_match(io::content_digest("lamp"), std::regex("sha256:[0-9a-f]{64}")));
}

TEST_CASE("run_plan is deterministic down to the bytes") {
  const ChainSpec c = default_chain();
  for (auto mode : {BuildMode::Scripted, BuildMode::Searched}) {
    app::PlanRequest r;
    r.scenario = "social_conversation";
    r.mode = mode;
    r.seed = 5;
    const auto a = app::run_plan(c, r, default_planner_config());
    const auto b = app::run_plan(c, r, default_planner_config());
    CHECK(a.trajectory_text == b.trajectory_text);
    CHECK(a.digest == b.digest);
    CHECK(a.digest == io::content_digest(a.trajectory_text));
  }
}

TEST_CASE("metrics document") {
  const ChainSpec c = default_chain();
  app::PlanRequest r;
  r.scenario = "failure_indication";
  const auto out = app::run_plan(c, r, default_planner_config());
  const json m = app::metrics_json(out);
  CHECK(m["format"] == "lampmotion.metrics");
  CHECK(m["status"] == "unreachable");
  CHECK(m["trajectory_digest"] == out.digest);
  CHECK(m["samples"] == out.trajectory.samples.size());
  CHECK(io::report_from_json(m["report"]).total == out.report.total);
}

TEST_CASE("plan requests from JSON") {
  const auto r = app::plan_request_from_json(
      json{{"scenario", "remind_water"}, {"variant", "E"}, {"mode", "scripted"}, {"gamma", 0.5}, {"seed", 3}});
  CHECK(r.gamma == 0.5);
  CHECK(r.seed == 3);
  CHECK(code_of([] { app::plan_request_from_json(json{{"variant", "E"}}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { app::plan_request_from_json(json{{"scenario", "x"}, {"gamma", -1}}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { app::plan_request_from_json(json{{"scenario", "x"}, {"variant", "G"}}); }) ==
        ErrorCode::InvalidInput);
  CHECK(code_of([] { app::plan_request_from_json(json{{"scenario", "x"}, {"speed", 2}}); }) == ErrorCode::InvalidInput);
}

TEST_CASE("step overrides change the scripted plan") {
  const ChainSpec c = default_chain();
  app::PlanRequest r;
  r.scenario = "remind_water";
  const auto base = app::run_plan(c, r, default_planner_config());
  r.overrides.push_back({1, {{"duration", 2.0}}});
  const auto longer = app::run_plan(c, r, default_planner_config());
  CHECK(longer.plan[1].number("duration", 0.0) == 2.0);
  CHECK(longer.digest != base.digest);
  CHECK(longer.trajectory.terminal() == base.trajectory.terminal());

  r.overrides = {{9, {{"duration", 1.0}}}};
  CHECK(code_of([&] { app::run_plan(c, r, default_planner_config()); }) == ErrorCode::InvalidInput);
  r.overrides = {{0, {{"duration", -1.0}}}};
  CHECK(code_of([&] { app::run_plan(c, r, default_planner_config()); }) == ErrorCode::InvalidInput);
  r.overrides = {{0, {{"duration", 1.0}}}};
  r.variant = Variant::F;
  CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidInput);
}

TEST_CASE("config directory from the environment") {
  EnvGuard guard(app::kConfigDirEnv);
  const auto dir = scratch_dir("config");
  ::setenv(app::kConfigDirEnv, dir.string().c_str(), 1);
  CHECK(app::load_chain().id == default_chain().id);  // no file yet: built-in

  json chain = io::to_json(default_chain());
  chain["id"] = "lamp-tall";
  chain["joints"][1]["offset"] = json::array({0.0, 0.0, 0.30});
  io::write_file((dir / app::kChainFileName).string(), io::dump(chain));
  const ChainSpec loaded = app::load_chain();
  CHECK(loaded.id == "lamp-tall");
  CHECK(loaded.joints[1].offset.z() == 0.30);
  CHECK(app::load_chain(std::string(LAMPMOTION_CONFIG_SOURCE_DIR) + "/lamp_chain_v1.json").id == default_chain().id);

  ::unsetenv(app::kConfigDirEnv);
  CHECK(app::load_chain().id == default_chain().id);
  std::filesystem::remove_all(dir);
}

TEST_CASE("plan files are named after the request") {
  const ChainSpec c = default_chain();
  app::PlanRequest r;
  r.scenario = "play_music";
  r.variant = Variant::F;
  const auto out = app::run_plan(c, r, default_planner_config());
  const auto dir = scratch_dir("files");
  const auto files = app::write_plan_files(out, dir);
  CHECK(files.trajectory.filename() == "play_music_F.trajectory.json");
  CHECK(files.metrics.filename() == "play_music_F.metrics.json");
  CHECK(io::read_file(files.trajectory.string()) == out.trajectory_text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seeds accept any non-negative integer encoding") {
  CHECK(app::plan_request_from_json(io::parse(R"({"scenario": "x", "seed": 7})", "req")).seed == 7);
  CHECK(app::plan_request_from_json(json{{"scenario", "x"}, {"seed", 7}}).seed == 7);
  CHECK(code_of([] { app::plan_request_from_json(json{{"scenario", "x"}, {"seed", -7}}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { app::plan_request_from_json(json{{"scenario", "x"}, {"seed", 7.5}}); }) == ErrorCode::InvalidInput);
}
