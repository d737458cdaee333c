// Command-line front end: plan, compare, sweep, serve and document dumps.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "lampmotion/app/commands.hpp"
#include "lampmotion/app/server.hpp"

namespace lm = lampmotion;
namespace app = lampmotion::app;

namespace {

struct Common {
  std::string chain_path;
  std::string planner_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool exhaustive = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--chain", c.chain_path, "Chain config document (default: $LAMPMOTION_CONFIG_DIR/lamp_chain_v1.json, else built-in)");
  cmd->add_option("--planner", c.planner_path, "Planner config document (default: built-in catalog)");
  cmd->add_option("--seed", c.seed, "Search seed");
  cmd->add_option("--threads", c.threads, "Candidate evaluation threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--exhaustive", c.exhaustive, "Score every plan up to the length cap instead of beam search");
}

lm::PlannerConfig planner_for(const Common& c) {
  lm::PlannerConfig config = app::load_planner_config(c.planner_path);
  config.seed = c.seed;
  config.threads = c.threads;
  if (c.exhaustive) config.exhaustive = true;
  return config;
}

lm::Variant parse_variant(const std::string& v) {
  if (v == "F") return lm::Variant::F;
  if (v == "E") return lm::Variant::E;
  lm::fail(lm::ErrorCode::InvalidInput, "variant must be F or E");
}

void print(const app::json& j) { std::cout << lm::io::dump(j); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"lampmotion: function- and expression-driven motion for a 6-DOF lamp robot"};
  cli.require_subcommand(1);

  Common common;
  std::string scenario, variant = "E", mode = "scripted", out_dir = ".";
  double gamma = 1.0;

  auto* plan = cli.add_subcommand("plan", "Plan one scenario variant and write trajectory + metrics files");
  plan->add_option("--scenario", scenario, "Built-in scenario name")->required();
  plan->add_option("--variant", variant, "F or E")->check(CLI::IsMember({"F", "E"}));
  plan->add_option("--gamma", gamma, "Weight of the expressive utility");
  plan->add_option("--mode", mode, "E-variant source")->check(CLI::IsMember({"scripted", "searched"}));
  plan->add_option("--out", out_dir, "Output directory");
  add_common(plan, common);

  bool all = false;
  auto* compare = cli.add_subcommand("compare", "Plan both variants and check the pair invariants");
  compare->add_option("--scenario", scenario, "Built-in scenario name");
  compare->add_flag("--all", all, "Compare every built-in scenario");
  compare->add_option("--gamma", gamma, "Weight of the expressive utility");
  compare->add_option("--mode", mode, "E-variant source")->check(CLI::IsMember({"scripted", "searched"}));
  add_common(compare, common);

  std::vector<double> gammas;
  auto* sweep = cli.add_subcommand("sweep", "Plan at several gammas and tabulate F, E and total");
  sweep->add_option("--scenario", scenario, "Built-in scenario name")->required();
  sweep->add_option("--gammas", gammas, "Gamma values")->delimiter(',');
  add_common(sweep, common);

  app::ServerOptions server_options;
  auto* serve = cli.add_subcommand("serve", "Run the local HTTP endpoint used by the studio");
  serve->add_option("--port", server_options.port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", server_options.host, "Bind address (loopback by default)");
  add_common(serve, common);

  auto* list = cli.add_subcommand("scenarios", "List built-in scenarios");
  auto* show = cli.add_subcommand("task", "Print a built-in scenario's task document");
  show->add_option("--scenario", scenario, "Built-in scenario name")->required();
  show->add_option("--variant", variant, "F or E")->check(CLI::IsMember({"F", "E"}));
  auto* chain_cmd = cli.add_subcommand("chain", "Print the active chain config document");
  chain_cmd->add_option("--chain", common.chain_path, "Chain config document");
  auto* planner_cmd = cli.add_subcommand("planner", "Print the active planner config document");
  planner_cmd->add_option("--planner", common.planner_path, "Planner config document");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? app::kExitOk : app::kExitInvalidInput;
  }

  try {
    if (*list) {
      print(app::scenarios_json());
      return app::kExitOk;
    }
    if (*show) {
      print(lm::io::to_json(lm::load_scenario(scenario, parse_variant(variant))));
      return app::kExitOk;
    }
    if (*planner_cmd) {
      print(lm::io::to_json(app::load_planner_config(common.planner_path)));
      return app::kExitOk;
    }
    const lm::ChainSpec chain = app::load_chain(common.chain_path);
    if (*chain_cmd) {
      print(lm::io::to_json(chain));
      return app::kExitOk;
    }
    lm::PlannerConfig config = planner_for(common);

    if (*plan) {
      app::PlanRequest request;
      request.scenario = scenario;
      request.variant = parse_variant(variant);
      request.mode = lm::parse_build_mode(mode);
      request.gamma = gamma;
      request.seed = common.seed;
      const app::PlanOutput out = app::run_plan(chain, request, config);
      const app::WrittenFiles files = app::write_plan_files(out, out_dir);
      std::cout << files.trajectory.string() << "\n" << files.metrics.string() << "\n";
      std::cout << "F=" << out.report.F << " E=" << out.report.E << " total=" << out.report.total
                << " digest=" << out.digest << "\n";
      if (out.unreachable) {
        std::cerr << "unreachable: " << out.message << " (attempt written)\n";
        return app::kExitUnreachable;
      }
      return app::kExitOk;
    }

    if (*compare) {
      if (!(gamma >= 0.0)) lm::fail(lm::ErrorCode::InvalidInput, "gamma must be >= 0");
      config.gamma = gamma;
      std::vector<std::string> names;
      if (all) names = lm::scenario_names();
      else if (!scenario.empty()) names.push_back(scenario);
      else lm::fail(lm::ErrorCode::InvalidInput, "compare needs --scenario or --all");
      app::json reports = app::json::array();
      bool ok = true;
      for (const auto& name : names) {
        const lm::ScenarioPair p = lm::build_pair(chain, name, config, lm::parse_build_mode(mode));
        reports.push_back(app::pair_json(p, gamma, common.seed));
        if (!p.ok()) {
          ok = false;
          for (const auto& c : p.checks)
            if (!c.ok) std::cerr << name << ": invariant '" << c.name << "' failed\n";
        }
      }
      print(reports.size() == 1 ? reports[0] : reports);
      return ok ? app::kExitOk : app::kExitInvariant;
    }

    if (*sweep) {
      if (gammas.empty()) lm::fail(lm::ErrorCode::InvalidInput, "sweep needs at least one gamma (--gammas 0,0.5,1)");
      const app::SweepTable table = app::run_sweep(chain, scenario, gammas, config);
      std::printf("%8s %8s %12s %12s\n", "gamma", "F", "E", "total");
      for (const auto& r : table.rows)
        std::printf("%8g %8g %12.6f %12.6f\n", r.gamma, r.result.report.F, r.result.report.E, r.result.report.total);
      if (config.exhaustive && !table.monotone) {
        std::cerr << "E is not non-decreasing in gamma\n";
        return app::kExitInvariant;
      }
      return app::kExitOk;
    }

    if (*serve) {
      std::cerr << "serving on http://" << server_options.host << ":" << server_options.port << "\n";
      if (!app::serve(server_options, chain, config)) {
        std::cerr << "cannot listen on " << server_options.host << ":" << server_options.port << "\n";
        return app::kExitFailure;
      }
      return app::kExitOk;
    }
  } catch (const lm::MotionError& e) {
    std::cerr << "error [" << lm::to_string(e.code()) << "]: " << e.what() << "\n";
    return app::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitFailure;
  }
  return app::kExitOk;
}
