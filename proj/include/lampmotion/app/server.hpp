/**
 * @file server.hpp
 * @brief Local HTTP endpoint for the design studio.
 *
 * Routes (JSON bodies):
 *   GET  /v1/health            {"status":"ok"}
 *   GET  /v1/scenarios         scenario descriptors
 *   POST /v1/plan              {"metrics": ..., "trajectory": ...}
 *   POST /v1/plan/trajectory   trajectory document, byte-identical to the CLI file
 *   POST /v1/plan/poses        {"trajectory_digest": ..., "poses": [...]} per-sample FK for rendering
 *
 * Errors return {"error": {"code", "message"}} with 400 for malformed or
 * invalid requests, 404 for unknown scenarios, 422 for plans that cannot be
 * built and 500 otherwise. Requests are independent; the server keeps no
 * state between them.
 */
#pragma once

#include <functional>
#include <string>

// Eigen must be parsed before httplib: <resolv.h> defines a `_res` macro that
// clashes with Eigen parameter names.
#include "lampmotion/app/commands.hpp"

#include <httplib.h>

namespace lampmotion::app {

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidConfig:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::TargetMissing: return 400;
    case ErrorCode::UnknownScenario: return 404;
    case ErrorCode::Unreachable:
    case ErrorCode::Infeasible: return 422;
    case ErrorCode::InvariantViolation: return 500;
  }
  return 500;
}

inline constexpr const char* kJsonType = "application/json";

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8765;
};

/// Registers the routes on `server`. `chain` and `config` are copied and
/// shared read-only by the handler threads.
inline void install_routes(httplib::Server& server, ChainSpec chain, PlannerConfig config) {
  const auto guarded = [](const std::function<void(const httplib::Request&, httplib::Response&)>& handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const MotionError& e) {
        res.status = http_status_for(e.code());
        res.set_content(error_json(e.code(), e.what()).dump(), kJsonType);
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump(), kJsonType);
      }
    };
  };
  const auto plan = [chain, config](const httplib::Request& req) {
    return run_plan(chain, plan_request_from_json(io::parse(req.body, "plan request")), config);
  };

  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", kJsonType);
  });
  server.Get("/v1/scenarios", guarded([](const httplib::Request&, httplib::Response& res) {
               res.set_content(io::dump(scenarios_json()), kJsonType);
             }));
  server.Post("/v1/plan", guarded([plan](const httplib::Request& req, httplib::Response& res) {
                const PlanOutput out = plan(req);
                json body{{"metrics", metrics_json(out)}, {"trajectory", io::parse(out.trajectory_text, "trajectory")}};
                res.set_content(io::dump(body), kJsonType);
              }));
  server.Post("/v1/plan/trajectory", guarded([plan](const httplib::Request& req, httplib::Response& res) {
                res.set_content(plan(req).trajectory_text, kJsonType);
              }));
  server.Post("/v1/plan/poses", guarded([plan, chain](const httplib::Request& req, httplib::Response& res) {
                const PlanOutput out = plan(req);
                json body{{"trajectory_digest", out.digest},
                          {"dt", out.trajectory.dt},
                          {"annotations", io::to_json(out.trajectory, out.header)["annotations"]},
                          {"poses", poses_json(chain, out.trajectory)}};
                res.set_content(io::dump(body), kJsonType);
              }));
}

/// Blocks serving requests until the server is stopped.
inline bool serve(const ServerOptions& options, const ChainSpec& chain, const PlannerConfig& config) {
  httplib::Server server;
  install_routes(server, chain, config);
  return server.listen(options.host, options.port);
}

}  // namespace lampmotion::app
