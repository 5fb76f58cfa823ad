#include "decor/service.hpp"

#include <httplib.h>

#include <json.hpp>

namespace decor {

struct RouterService::Impl {
  httplib::Server server;
};

RouterService::RouterService(std::shared_ptr<const RoutingEngine> engine)
    : engine_(std::move(engine)),
      probe_([] { return true; }),
      impl_(std::make_unique<Impl>()) {
  if (!engine_) throw InvalidConfig("service requires an engine");

  impl_->server.Post(
      "/route", [this](const httplib::Request& req, httplib::Response& res) {
        auto r = handle_route(req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
      });
  impl_->server.Get(
      "/health", [this](const httplib::Request&, httplib::Response& res) {
        auto r = handle_health();
        res.status = r.status;
        res.set_content(r.body, "application/json");
      });
  impl_->server.Get(
      "/config", [this](const httplib::Request&, httplib::Response& res) {
        auto r = handle_config();
        res.status = r.status;
        res.set_content(r.body, "application/json");
      });
  impl_->server.Get(
      "/models", [this](const httplib::Request&, httplib::Response& res) {
        auto r = handle_models();
        res.status = r.status;
        res.set_content(r.body, "application/json");
      });
}

RouterService::~RouterService() { stop(); }

void RouterService::set_backend_probe(std::function<bool()> probe) {
  probe_ = std::move(probe);
}

int RouterService::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw IoError("cannot bind to " + host + ":" + std::to_string(port));
    }
    port_ = port;
  }
  server_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void RouterService::stop() {
  if (server_thread_.joinable()) {
    impl_->server.stop();
    server_thread_.join();
  }
}

namespace {

std::string error_body(const std::string& message) {
  return nlohmann::json{{"error", message}}.dump();
}

}  // namespace

RouterService::Response RouterService::handle_route(
    const std::string& body) const {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return {400, error_body("request body must be a JSON object")};
  }
  if (!j.contains("query") || !j.at("query").is_string()) {
    return {400, error_body("missing string field 'query'")};
  }
  const std::string query = j.at("query").get<std::string>();
  if (query.empty()) return {422, error_body("query must be non-empty")};

  RouteOverrides overrides;
  if (j.contains("overrides")) {
    const auto& o = j.at("overrides");
    if (!o.is_object()) {
      return {400, error_body("'overrides' must be an object")};
    }
    try {
      if (o.contains("lambda")) overrides.lambda_ = o.at("lambda").get<double>();
      if (o.contains("tau")) overrides.tau = o.at("tau").get<double>();
      if (o.contains("top_k")) overrides.top_k = o.at("top_k").get<int>();
      engine_->effective_config(overrides);
    } catch (const InvalidConfig& e) {
      return {400, error_body(e.what())};
    } catch (const nlohmann::json::exception& e) {
      return {400, error_body(e.what())};
    }
  }

  try {
    RoutingEngine::StageTiming timing;
    const RoutingDecision decision = engine_->route(query, overrides, &timing);
    nlohmann::json out{
        {"chosen_model", decision.chosen_model},
        {"ood", decision.ood},
        {"fallback_used", decision.fallback_used},
        {"trace", decision.to_json()},
        {"timing",
         {{"deconstruct_us", timing.deconstruct_us},
          {"sift_us", timing.sift_us},
          {"decide_us", timing.decide_us}}},
    };
    return {200, out.dump()};
  } catch (const BackendUnavailable& e) {
    return {503, error_body(e.what())};
  } catch (const RoutingError& e) {
    return {400, error_body(e.what())};
  }
}

RouterService::Response RouterService::handle_health() const {
  const bool reachable = probe_();
  nlohmann::json out{
      {"status", reachable ? "ok" : "degraded"},
      {"store_size", engine_->store().entries.size()},
      {"backends_reachable", reachable},
  };
  return {200, out.dump()};
}

RouterService::Response RouterService::handle_config() const {
  return {200, engine_->config().to_json().dump()};
}

RouterService::Response RouterService::handle_models() const {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& model : engine_->config().candidate_models) {
    double score_sum = 0.0, cost_sum = 0.0;
    int support = 0;
    for (const auto& entry : engine_->store().entries) {
      for (const auto& r : entry.records) {
        if (r.model == model) {
          score_sum += r.score;
          cost_sum += r.cost;
          ++support;
        }
      }
    }
    nlohmann::json m{{"model", model}, {"support", support}};
    if (support > 0) {
      m["mean_score"] = score_sum / support;
      m["mean_cost"] = cost_sum / support;
    }
    models.push_back(std::move(m));
  }
  return {200, nlohmann::json{{"models", models}}.dump()};
}

}  // namespace decor
