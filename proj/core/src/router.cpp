#include "decor/router.hpp"

#include <chrono>

namespace decor {

RoutingEngine::RoutingEngine(LogStore store, RoutingConfig cfg,
                             std::shared_ptr<Deconstructor> deconstructor,
                             std::shared_ptr<Embedder> embedder,
                             std::shared_ptr<Evaluator> evaluator)
    : store_(std::move(store)),
      cfg_(std::move(cfg)),
      index_(store_.build_index()),
      deconstructor_(std::move(deconstructor)),
      embedder_(std::move(embedder)),
      evaluator_(std::move(evaluator)) {
  cfg_.validate();
  if (!deconstructor_ || !embedder_ || !evaluator_) {
    throw InvalidConfig("routing engine requires all three backends");
  }
}

RoutingConfig RoutingEngine::effective_config(
    const RouteOverrides& overrides) const {
  RoutingConfig cfg = cfg_;
  if (overrides.lambda_) cfg.lambda_ = *overrides.lambda_;
  if (overrides.tau) cfg.tau = *overrides.tau;
  if (overrides.top_k) cfg.top_k = *overrides.top_k;
  cfg.validate();
  return cfg;
}

RoutingDecision RoutingEngine::route(const std::string& query,
                                     const RouteOverrides& overrides,
                                     StageTiming* timing) const {
  if (query.empty()) throw EmptyQuery();
  const RoutingConfig cfg = effective_config(overrides);

  using clock = std::chrono::steady_clock;
  auto elapsed_us = [](clock::time_point from, clock::time_point to) {
    return std::chrono::duration<double, std::micro>(to - from).count();
  };

  const auto t0 = clock::now();
  const CapabilityProfile profile = deconstructor_->deconstruct(query);
  const auto t1 = clock::now();
  SiftBackends backends{embedder_.get(), evaluator_.get()};
  const SiftOutcome outcome =
      sift(query, profile, index_, store_.vectors, cfg, backends);
  const auto t2 = clock::now();
  RoutingDecision decision = decide(outcome, index_, cfg);
  const auto t3 = clock::now();

  if (timing) {
    timing->deconstruct_us = elapsed_us(t0, t1);
    timing->sift_us = elapsed_us(t1, t2);
    timing->decide_us = elapsed_us(t2, t3);
  }
  return decision;
}

}  // namespace decor
