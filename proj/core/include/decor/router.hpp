#pragma once

#include <memory>
#include <optional>
#include <string>

#include "decor/decision.hpp"
#include "decor/deconstruct.hpp"
#include "decor/sifting.hpp"
#include "decor/store.hpp"
#include "decor/types.hpp"

namespace decor {

/// Per-request tunable overrides; absent fields keep the engine defaults.
struct RouteOverrides {
  std::optional<double> lambda_;
  std::optional<double> tau;
  std::optional<int> top_k;
};

/// Immutable, fully wired pipeline over one store snapshot. Safe for
/// concurrent route() calls as long as the backends are.
class RoutingEngine {
 public:
  RoutingEngine(LogStore store, RoutingConfig cfg,
                std::shared_ptr<Deconstructor> deconstructor,
                std::shared_ptr<Embedder> embedder,
                std::shared_ptr<Evaluator> evaluator);

  struct StageTiming {
    double deconstruct_us = 0.0;
    double sift_us = 0.0;
    double decide_us = 0.0;
  };

  RoutingDecision route(const std::string& query,
                        const RouteOverrides& overrides = {},
                        StageTiming* timing = nullptr) const;

  /// Applies overrides to the engine config, validating the result.
  RoutingConfig effective_config(const RouteOverrides& overrides) const;

  const RoutingConfig& config() const { return cfg_; }
  const LogStore& store() const { return store_; }
  const InvertedIndex& index() const { return index_; }
  Embedder& embedder() const { return *embedder_; }

 private:
  LogStore store_;
  RoutingConfig cfg_;
  InvertedIndex index_;
  std::shared_ptr<Deconstructor> deconstructor_;
  std::shared_ptr<Embedder> embedder_;
  std::shared_ptr<Evaluator> evaluator_;
};

}  // namespace decor
