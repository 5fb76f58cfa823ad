#include "decor/decision.hpp"

#include <algorithm>
#include <limits>

namespace decor {

std::vector<double> normalize_min_max(const std::vector<double>& values,
                                      NormalizeDirection direction,
                                      double epsilon) {
  if (values.empty()) {
    throw InvalidConfig("normalize_min_max needs at least one value");
  }
  if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be positive");
  const auto [min_it, max_it] =
      std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const double denom = hi - lo + epsilon;

  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) {
    out.push_back(direction == NormalizeDirection::kBenefit
                      ? (x - lo) / denom
                      : (hi - x) / denom);
  }
  return out;
}

std::vector<ModelAggregate> aggregate_records(
    const std::vector<const HistoryEntry*>& entries,
    const std::vector<std::string>& models) {
  if (entries.empty()) {
    throw InvalidConfig("aggregate_records needs matched entries");
  }
  std::vector<ModelAggregate> out;
  for (const auto& model : models) {
    ModelAggregate agg{model, 0.0, 0.0, 0};
    for (const auto* entry : entries) {
      for (const auto& r : entry->records) {
        if (r.model == model) {
          agg.mean_score += r.score;
          agg.mean_cost += r.cost;
          ++agg.support;
        }
      }
    }
    if (agg.support > 0) {
      agg.mean_score /= agg.support;
      agg.mean_cost /= agg.support;
      out.push_back(agg);
    }
  }
  if (out.empty()) throw NoEligibleModels();
  return out;
}

Selection select_model(const std::vector<ModelAggregate>& aggregates,
                       double lambda_, double epsilon) {
  if (aggregates.empty()) {
    throw InvalidConfig("select_model needs aggregates");
  }
  std::vector<double> scores, costs;
  scores.reserve(aggregates.size());
  costs.reserve(aggregates.size());
  for (const auto& a : aggregates) {
    scores.push_back(a.mean_score);
    costs.push_back(a.mean_cost);
  }
  const auto v_norm =
      normalize_min_max(scores, NormalizeDirection::kBenefit, epsilon);
  const auto c_norm =
      normalize_min_max(costs, NormalizeDirection::kCost, epsilon);

  // Utilities whose gap is attributable to the epsilon guard count as
  // tied, so the raw-mean tie rules stay reachable.
  constexpr double kTieTolerance = 1e-6;

  Selection sel;
  std::size_t best = 0;
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    UtilityRow row;
    row.model = aggregates[i].model;
    row.v_norm = v_norm[i];
    row.c_norm = c_norm[i];
    row.utility = lambda_ * v_norm[i] + (1.0 - lambda_) * c_norm[i];
    sel.rows.push_back(row);

    if (i == 0) continue;
    const auto& cur = sel.rows[i];
    const auto& top = sel.rows[best];
    if (cur.utility > top.utility + kTieTolerance ||
        (cur.utility > top.utility - kTieTolerance &&
         (aggregates[i].mean_score > aggregates[best].mean_score ||
          (aggregates[i].mean_score == aggregates[best].mean_score &&
           aggregates[i].mean_cost < aggregates[best].mean_cost)))) {
      best = i;
    }
  }
  sel.chosen = aggregates[best].model;
  return sel;
}

std::string to_string(FallbackReason reason) {
  switch (reason) {
    case FallbackReason::kNone:
      return "none";
    case FallbackReason::kNoStageACandidates:
      return "no-stage-a-candidates";
    case FallbackReason::kEvaluatorEmpty:
      return "evaluator-empty";
    case FallbackReason::kNoEligibleModels:
      return "no-eligible-models";
  }
  return "unknown";
}

nlohmann::json RoutingDecision::to_json() const {
  nlohmann::json stage_a = nlohmann::json::array();
  for (const auto& c : sift.stage_a_trace) {
    stage_a.push_back({{"entry_id", c.entry_id},
                       {"sim_sk", c.sim_sk},
                       {"weight", c.weight},
                       {"score_a", c.score_a}});
  }
  nlohmann::json top_k = nlohmann::json::array();
  for (const auto& r : sift.top_k_trace) {
    top_k.push_back({{"entry_id", r.entry_id}, {"score_b", r.score_b}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : aggregates) {
    aggs.push_back({{"model", a.model},
                    {"mean_score", a.mean_score},
                    {"mean_cost", a.mean_cost},
                    {"support", a.support}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : utility_rows) {
    rows.push_back({{"model", r.model},
                    {"v_norm", r.v_norm},
                    {"c_norm", r.c_norm},
                    {"utility", r.utility}});
  }
  return nlohmann::json{
      {"chosen_model", chosen_model},
      {"ood", ood},
      {"fallback_used", fallback_used},
      {"fallback_reason", to_string(fallback_reason)},
      {"evaluator_degraded", sift.evaluator_degraded},
      {"stage_a", stage_a},
      {"top_k", top_k},
      {"valid_ids", sift.valid_ids},
      {"thought", sift.thought},
      {"aggregates", aggs},
      {"utility_rows", rows},
      {"config", config.to_json()},
  };
}

RoutingDecision decide(const SiftOutcome& outcome, const InvertedIndex& index,
                       const RoutingConfig& cfg) {
  cfg.validate();
  RoutingDecision d;
  d.sift = outcome;
  d.config = cfg;

  if (!outcome.matched) {
    d.chosen_model = cfg.fallback_model;
    d.ood = true;
    d.fallback_used = true;
    d.fallback_reason =
        outcome.ood_reason == OodReason::kNoStageACandidates
            ? FallbackReason::kNoStageACandidates
            : FallbackReason::kEvaluatorEmpty;
    return d;
  }

  std::vector<const HistoryEntry*> matched;
  matched.reserve(outcome.valid_ids.size());
  for (const auto& id : outcome.valid_ids) {
    matched.push_back(&index.entry(id));
  }

  try {
    d.aggregates = aggregate_records(matched, cfg.candidate_models);
  } catch (const NoEligibleModels&) {
    d.chosen_model = cfg.fallback_model;
    d.fallback_used = true;
    d.fallback_reason = FallbackReason::kNoEligibleModels;
    return d;
  }

  auto sel = select_model(d.aggregates, cfg.lambda_, cfg.epsilon);
  d.chosen_model = sel.chosen;
  d.utility_rows = std::move(sel.rows);
  return d;
}

}  // namespace decor
