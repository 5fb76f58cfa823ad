#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "decor/sifting.hpp"
#include "decor/types.hpp"

namespace decor {

/// Per-model means over the matched entries.
struct ModelAggregate {
  std::string model;
  double mean_score = 0.0;
  double mean_cost = 0.0;
  int support = 0;  // entries contributing records
};

struct UtilityRow {
  std::string model;
  double v_norm = 0.0;
  double c_norm = 0.0;
  double utility = 0.0;
};

enum class NormalizeDirection { kBenefit, kCost };

/// Min-max normalization with an epsilon-guarded denominator; cost
/// direction inverts so that cheaper is higher.
std::vector<double> normalize_min_max(const std::vector<double>& values,
                                      NormalizeDirection direction,
                                      double epsilon);

/// Means of each candidate model's scores and costs over the entries in
/// which it appears. Models with no records are omitted; throws
/// NoEligibleModels when that leaves nothing. Output preserves candidate
/// list order.
std::vector<ModelAggregate> aggregate_records(
    const std::vector<const HistoryEntry*>& entries,
    const std::vector<std::string>& models);

struct Selection {
  std::string chosen;
  std::vector<UtilityRow> rows;  // in aggregate order
};

/// Scalarized argmax over normalized performance and cost. Ties break by
/// higher raw mean score, then lower raw mean cost, then input order.
Selection select_model(const std::vector<ModelAggregate>& aggregates,
                       double lambda_, double epsilon);

/// Why the fallback model was used, when it was.
enum class FallbackReason { kNone, kNoStageACandidates, kEvaluatorEmpty,
                            kNoEligibleModels };

std::string to_string(FallbackReason reason);

struct RoutingDecision {
  std::string chosen_model;
  bool ood = false;
  bool fallback_used = false;
  FallbackReason fallback_reason = FallbackReason::kNone;
  SiftOutcome sift;
  std::vector<ModelAggregate> aggregates;
  std::vector<UtilityRow> utility_rows;
  RoutingConfig config;

  /// Stable JSON trace consumed by the service and harness.
  nlohmann::json to_json() const;
};

/// Total decision: matched outcomes run the empirical procedure, both OOD
/// cases and a matched-but-model-free store fall back.
RoutingDecision decide(const SiftOutcome& outcome, const InvertedIndex& index,
                       const RoutingConfig& cfg);

}  // namespace decor
