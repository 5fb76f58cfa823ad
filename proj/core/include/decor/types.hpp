#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "decor/errors.hpp"

namespace decor {

/// Four-level cognitive-load scale, D0 (trivial) through D3 (deep reasoning).
class DifficultyLevel {
 public:
  DifficultyLevel() = default;
  explicit DifficultyLevel(int level);

  int level() const { return level_; }
  std::string to_string() const;

  auto operator<=>(const DifficultyLevel&) const = default;

 private:
  int level_ = 0;
};

/// Parses "D0".."D3"; case-insensitive after trimming.
DifficultyLevel parse_difficulty(std::string_view text);

/// Lowercases, trims, collapses internal whitespace runs to one space.
/// Throws EmptyLabel when nothing remains.
std::string normalize_label(std::string_view text);

using LabelSet = std::set<std::string>;

/// Structured capability requirements of one query: skills, knowledge
/// domains, and difficulty, each with a short rationale.
struct CapabilityProfile {
  LabelSet skills;
  std::string skills_reason;
  LabelSet knowledge;
  std::string knowledge_reason;
  DifficultyLevel difficulty;
  std::string difficulty_reason;

  /// Throws InvalidProfile on empty sets, un-normalized labels, or a
  /// "none" knowledge marker mixed with other domains.
  void validate() const;

  nlohmann::json to_json() const;
  static CapabilityProfile from_json(const nlohmann::json& j);

  bool operator==(const CapabilityProfile&) const = default;
};

/// One historical (model, score, cost) outcome.
struct ExecutionRecord {
  std::string model;
  double score = 0.0;  // normalized to [0,1]
  double cost = 0.0;   // abstract non-negative units

  void validate() const;
  bool operator==(const ExecutionRecord&) const = default;
};

/// One historical query with its profile and per-model outcomes.
struct HistoryEntry {
  std::string id;
  std::string query;
  CapabilityProfile profile;
  std::vector<ExecutionRecord> records;

  void validate() const;
  bool operator==(const HistoryEntry&) const = default;
};

/// Every tunable of the routing pipeline.
struct RoutingConfig {
  double tau = 0.5;        // Stage A threshold on the raw [0,2] score scale
  int top_k = 3;           // Stage B survivors
  double lambda_ = 0.5;    // utility weight on performance
  double epsilon = 1e-9;   // normalization guard
  std::string fallback_model;
  std::vector<std::string> candidate_models;

  void validate() const;

  nlohmann::json to_json() const;
  static RoutingConfig from_json(const nlohmann::json& j);

  bool operator==(const RoutingConfig&) const = default;
};

/// Alignment reward between a predicted representative set and the truth.
/// Cases are checked top-down: exact match, spurious prediction against an
/// empty truth, total miss, then the partial-credit balance.
double reward(const std::set<int>& predicted, const std::set<int>& truth);

}  // namespace decor
