#pragma once

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "decor/router.hpp"
#include "decor/store.hpp"

namespace decor {

enum class PolicyKind { kDecor, kRandom, kKnn, kFixed, kOracle };

struct Policy {
  PolicyKind kind = PolicyKind::kDecor;
  std::string fixed_model;  // kFixed only

  std::string name() const;
};

/// Parses "decor", "random", "knn", "fixed:<model>", "oracle".
Policy parse_policy(const std::string& text);

struct CaseDecision {
  std::string case_id;
  std::string model;
  bool ood = false;
};

struct PolicyReport {
  std::string policy;
  double mean_perf = 0.0;
  double mean_cost = 0.0;
  double norm_cost = 1.0;  // mean_cost / min mean_cost among policies
  double ood_rate = 0.0;
  std::vector<CaseDecision> decisions;
};

struct ReplayReport {
  std::vector<PolicyReport> policies;

  nlohmann::json to_json() const;
};

struct ReplayOptions {
  unsigned seed = 42;  // random policy
  int knn_k = 3;
};

/// Uniform draw from the candidate pool; reproducible per generator state.
std::string random_baseline(std::mt19937& rng,
                            const std::vector<std::string>& models);

/// Nearest-neighbour outcome averaging: embeds the case, finds the k
/// closest store entries by cosine, averages each model's scores over
/// those neighbours, and returns the argmax. Ties break by lower average
/// cost, then candidate list order.
std::string knn_baseline(const HistoryEntry& test_case, const LogStore& store,
                         int k, Embedder& embedder,
                         const std::vector<std::string>& models);

/// Per-case argmax ground-truth score, ties by lower cost then list order.
std::string oracle_choice(const HistoryEntry& test_case,
                          const std::vector<std::string>& models);

/// Replays every policy over a dense testset, scoring each routing choice
/// against the case's recorded outcome. Throws MissingRecord when a case
/// lacks a record for some candidate model.
ReplayReport replay(const std::vector<HistoryEntry>& testset,
                    const std::vector<Policy>& policies,
                    const RoutingEngine& engine,
                    const ReplayOptions& opts = {});

enum class SweepParameter { kLambda, kTau };

struct SweepRow {
  double value = 0.0;
  double mean_perf = 0.0;
  double mean_cost = 0.0;
  double norm_cost = 1.0;
  double ood_rate = 0.0;
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::kLambda;
  std::vector<SweepRow> rows;

  std::string to_csv() const;
  static SweepTable from_csv(const std::string& csv);
};

/// One replay of the router policy per grid value, with the parameter
/// overridden. Grid values outside the parameter range raise
/// InvalidGridValue.
SweepTable sweep(SweepParameter parameter, const std::vector<double>& grid,
                 const std::vector<HistoryEntry>& testset,
                 const RoutingEngine& engine);

struct SynthSpec {
  int families = 3;
  int entries_per_family = 5;
  int models = 4;
  unsigned seed = 7;
  int test_queries_per_family = 20;
};

/// Deterministic synthetic corpus whose optimal route is known by
/// construction: each family has disjoint labels and one designed-best
/// model that dominates the rest on both score and cost. Queries embed
/// the family token so the keyword deconstructor recovers the profile.
struct SynthCorpus {
  LogStore store;                      // with token-hash vectors
  std::vector<HistoryEntry> testset;   // dense records
  RoutingConfig config;
  std::vector<KeywordRule> rules;      // for the keyword deconstructor
  std::vector<std::string> best_model_per_family;

  /// Family of a synthetic query, or -1 for none.
  static int family_of(const std::string& query);
};

SynthCorpus generate_synthetic_corpus(const SynthSpec& spec);

}  // namespace decor
