#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "decor/deconstruct.hpp"
#include "decor/types.hpp"

namespace decor {

/// Fixed-dimension real vector compared by cosine similarity.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Text-to-vector contract. Same text must yield the same vector for
/// deterministic kinds; `tag()` identifies the backend for cache guards.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string tag() const = 0;
};

/// Bag-of-tokens feature hashing with l2 normalization. Deterministic and
/// offline; exists so the pipeline is testable without a network embedder.
class TokenHashEmbedder : public Embedder {
 public:
  explicit TokenHashEmbedder(std::size_t dim = 256);
  EmbeddingVector embed(const std::string& text) override;
  std::string tag() const override;

  /// Bucket index of one lowercased token; exposed so tests can simulate
  /// the hashing independently.
  std::size_t bucket(const std::string& token) const;

 private:
  std::size_t dim_;
};

/// Canonical single-line form "S: a, b | K: x | D: Dn", labels sorted,
/// reasons excluded.
std::string profile_to_string(const CapabilityProfile& p);

/// Embeds the Stage B ranking key: query joined with the canonical
/// profile string.
EmbeddingVector embed_for_ranking(const std::string& query,
                                  const CapabilityProfile& p,
                                  Embedder& embedder);

double jaccard(const LabelSet& a, const LabelSet& b);

/// 1.0 when the historical difficulty covers the user's; otherwise drops
/// by 0.25 per missing level.
double difficulty_weight(DifficultyLevel d_hist, DifficultyLevel d_user);

struct StageAScore {
  double sim_sk = 0.0;   // sum of the two Jaccards, in [0,2]
  double weight = 1.0;   // difficulty calibration, in {0.25,0.5,0.75,1.0}
  double score_a = 0.0;  // sim_sk * weight
};

StageAScore stage_a_score(const CapabilityProfile& user,
                          const CapabilityProfile& hist);

struct StageACandidate {
  std::string entry_id;
  double sim_sk = 0.0;
  double weight = 1.0;
  double score_a = 0.0;
};

/// Capability-keyed postings over an immutable set of entries.
class InvertedIndex {
 public:
  static InvertedIndex build(const std::vector<HistoryEntry>& entries);

  const HistoryEntry& entry(const std::string& id) const;
  std::size_t size() const { return by_id_.size(); }

  /// Ids of entries sharing at least one skill or knowledge label with
  /// the profile.
  std::set<std::string> candidate_ids(const CapabilityProfile& p) const;

  const std::map<std::string, HistoryEntry>& entries() const {
    return by_id_;
  }

 private:
  std::map<std::string, std::set<std::string>> skill_postings_;
  std::map<std::string, std::set<std::string>> knowledge_postings_;
  std::map<std::string, HistoryEntry> by_id_;
};

/// Scores entries sharing labels with the user and keeps those at or
/// above tau, sorted by score descending then id ascending. An empty
/// result is the out-of-distribution signal.
std::vector<StageACandidate> stage_a_filter(const CapabilityProfile& user,
                                            const InvertedIndex& index,
                                            double tau);

struct RankedCandidate {
  std::string entry_id;
  double score_b = 0.0;
};

/// Top-k by cosine score, descending, ties by id ascending.
std::vector<RankedCandidate> stage_b_rank(
    const EmbeddingVector& user_vec,
    const std::vector<std::pair<std::string, EmbeddingVector>>& candidates,
    int k);

/// System prompt for the query similarity judge.
const std::string& evaluator_system_prompt();

/// Renders the judgment context: user query + decomposition followed by
/// the candidates labeled "A".."Z" in rank order.
std::string render_evaluator_prompt(
    const std::string& user_query, const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top);

struct EvaluatorVerdict {
  std::string thought;
  std::set<int> valid_positions;  // 0-based positions into the Top-k list
  bool degraded = false;  // set when a failed judge was mapped to the
                          // empty verdict by the fail-open policy
};

/// Parses the strict {"thinking","valid_representatives"} payload;
/// letters map A->0, B->1, ... An empty list is a valid OOD verdict.
EvaluatorVerdict parse_evaluator_output(const std::string& text,
                                        int num_candidates);

/// Stage C judge contract.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluatorVerdict evaluate(
      const std::string& user_query, const CapabilityProfile& user_p,
      const std::vector<const HistoryEntry*>& top) = 0;
};

/// Deterministic stand-in for the LLM judge: position i is valid iff the
/// historical entry's skills and knowledge cover the user's (exact subset
/// containment, "none" waives the knowledge check) and its difficulty is
/// not lower.
std::set<int> coverage_oracle_evaluate(
    const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top);

class CoverageOracleEvaluator : public Evaluator {
 public:
  EvaluatorVerdict evaluate(
      const std::string& user_query, const CapabilityProfile& user_p,
      const std::vector<const HistoryEntry*>& top) override;
};

/// Chat-backed Stage C judge with retry on malformed output. When
/// `fail_open` is set (the default) an exhausted retry budget degrades to
/// the empty verdict instead of failing the request.
class RemoteEvaluator : public Evaluator {
 public:
  RemoteEvaluator(std::shared_ptr<ChatBackend> backend, int max_retries = 2,
                  bool fail_open = true);
  EvaluatorVerdict evaluate(
      const std::string& user_query, const CapabilityProfile& user_p,
      const std::vector<const HistoryEntry*>& top) override;

 private:
  std::shared_ptr<ChatBackend> backend_;
  int max_retries_;
  bool fail_open_;
};

enum class OodReason { kNoStageACandidates, kEvaluatorEmpty };

std::string to_string(OodReason reason);

/// Full per-stage result of one sift.
struct SiftOutcome {
  bool matched = false;
  std::optional<OodReason> ood_reason;
  std::vector<std::string> valid_ids;  // in Top-k order; non-empty iff matched
  std::string thought;
  bool evaluator_degraded = false;  // judge failed and the fail-open
                                    // policy mapped it to an empty verdict
  std::vector<StageACandidate> stage_a_trace;
  std::vector<RankedCandidate> top_k_trace;
};

struct SiftBackends {
  Embedder* embedder = nullptr;
  Evaluator* evaluator = nullptr;
};

/// Runs Stage A -> Stage B -> Stage C over a store view with precomputed
/// entry vectors.
SiftOutcome sift(const std::string& query, const CapabilityProfile& user_p,
                 const InvertedIndex& index,
                 const std::map<std::string, EmbeddingVector>& entry_vectors,
                 const RoutingConfig& cfg, const SiftBackends& backends);

}  // namespace decor
