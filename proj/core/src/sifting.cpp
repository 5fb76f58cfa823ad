#include "decor/sifting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace decor {

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) throw DimensionMismatch(u.dim(), v.dim());
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  nu = std::sqrt(nu);
  nv = std::sqrt(nv);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return dot / (nu * nv);
}

TokenHashEmbedder::TokenHashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw InvalidConfig("embedding dimension must be positive");
}

std::size_t TokenHashEmbedder::bucket(const std::string& token) const {
  // FNV-1a, fixed so vectors are stable across platforms and runs.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h % dim_);
}

EmbeddingVector TokenHashEmbedder::embed(const std::string& text) {
  EmbeddingVector out;
  out.values.assign(dim_, 0.0);
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      out.values[bucket(token)] += 1.0;
      token.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  double norm = 0.0;
  for (double x : out.values) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : out.values) x /= norm;
  }
  return out;
}

std::string TokenHashEmbedder::tag() const {
  return "token-hash-fnv1a-" + std::to_string(dim_);
}

std::string profile_to_string(const CapabilityProfile& p) {
  std::ostringstream out;
  out << "S: ";
  bool first = true;
  for (const auto& s : p.skills) {
    if (!first) out << ", ";
    out << s;
    first = false;
  }
  out << " | K: ";
  first = true;
  for (const auto& k : p.knowledge) {
    if (!first) out << ", ";
    out << k;
    first = false;
  }
  out << " | D: " << p.difficulty.to_string();
  return out.str();
}

EmbeddingVector embed_for_ranking(const std::string& query,
                                  const CapabilityProfile& p,
                                  Embedder& embedder) {
  if (query.empty()) throw EmptyQuery();
  return embedder.embed(query + " || " + profile_to_string(p));
}

double jaccard(const LabelSet& a, const LabelSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double difficulty_weight(DifficultyLevel d_hist, DifficultyLevel d_user) {
  if (d_hist >= d_user) return 1.0;
  return 1.0 - 0.25 * static_cast<double>(d_user.level() - d_hist.level());
}

StageAScore stage_a_score(const CapabilityProfile& user,
                          const CapabilityProfile& hist) {
  StageAScore s;
  s.sim_sk = jaccard(user.skills, hist.skills) +
             jaccard(user.knowledge, hist.knowledge);
  s.weight = difficulty_weight(hist.difficulty, user.difficulty);
  s.score_a = s.sim_sk * s.weight;
  return s;
}

InvertedIndex InvertedIndex::build(const std::vector<HistoryEntry>& entries) {
  InvertedIndex idx;
  for (const auto& e : entries) {
    e.validate();
    if (!idx.by_id_.emplace(e.id, e).second) throw DuplicateId(e.id);
    for (const auto& s : e.profile.skills) {
      idx.skill_postings_[s].insert(e.id);
    }
    for (const auto& k : e.profile.knowledge) {
      idx.knowledge_postings_[k].insert(e.id);
    }
  }
  return idx;
}

const HistoryEntry& InvertedIndex::entry(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw RoutingError("unknown entry id: '" + id + "'");
  }
  return it->second;
}

std::set<std::string> InvertedIndex::candidate_ids(
    const CapabilityProfile& p) const {
  std::set<std::string> ids;
  for (const auto& s : p.skills) {
    auto it = skill_postings_.find(s);
    if (it != skill_postings_.end()) {
      ids.insert(it->second.begin(), it->second.end());
    }
  }
  for (const auto& k : p.knowledge) {
    auto it = knowledge_postings_.find(k);
    if (it != knowledge_postings_.end()) {
      ids.insert(it->second.begin(), it->second.end());
    }
  }
  return ids;
}

std::vector<StageACandidate> stage_a_filter(const CapabilityProfile& user,
                                            const InvertedIndex& index,
                                            double tau) {
  // Entries sharing no label have sim_sk = 0 < tau for any tau > 0, so the
  // postings union is equivalent to a full scan.
  std::vector<StageACandidate> out;
  for (const auto& id : index.candidate_ids(user)) {
    const auto s = stage_a_score(user, index.entry(id).profile);
    if (s.score_a >= tau) {
      out.push_back({id, s.sim_sk, s.weight, s.score_a});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const StageACandidate& a, const StageACandidate& b) {
              if (a.score_a != b.score_a) return a.score_a > b.score_a;
              return a.entry_id < b.entry_id;
            });
  return out;
}

std::vector<RankedCandidate> stage_b_rank(
    const EmbeddingVector& user_vec,
    const std::vector<std::pair<std::string, EmbeddingVector>>& candidates,
    int k) {
  if (k < 1) throw InvalidConfig("stage B k must be >= 1");
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& [id, vec] : candidates) {
    ranked.push_back({id, cosine(user_vec, vec)});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.score_b != b.score_b) return a.score_b > b.score_b;
              return a.entry_id < b.entry_id;
            });
  if (ranked.size() > static_cast<std::size_t>(k)) {
    ranked.resize(static_cast<std::size_t>(k));
  }
  return ranked;
}

const std::string& evaluator_system_prompt() {
  static const std::string kPrompt =
      "You are a Query Similarity Judge. Your task is to determine which "
      "historical queries can represent the user's query in terms of "
      "capability requirements.";
  return kPrompt;
}

std::string render_evaluator_prompt(
    const std::string& user_query, const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top) {
  if (top.empty()) throw InvalidConfig("evaluator needs >= 1 candidate");
  if (top.size() > 26) throw TooManyCandidates(top.size());

  std::ostringstream out;
  out << "Judgment Criteria:\n"
      << "1. Skills (S): Historical query skills should cover user query "
         "skills (semantic similarity allowed).\n"
      << "2. Knowledge (K): Historical query domains should cover user "
         "query domains.\n"
      << "3. Difficulty (D): Historical difficulty must be >= User "
         "difficulty (D0 < D1 < D2 < D3).\n\n"
      << "User Query & Historical Pool:\n"
      << "User Query: " << user_query << "\n"
      << "Decomposition: " << profile_to_string(user_p) << "\n\n"
      << "Historical Queries:\n";
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& e = *top[i];
    out << static_cast<char>('A' + i) << ". " << e.query << "\n"
        << "   Decomposition: " << profile_to_string(e.profile) << "\n";
  }
  out << "\nInstructions:\n"
      << "1. Analyze User Query requirements.\n"
      << "2. Compare each historical query against the User Query based on "
         "S, K, and D.\n"
      << "3. Determine which queries are valid representatives.\n\n"
      << "Output Format (STRICT JSON):\n"
      << "{\n"
      << "  \"thinking\": \"Brief justification (max 150 words).\",\n"
      << "  \"valid_representatives\": [\"A\", \"B\"]\n"
      << "}\n";
  return out.str();
}

EvaluatorVerdict parse_evaluator_output(const std::string& text,
                                        int num_candidates) {
  if (num_candidates < 1) {
    throw InvalidConfig("num_candidates must be >= 1");
  }
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw MalformedJson("evaluator payload is not valid JSON");
  }
  if (!j.contains("thinking")) throw MissingField("thinking");
  if (!j.contains("valid_representatives")) {
    throw MissingField("valid_representatives");
  }

  EvaluatorVerdict verdict;
  verdict.thought = j.at("thinking").get<std::string>();
  const auto& arr = j.at("valid_representatives");
  if (!arr.is_array()) {
    throw MalformedJson("valid_representatives must be an array");
  }
  for (const auto& v : arr) {
    const auto letter = v.get<std::string>();
    if (letter.size() != 1 || letter[0] < 'A' ||
        letter[0] >= 'A' + num_candidates) {
      throw UnknownLabelLetter(letter);
    }
    verdict.valid_positions.insert(letter[0] - 'A');
  }
  return verdict;
}

namespace {

bool is_subset(const LabelSet& needle, const LabelSet& haystack) {
  return std::all_of(needle.begin(), needle.end(), [&](const std::string& x) {
    return haystack.count(x) > 0;
  });
}

}  // namespace

std::set<int> coverage_oracle_evaluate(
    const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top) {
  std::set<int> valid;
  const bool no_knowledge_needed =
      user_p.knowledge.size() == 1 && user_p.knowledge.count("none") == 1;
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& hist = top[i]->profile;
    if (!is_subset(user_p.skills, hist.skills)) continue;
    if (!no_knowledge_needed && !is_subset(user_p.knowledge, hist.knowledge)) {
      continue;
    }
    if (hist.difficulty < user_p.difficulty) continue;
    valid.insert(static_cast<int>(i));
  }
  return valid;
}

EvaluatorVerdict CoverageOracleEvaluator::evaluate(
    const std::string& user_query, const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top) {
  (void)user_query;
  EvaluatorVerdict verdict;
  verdict.valid_positions = coverage_oracle_evaluate(user_p, top);
  std::ostringstream thought;
  thought << "coverage oracle: " << verdict.valid_positions.size() << " of "
          << top.size() << " candidates cover the requirements";
  verdict.thought = thought.str();
  return verdict;
}

RemoteEvaluator::RemoteEvaluator(std::shared_ptr<ChatBackend> backend,
                                 int max_retries, bool fail_open)
    : backend_(std::move(backend)),
      max_retries_(max_retries),
      fail_open_(fail_open) {
  if (!backend_) throw InvalidConfig("evaluator backend must be set");
}

EvaluatorVerdict RemoteEvaluator::evaluate(
    const std::string& user_query, const CapabilityProfile& user_p,
    const std::vector<const HistoryEntry*>& top) {
  const std::string user_text =
      render_evaluator_prompt(user_query, user_p, top);
  std::string last_error = "no attempts made";
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    std::string reply;
    try {
      reply = backend_->complete(evaluator_system_prompt(), user_text);
    } catch (const BackendUnavailable& e) {
      last_error = e.what();
      continue;
    }
    try {
      return parse_evaluator_output(reply, static_cast<int>(top.size()));
    } catch (const RoutingError& e) {
      last_error = e.what();
    }
  }
  if (fail_open_) {
    EvaluatorVerdict degraded;
    degraded.thought = "evaluator unavailable: " + last_error;
    degraded.degraded = true;
    return degraded;
  }
  throw BackendUnavailable("evaluator failed after retries: " + last_error);
}

std::string to_string(OodReason reason) {
  switch (reason) {
    case OodReason::kNoStageACandidates:
      return "no-stage-a-candidates";
    case OodReason::kEvaluatorEmpty:
      return "evaluator-empty";
  }
  return "unknown";
}

SiftOutcome sift(const std::string& query, const CapabilityProfile& user_p,
                 const InvertedIndex& index,
                 const std::map<std::string, EmbeddingVector>& entry_vectors,
                 const RoutingConfig& cfg, const SiftBackends& backends) {
  if (!backends.embedder || !backends.evaluator) {
    throw InvalidConfig("sift requires an embedder and an evaluator");
  }

  SiftOutcome outcome;
  outcome.stage_a_trace = stage_a_filter(user_p, index, cfg.tau);
  if (outcome.stage_a_trace.empty()) {
    outcome.ood_reason = OodReason::kNoStageACandidates;
    return outcome;
  }

  const EmbeddingVector user_vec =
      embed_for_ranking(query, user_p, *backends.embedder);
  std::vector<std::pair<std::string, EmbeddingVector>> candidates;
  candidates.reserve(outcome.stage_a_trace.size());
  for (const auto& c : outcome.stage_a_trace) {
    auto it = entry_vectors.find(c.entry_id);
    if (it != entry_vectors.end()) {
      candidates.emplace_back(c.entry_id, it->second);
    } else {
      candidates.emplace_back(
          c.entry_id,
          embed_for_ranking(index.entry(c.entry_id).query,
                            index.entry(c.entry_id).profile,
                            *backends.embedder));
    }
  }
  outcome.top_k_trace = stage_b_rank(user_vec, candidates, cfg.top_k);

  std::vector<const HistoryEntry*> top;
  top.reserve(outcome.top_k_trace.size());
  for (const auto& r : outcome.top_k_trace) {
    top.push_back(&index.entry(r.entry_id));
  }

  EvaluatorVerdict verdict =
      backends.evaluator->evaluate(query, user_p, top);
  outcome.thought = verdict.thought;
  outcome.evaluator_degraded = verdict.degraded;
  if (verdict.valid_positions.empty()) {
    outcome.ood_reason = OodReason::kEvaluatorEmpty;
    return outcome;
  }

  outcome.matched = true;
  for (int pos : verdict.valid_positions) {
    outcome.valid_ids.push_back(outcome.top_k_trace[pos].entry_id);
  }
  return outcome;
}

}  // namespace decor
