#include "decor/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace decor {

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::kDecor:
      return "decor";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kKnn:
      return "knn";
    case PolicyKind::kFixed:
      return "fixed:" + fixed_model;
    case PolicyKind::kOracle:
      return "oracle";
  }
  return "unknown";
}

Policy parse_policy(const std::string& text) {
  if (text == "decor") return {PolicyKind::kDecor, {}};
  if (text == "random") return {PolicyKind::kRandom, {}};
  if (text == "knn") return {PolicyKind::kKnn, {}};
  if (text == "oracle") return {PolicyKind::kOracle, {}};
  if (text.rfind("fixed:", 0) == 0 && text.size() > 6) {
    return {PolicyKind::kFixed, text.substr(6)};
  }
  throw InvalidConfig("unknown policy: '" + text + "'");
}

nlohmann::json ReplayReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : policies) {
    nlohmann::json decisions = nlohmann::json::array();
    for (const auto& d : p.decisions) {
      decisions.push_back(
          {{"case_id", d.case_id}, {"model", d.model}, {"ood", d.ood}});
    }
    out.push_back({{"policy", p.policy},
                   {"mean_perf", p.mean_perf},
                   {"mean_cost", p.mean_cost},
                   {"norm_cost", p.norm_cost},
                   {"ood_rate", p.ood_rate},
                   {"decisions", decisions}});
  }
  return nlohmann::json{{"policies", out}};
}

std::string random_baseline(std::mt19937& rng,
                            const std::vector<std::string>& models) {
  if (models.empty()) throw InvalidConfig("empty candidate pool");
  std::uniform_int_distribution<std::size_t> dist(0, models.size() - 1);
  return models[dist(rng)];
}

std::string knn_baseline(const HistoryEntry& test_case, const LogStore& store,
                         int k, Embedder& embedder,
                         const std::vector<std::string>& models) {
  if (store.entries.empty()) throw EmptyStore();
  if (k < 1) throw InvalidConfig("knn k must be >= 1");

  const EmbeddingVector case_vec =
      embed_for_ranking(test_case.query, test_case.profile, embedder);

  std::vector<std::pair<std::string, EmbeddingVector>> candidates;
  candidates.reserve(store.entries.size());
  for (const auto& entry : store.entries) {
    auto it = store.vectors.find(entry.id);
    candidates.emplace_back(
        entry.id, it != store.vectors.end()
                      ? it->second
                      : embed_for_ranking(entry.query, entry.profile,
                                          embedder));
  }
  const auto neighbours = stage_b_rank(case_vec, candidates, k);

  std::map<std::string, const HistoryEntry*> by_id;
  for (const auto& e : store.entries) by_id.emplace(e.id, &e);

  std::string best;
  double best_score = -1.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& model : models) {
    double score_sum = 0.0, cost_sum = 0.0;
    int n = 0;
    for (const auto& nb : neighbours) {
      for (const auto& r : by_id.at(nb.entry_id)->records) {
        if (r.model == model) {
          score_sum += r.score;
          cost_sum += r.cost;
          ++n;
        }
      }
    }
    if (n == 0) continue;
    const double mean_score = score_sum / n;
    const double mean_cost = cost_sum / n;
    if (mean_score > best_score ||
        (mean_score == best_score && mean_cost < best_cost)) {
      best = model;
      best_score = mean_score;
      best_cost = mean_cost;
    }
  }
  if (best.empty()) {
    throw NoEligibleModels();
  }
  return best;
}

std::string oracle_choice(const HistoryEntry& test_case,
                          const std::vector<std::string>& models) {
  std::string best;
  double best_score = -1.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& model : models) {
    for (const auto& r : test_case.records) {
      if (r.model != model) continue;
      if (r.score > best_score ||
          (r.score == best_score && r.cost < best_cost)) {
        best = model;
        best_score = r.score;
        best_cost = r.cost;
      }
    }
  }
  if (best.empty()) throw NoEligibleModels();
  return best;
}

namespace {

const ExecutionRecord& ground_truth(const HistoryEntry& test_case,
                                    const std::string& model) {
  for (const auto& r : test_case.records) {
    if (r.model == model) return r;
  }
  throw MissingRecord(test_case.id, model);
}

}  // namespace

ReplayReport replay(const std::vector<HistoryEntry>& testset,
                    const std::vector<Policy>& policies,
                    const RoutingEngine& engine, const ReplayOptions& opts) {
  if (testset.empty()) throw InvalidConfig("testset must be non-empty");
  const auto& models = engine.config().candidate_models;

  // Density check up front: every case must record every candidate.
  for (const auto& c : testset) {
    for (const auto& m : models) ground_truth(c, m);
  }

  ReplayReport report;
  for (const auto& policy : policies) {
    PolicyReport pr;
    pr.policy = policy.name();
    std::mt19937 rng(opts.seed);
    std::size_t ood_count = 0;

    for (const auto& c : testset) {
      CaseDecision d;
      d.case_id = c.id;
      switch (policy.kind) {
        case PolicyKind::kDecor: {
          const auto decision = engine.route(c.query);
          d.model = decision.chosen_model;
          d.ood = decision.ood;
          break;
        }
        case PolicyKind::kRandom:
          d.model = random_baseline(rng, models);
          break;
        case PolicyKind::kKnn:
          d.model = knn_baseline(c, engine.store(), opts.knn_k,
                                 engine.embedder(), models);
          break;
        case PolicyKind::kFixed:
          ground_truth(c, policy.fixed_model);
          d.model = policy.fixed_model;
          break;
        case PolicyKind::kOracle:
          d.model = oracle_choice(c, models);
          break;
      }
      const auto& truth = ground_truth(c, d.model);
      pr.mean_perf += truth.score;
      pr.mean_cost += truth.cost;
      if (d.ood) ++ood_count;
      pr.decisions.push_back(std::move(d));
    }
    const double n = static_cast<double>(testset.size());
    pr.mean_perf /= n;
    pr.mean_cost /= n;
    pr.ood_rate = static_cast<double>(ood_count) / n;
    report.policies.push_back(std::move(pr));
  }

  double min_cost = std::numeric_limits<double>::infinity();
  for (const auto& p : report.policies) min_cost = std::min(min_cost, p.mean_cost);
  for (auto& p : report.policies) {
    p.norm_cost = min_cost > 0.0 ? p.mean_cost / min_cost : 1.0;
  }
  return report;
}

std::string SweepTable::to_csv() const {
  std::ostringstream out;
  out << "value,mean_perf,mean_cost,norm_cost,ood_rate\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.value << ',' << r.mean_perf << ',' << r.mean_cost << ','
        << r.norm_cost << ',' << r.ood_rate << '\n';
  }
  return out.str();
}

SweepTable SweepTable::from_csv(const std::string& csv) {
  SweepTable table;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) ||
      line != "value,mean_perf,mean_cost,norm_cost,ood_rate") {
    throw RoutingError("unexpected sweep CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SweepRow row;
    std::istringstream fields(line);
    char comma;
    if (!(fields >> row.value >> comma >> row.mean_perf >> comma >>
          row.mean_cost >> comma >> row.norm_cost >> comma >> row.ood_rate)) {
      throw RoutingError("malformed sweep CSV row: " + line);
    }
    table.rows.push_back(row);
  }
  return table;
}

SweepTable sweep(SweepParameter parameter, const std::vector<double>& grid,
                 const std::vector<HistoryEntry>& testset,
                 const RoutingEngine& engine) {
  if (grid.empty()) throw InvalidGridValue("empty sweep grid");
  for (double v : grid) {
    if (parameter == SweepParameter::kLambda && (v < 0.0 || v > 1.0)) {
      throw InvalidGridValue("lambda grid value out of [0,1]: " +
                             std::to_string(v));
    }
    if (parameter == SweepParameter::kTau && !(v > 0.0 && v <= 2.0)) {
      throw InvalidGridValue("tau grid value out of (0,2]: " +
                             std::to_string(v));
    }
  }

  SweepTable table;
  table.parameter = parameter;
  std::vector<Policy> policy{{PolicyKind::kDecor, {}}};
  for (double v : grid) {
    // Run the router policy directly with the override applied per case.
    RouteOverrides overrides;
    if (parameter == SweepParameter::kLambda) {
      overrides.lambda_ = v;
    } else {
      overrides.tau = v;
    }
    SweepRow row;
    row.value = v;
    std::size_t ood_count = 0;
    for (const auto& c : testset) {
      const auto decision = engine.route(c.query, overrides);
      const auto& truth = ground_truth(c, decision.chosen_model);
      row.mean_perf += truth.score;
      row.mean_cost += truth.cost;
      if (decision.ood) ++ood_count;
    }
    const double n = static_cast<double>(testset.size());
    row.mean_perf /= n;
    row.mean_cost /= n;
    row.ood_rate = static_cast<double>(ood_count) / n;
    table.rows.push_back(row);
  }

  double min_cost = std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows) min_cost = std::min(min_cost, r.mean_cost);
  for (auto& r : table.rows) {
    r.norm_cost = min_cost > 0.0 ? r.mean_cost / min_cost : 1.0;
  }
  return table;
}

namespace {

std::string family_token(int f) { return "family-" + std::to_string(f); }

CapabilityProfile family_profile(int f) {
  CapabilityProfile p;
  p.skills = {"skill-" + std::to_string(f) + "-a",
              "skill-" + std::to_string(f) + "-b"};
  p.skills_reason = "synthetic family " + std::to_string(f);
  p.knowledge = {"domain-" + std::to_string(f)};
  p.knowledge_reason = p.skills_reason;
  p.difficulty = DifficultyLevel(1);
  p.difficulty_reason = p.skills_reason;
  return p;
}

std::vector<ExecutionRecord> family_records(int family, int best_model,
                                            int num_models,
                                            std::mt19937& rng) {
  (void)family;
  std::uniform_real_distribution<double> best_score(0.9, 1.0);
  std::uniform_real_distribution<double> other_score(0.3, 0.6);
  std::uniform_real_distribution<double> other_cost(2.0, 5.0);

  std::vector<ExecutionRecord> records;
  for (int m = 0; m < num_models; ++m) {
    ExecutionRecord r;
    r.model = "model-" + std::to_string(m);
    if (m == best_model) {
      r.score = best_score(rng);
      r.cost = 1.0;
    } else {
      r.score = other_score(rng);
      r.cost = other_cost(rng);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

int SynthCorpus::family_of(const std::string& query) {
  auto pos = query.find("family-");
  if (pos == std::string::npos) return -1;
  pos += 7;
  std::size_t end = pos;
  while (end < query.size() &&
         std::isdigit(static_cast<unsigned char>(query[end]))) {
    ++end;
  }
  if (end == pos) return -1;
  return std::stoi(query.substr(pos, end - pos));
}

SynthCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  if (spec.families < 2) throw InvalidConfig("need >= 2 families");
  if (spec.models < 2) throw InvalidConfig("need >= 2 models");
  if (spec.entries_per_family < 1 || spec.test_queries_per_family < 0) {
    throw InvalidConfig("invalid synthetic corpus sizes");
  }

  std::mt19937 rng(spec.seed);
  SynthCorpus corpus;

  for (int m = 0; m < spec.models; ++m) {
    corpus.config.candidate_models.push_back("model-" + std::to_string(m));
  }
  corpus.config.fallback_model = corpus.config.candidate_models.back();
  corpus.config.validate();

  TokenHashEmbedder embedder;
  corpus.store.embedder_tag = embedder.tag();

  for (int f = 0; f < spec.families; ++f) {
    const int best = f % spec.models;
    corpus.best_model_per_family.push_back("model-" + std::to_string(best));
    const CapabilityProfile profile = family_profile(f);

    corpus.rules.push_back({family_token(f), profile.skills,
                            profile.knowledge, profile.difficulty});
    // Escalated variant: same labels at D3, so Stage A passes but the
    // coverage oracle rejects every D1 store entry.
    corpus.rules.push_back({"escalate-" + std::to_string(f), profile.skills,
                            profile.knowledge, DifficultyLevel(3)});

    for (int i = 0; i < spec.entries_per_family; ++i) {
      HistoryEntry entry;
      entry.id = "h-" + std::to_string(f) + "-" + std::to_string(i);
      entry.query = "stored " + family_token(f) + " task " +
                    std::to_string(i) + " exercising its skills";
      entry.profile = profile;
      entry.records = family_records(f, best, spec.models, rng);
      entry.validate();
      corpus.store.vectors.emplace(
          entry.id, embed_for_ranking(entry.query, entry.profile, embedder));
      corpus.store.entries.push_back(std::move(entry));
    }

    for (int i = 0; i < spec.test_queries_per_family; ++i) {
      HistoryEntry tc;
      tc.id = "t-" + std::to_string(f) + "-" + std::to_string(i);
      tc.query = "incoming " + family_token(f) + " request " +
                 std::to_string(i) + " needing the same skills";
      tc.profile = profile;
      tc.records = family_records(f, best, spec.models, rng);
      tc.validate();
      corpus.testset.push_back(std::move(tc));
    }
  }

  // Catch-all so the keyword deconstructor is total; its labels are
  // disjoint from every family, which makes unmatched queries OOD.
  corpus.rules.push_back(
      {"", {"unmatched"}, {"none"}, DifficultyLevel(3)});

  std::sort(corpus.store.entries.begin(), corpus.store.entries.end(),
            [](const HistoryEntry& a, const HistoryEntry& b) {
              return a.id < b.id;
            });
  return corpus;
}

}  // namespace decor
