// Acceptance suite: one self-contained check per criterion, each printing
// a single pass/fail line. Exit status is the number of failed criteria.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "decor/harness.hpp"
#include "decor/service.hpp"

using namespace decor;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

template <typename F>
void criterion(int n, const std::string& name, F body) {
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] %2d. %s%s%s\n", ok ? "PASS" : "FAIL", n, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::set<int> bits_to_set(unsigned mask, int universe) {
  std::set<int> s;
  for (int i = 0; i < universe; ++i) {
    if (mask & (1u << i)) s.insert(i + 1);
  }
  return s;
}

// Independent case analysis of the reward, written as literal counting.
double reward_reference(const std::set<int>& v, const std::set<int>& g) {
  if (g.empty()) return v.empty() ? 6.0 : -2.0 * static_cast<double>(v.size());
  int hits = 0;
  for (int x : v) {
    if (g.count(x)) ++hits;
  }
  const int false_positives = static_cast<int>(v.size()) - hits;
  if (hits == 0) return -6.0;
  return 6.0 / static_cast<double>(g.size()) *
         static_cast<double>(hits - false_positives);
}

CapabilityProfile random_profile(std::mt19937& rng) {
  std::uniform_int_distribution<int> skill_id(0, 9);
  std::uniform_int_distribution<int> domain_id(0, 5);
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> diff(0, 3);
  std::uniform_int_distribution<int> coin(0, 1);

  CapabilityProfile p;
  const int ns = count(rng);
  while (static_cast<int>(p.skills.size()) < ns) {
    p.skills.insert("skill-" + std::to_string(skill_id(rng)));
  }
  p.skills_reason = "r";
  if (coin(rng)) {
    p.knowledge = {"none"};
  } else {
    const int nk = 1 + coin(rng);
    while (static_cast<int>(p.knowledge.size()) < nk) {
      p.knowledge.insert("domain-" + std::to_string(domain_id(rng)));
    }
  }
  p.knowledge_reason = "r";
  p.difficulty = DifficultyLevel(diff(rng));
  p.difficulty_reason = "r";
  return p;
}

RoutingEngine make_engine(const SynthCorpus& corpus) {
  return RoutingEngine(
      corpus.store, corpus.config,
      std::make_shared<KeywordDeconstructor>(corpus.rules),
      std::make_shared<TokenHashEmbedder>(),
      std::make_shared<CoverageOracleEvaluator>());
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("decor-acceptance-" + name))
      .string();
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  criterion(1, "reward matches the case-analysis reference on all 1,024 pairs",
            [](std::string& detail) {
              const auto start = Clock::now();
              const int universe = 5;
              for (unsigned vm = 0; vm < (1u << universe); ++vm) {
                for (unsigned gm = 0; gm < (1u << universe); ++gm) {
                  const auto v = bits_to_set(vm, universe);
                  const auto g = bits_to_set(gm, universe);
                  if (reward(v, g) != reward_reference(v, g)) {
                    detail = "mismatch at masks " + std::to_string(vm) + "/" +
                             std::to_string(gm);
                    return false;
                  }
                }
              }
              if (elapsed_s(start) >= 1.0) {
                detail = "too slow";
                return false;
              }
              return true;
            });

  criterion(
      2, "stage A inverted index equals a naive full scan (1,000 profiles)",
      [](std::string& detail) {
        const auto start = Clock::now();
        std::mt19937 rng(2024);
        std::vector<HistoryEntry> entries;
        for (int i = 0; i < 1000; ++i) {
          HistoryEntry e;
          e.id = "e" + std::to_string(1000 + i);
          e.query = "historical query " + std::to_string(i);
          e.profile = random_profile(rng);
          e.records = {{"m", 0.5, 1.0}};
          entries.push_back(std::move(e));
        }
        const auto index = InvertedIndex::build(entries);

        for (int trial = 0; trial < 1000; ++trial) {
          const auto user = random_profile(rng);
          for (double tau : {0.1, 0.5, 0.9}) {
            // Reference: score every entry, threshold, sort by score then id.
            std::vector<StageACandidate> naive;
            for (const auto& e : entries) {
              const auto s = stage_a_score(user, e.profile);
              if (s.score_a >= tau) {
                naive.push_back({e.id, s.sim_sk, s.weight, s.score_a});
              }
            }
            std::sort(naive.begin(), naive.end(),
                      [](const StageACandidate& a, const StageACandidate& b) {
                        if (a.score_a != b.score_a) {
                          return a.score_a > b.score_a;
                        }
                        return a.entry_id < b.entry_id;
                      });
            const auto fast = stage_a_filter(user, index, tau);
            if (fast.size() != naive.size()) {
              detail = "size mismatch at trial " + std::to_string(trial);
              return false;
            }
            for (std::size_t i = 0; i < fast.size(); ++i) {
              if (fast[i].entry_id != naive[i].entry_id ||
                  fast[i].score_a != naive[i].score_a) {
                detail = "order/score mismatch at trial " +
                         std::to_string(trial);
                return false;
              }
            }
          }
        }
        if (elapsed_s(start) >= 5.0) {
          detail = "too slow";
          return false;
        }
        return true;
      });

  criterion(
      3, "stage B top-3 equals the head of a brute-force full sort",
      [](std::string& detail) {
        const auto start = Clock::now();
        std::mt19937 rng(3);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto random_vec = [&] {
          EmbeddingVector v;
          v.values.resize(256);
          for (auto& x : v.values) x = gauss(rng);
          return v;
        };

        std::vector<std::pair<std::string, EmbeddingVector>> pool;
        for (int i = 0; i < 1000; ++i) {
          pool.emplace_back("v" + std::to_string(1000 + i), random_vec());
        }
        // Force exact-tie coverage for the id rule.
        pool[500].second = pool[501].second;

        for (int trial = 0; trial < 10; ++trial) {
          const auto user = trial == 0 ? pool[500].second : random_vec();
          std::vector<RankedCandidate> full;
          for (const auto& [id, vec] : pool) {
            full.push_back({id, cosine(user, vec)});
          }
          std::sort(full.begin(), full.end(),
                    [](const RankedCandidate& a, const RankedCandidate& b) {
                      if (a.score_b != b.score_b) return a.score_b > b.score_b;
                      return a.entry_id < b.entry_id;
                    });
          full.resize(3);
          const auto ranked = stage_b_rank(user, pool, 3);
          for (std::size_t i = 0; i < 3; ++i) {
            if (ranked[i].entry_id != full[i].entry_id ||
                ranked[i].score_b != full[i].score_b) {
              detail = "mismatch at trial " + std::to_string(trial);
              return false;
            }
          }
        }
        if (elapsed_s(start) >= 2.0) {
          detail = "too slow";
          return false;
        }
        return true;
      });

  criterion(
      4, "difficulty weights and min-max normalization spot checks",
      [](std::string& detail) {
        for (int dh = 0; dh < 4; ++dh) {
          for (int du = 0; du < 4; ++du) {
            const double expected =
                dh >= du ? 1.0 : 1.0 - 0.25 * static_cast<double>(du - dh);
            const double got =
                difficulty_weight(DifficultyLevel(dh), DifficultyLevel(du));
            if (got != expected) {
              detail = "difficulty_weight(D" + std::to_string(dh) + ",D" +
                       std::to_string(du) + ")";
              return false;
            }
          }
        }
        const double eps = 1e-9;
        const auto v =
            normalize_min_max({0.9, 0.6}, NormalizeDirection::kBenefit, eps);
        const auto c =
            normalize_min_max({10.0, 2.0}, NormalizeDirection::kCost, eps);
        const bool ok = std::abs(v[0] - 0.3 / (0.3 + eps)) < 1e-9 &&
                        v[1] == 0.0 && c[0] == 0.0 &&
                        std::abs(c[1] - 8.0 / (8.0 + eps)) < 1e-9;
        if (!ok) detail = "normalization mismatch";
        return ok;
      });

  criterion(
      5, "monotonicity in lambda (chosen score) and tau (candidate count)",
      [](std::string& detail) {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> score(0.0, 1.0);
        std::uniform_real_distribution<double> cost(0.5, 10.0);
        for (int trial = 0; trial < 200; ++trial) {
          std::vector<ModelAggregate> aggs;
          const int n = 2 + static_cast<int>(rng() % 5);
          for (int i = 0; i < n; ++i) {
            aggs.push_back({"m" + std::to_string(i), score(rng), cost(rng), 1});
          }
          double prev = -1.0;
          for (int step = 0; step <= 10; ++step) {
            const auto sel = select_model(aggs, 0.1 * step, 1e-9);
            const auto it = std::find_if(aggs.begin(), aggs.end(),
                                         [&](const ModelAggregate& a) {
                                           return a.model == sel.chosen;
                                         });
            if (it->mean_score < prev) {
              detail = "lambda violation at trial " + std::to_string(trial);
              return false;
            }
            prev = it->mean_score;
          }
        }

        const auto corpus = generate_synthetic_corpus({});
        const auto index = InvertedIndex::build(corpus.store.entries);
        KeywordDeconstructor dec(corpus.rules);
        for (const auto& tc : corpus.testset) {
          const auto profile = dec.deconstruct(tc.query);
          std::size_t prev_count = index.size() + 1;
          for (int step = 1; step <= 9; ++step) {
            const auto count =
                stage_a_filter(profile, index, 0.1 * step).size();
            if (count > prev_count) {
              detail = "tau violation on " + tc.id;
              return false;
            }
            prev_count = count;
          }
        }
        return true;
      });

  criterion(
      6, "synthetic end-to-end routing picks the designed-best model",
      [](std::string& detail) {
        const auto start = Clock::now();
        const auto corpus = generate_synthetic_corpus({});  // 3x5, 4 models
        const auto engine = make_engine(corpus);
        if (corpus.store.entries.size() != 15 || corpus.testset.size() != 60) {
          detail = "unexpected corpus shape";
          return false;
        }
        for (const auto& tc : corpus.testset) {
          const auto decision = engine.route(tc.query);
          const int family = SynthCorpus::family_of(tc.query);
          if (decision.ood ||
              decision.chosen_model != corpus.best_model_per_family[family]) {
            detail = "wrong route for " + tc.id;
            return false;
          }
          // Recompute every utility directly from the raw records of the
          // entries the evaluator accepted.
          std::vector<double> scores, costs;
          for (const auto& agg : decision.aggregates) {
            double sum_s = 0.0, sum_c = 0.0;
            int n = 0;
            for (const auto& id : decision.sift.valid_ids) {
              for (const auto& r : engine.index().entry(id).records) {
                if (r.model == agg.model) {
                  sum_s += r.score;
                  sum_c += r.cost;
                  ++n;
                }
              }
            }
            scores.push_back(sum_s / n);
            costs.push_back(sum_c / n);
          }
          const auto vn = normalize_min_max(
              scores, NormalizeDirection::kBenefit, engine.config().epsilon);
          const auto cn = normalize_min_max(
              costs, NormalizeDirection::kCost, engine.config().epsilon);
          for (std::size_t i = 0; i < decision.utility_rows.size(); ++i) {
            const double expected = 0.5 * vn[i] + 0.5 * cn[i];
            if (std::abs(decision.utility_rows[i].utility - expected) >=
                1e-9) {
              detail = "utility trace mismatch for " + tc.id;
              return false;
            }
          }
        }
        if (elapsed_s(start) >= 10.0) {
          detail = "too slow";
          return false;
        }
        return true;
      });

  criterion(
      7, "OOD queries fall back with the correct reason",
      [](std::string& detail) {
        const auto corpus = generate_synthetic_corpus({});
        const auto engine = make_engine(corpus);
        for (int i = 0; i < 20; ++i) {
          // Catch-all rule labels are disjoint from every stored entry.
          const auto d = engine.route("completely unrelated request " +
                                      std::to_string(i));
          if (!d.ood || d.chosen_model != engine.config().fallback_model ||
              d.fallback_reason != FallbackReason::kNoStageACandidates) {
            detail = "disjoint-label case " + std::to_string(i);
            return false;
          }
        }
        for (int i = 0; i < 20; ++i) {
          // escalate-f: same labels at D3, so stage A passes but no stored
          // entry covers the difficulty.
          const auto d = engine.route("please escalate-" + std::to_string(i % 3) +
                                      " this request " + std::to_string(i));
          if (!d.ood || d.chosen_model != engine.config().fallback_model ||
              d.fallback_reason != FallbackReason::kEvaluatorEmpty) {
            detail = "escalated case " + std::to_string(i);
            return false;
          }
        }
        return true;
      });

  criterion(
      8, "100 identical POST /route calls are byte-stable; P99 < 50 ms",
      [](std::string& detail) {
        SynthSpec spec;
        spec.families = 200;
        spec.entries_per_family = 5;  // 1,000-entry store
        spec.test_queries_per_family = 0;
        const auto corpus = generate_synthetic_corpus(spec);
        auto engine = std::make_shared<const RoutingEngine>(
            corpus.store, corpus.config,
            std::make_shared<KeywordDeconstructor>(corpus.rules),
            std::make_shared<TokenHashEmbedder>(),
            std::make_shared<CoverageOracleEvaluator>());
        RouterService service(engine);
        const int port = service.start("127.0.0.1", 0);

        httplib::Client client("127.0.0.1", port);
        const std::string body =
            R"({"query":"incoming family-42 request needing the same skills"})";

        std::vector<double> latencies_ms;
        std::string first_model, first_rows;
        for (int i = 0; i < 100; ++i) {
          const auto t0 = Clock::now();
          auto res = client.Post("/route", body, "application/json");
          latencies_ms.push_back(
              std::chrono::duration<double, std::milli>(Clock::now() - t0)
                  .count());
          if (!res || res->status != 200) {
            detail = "request " + std::to_string(i) + " failed";
            return false;
          }
          const auto j = nlohmann::json::parse(res->body);
          const std::string model = j.at("chosen_model").dump();
          const std::string rows = j.at("trace").at("utility_rows").dump();
          if (i == 0) {
            first_model = model;
            first_rows = rows;
          } else if (model != first_model || rows != first_rows) {
            detail = "nondeterministic response at call " + std::to_string(i);
            return false;
          }
        }
        service.stop();

        std::sort(latencies_ms.begin(), latencies_ms.end());
        const double p99 = latencies_ms[98];
        if (p99 >= 50.0) {
          std::ostringstream os;
          os << "P99 " << p99 << " ms";
          detail = os.str();
          return false;
        }
        return true;
      });

  criterion(
      9, "replay means, cost normalization, and knn match references",
      [](std::string& detail) {
        SynthSpec small;
        small.models = 2;
        const auto base = generate_synthetic_corpus(small);
        const auto engine = make_engine(base);

        // Ten dense rows with literal outcomes.
        const double s0[] = {0.9, 0.1, 0.6, 1.0, 0.4, 0.7, 0.2, 0.8, 0.5, 0.3};
        const double c0[] = {1.0, 2.0, 3.0, 2.5, 1.5, 0.5, 4.0, 2.2, 1.1, 3.3};
        const double s1[] = {0.5, 0.8, 0.6, 0.2, 0.9, 0.3, 0.7, 0.1, 0.4, 0.6};
        const double c1[] = {4.0, 1.5, 0.5, 2.0, 1.0, 3.0, 2.5, 1.8, 0.9, 2.1};
        std::vector<HistoryEntry> fixture;
        for (int i = 0; i < 10; ++i) {
          HistoryEntry e;
          e.id = "c" + std::to_string(i);
          e.query = "incoming family-0 request " + std::to_string(i);
          e.profile = base.store.entries.front().profile;
          e.records = {{"model-0", s0[i], c0[i]}, {"model-1", s1[i], c1[i]}};
          fixture.push_back(std::move(e));
        }
        const auto report =
            replay(fixture,
                   {parse_policy("fixed:model-0"), parse_policy("fixed:model-1"),
                    parse_policy("oracle")},
                   engine);

        auto mean = [](const double* a) {
          double s = 0.0;
          for (int i = 0; i < 10; ++i) s += a[i];
          return s / 10.0;
        };
        double oracle_perf = 0.0;
        for (int i = 0; i < 10; ++i) oracle_perf += std::max(s0[i], s1[i]);
        oracle_perf /= 10.0;

        if (std::abs(report.policies[0].mean_perf - mean(s0)) > 1e-12 ||
            std::abs(report.policies[0].mean_cost - mean(c0)) > 1e-12 ||
            std::abs(report.policies[1].mean_perf - mean(s1)) > 1e-12 ||
            std::abs(report.policies[2].mean_perf - oracle_perf) > 1e-12) {
          detail = "replay means";
          return false;
        }
        double min_norm = 1e300;
        for (const auto& p : report.policies) {
          min_norm = std::min(min_norm, p.norm_cost);
        }
        if (min_norm != 1.0) {
          detail = "norm_cost minimum";
          return false;
        }

        SynthSpec knn_spec;
        knn_spec.families = 5;
        knn_spec.entries_per_family = 10;  // 50-entry corpus
        knn_spec.test_queries_per_family = 4;
        const auto knn_corpus = generate_synthetic_corpus(knn_spec);
        TokenHashEmbedder emb;
        for (const auto& tc : knn_corpus.testset) {
          // Reference: full cosine sort, per-model means over the top 3.
          const auto cv = embed_for_ranking(tc.query, tc.profile, emb);
          std::vector<std::pair<double, const HistoryEntry*>> sims;
          for (const auto& e : knn_corpus.store.entries) {
            sims.emplace_back(cosine(cv, knn_corpus.store.vectors.at(e.id)),
                              &e);
          }
          std::sort(sims.begin(), sims.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second->id < b.second->id;
                    });
          sims.resize(3);
          std::string expected;
          double best_s = -1.0, best_c = 1e300;
          for (const auto& model : knn_corpus.config.candidate_models) {
            double ss = 0, sc = 0;
            int n = 0;
            for (const auto& [sim, e] : sims) {
              for (const auto& r : e->records) {
                if (r.model == model) {
                  ss += r.score;
                  sc += r.cost;
                  ++n;
                }
              }
            }
            if (n == 0) continue;
            if (ss / n > best_s || (ss / n == best_s && sc / n < best_c)) {
              expected = model;
              best_s = ss / n;
              best_c = sc / n;
            }
          }
          if (knn_baseline(tc, knn_corpus.store, 3, emb,
                           knn_corpus.config.candidate_models) != expected) {
            detail = "knn mismatch on " + tc.id;
            return false;
          }
        }
        return true;
      });

  criterion(
      10, "store/config/sweep round-trips are byte-stable; prompts conform",
      [](std::string& detail) {
        const auto corpus = generate_synthetic_corpus({});
        const auto p1 = temp_path("store-1.jsonl");
        const auto p2 = temp_path("store-2.jsonl");
        save_store(corpus.store, p1);
        save_store(load_store(p1), p2);
        if (read_all(p1) != read_all(p2)) {
          detail = "store JSONL not byte-stable";
          return false;
        }
        std::filesystem::remove(p1);
        std::filesystem::remove(p2);

        const auto cfg_text = corpus.config.to_json().dump();
        const auto reparsed =
            RoutingConfig::from_json(nlohmann::json::parse(cfg_text));
        if (reparsed.to_json().dump() != cfg_text) {
          detail = "config JSON not byte-stable";
          return false;
        }

        SweepTable table;
        table.rows = {{0.1, 0.5, 2.0, 1.0, 0.0}, {0.9, 0.25, 3.0, 1.5, 0.125}};
        if (SweepTable::from_csv(table.to_csv()).to_csv() != table.to_csv()) {
          detail = "sweep CSV not byte-stable";
          return false;
        }

        const auto dec_prompt = render_deconstruction_prompt("sample query");
        CapabilityProfile user = corpus.store.entries.front().profile;
        std::vector<const HistoryEntry*> top{&corpus.store.entries.front()};
        const auto eval_prompt =
            render_evaluator_prompt("sample query", user, top);
        if (dec_prompt.find("Output MUST be valid pure JSON") ==
                std::string::npos ||
            eval_prompt.find("valid_representatives") == std::string::npos) {
          detail = "prompt schema substrings missing";
          return false;
        }
        return true;
      });

  std::printf("%s: %d criterion(s) failed\n",
              failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              failures);
  return failures;
}
