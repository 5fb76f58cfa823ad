#include <benchmark/benchmark.h>

#include <memory>

#include "decor/harness.hpp"

using namespace decor;

namespace {

SynthCorpus corpus_of_size(int families) {
  SynthSpec spec;
  spec.families = families;
  spec.entries_per_family = 5;
  spec.test_queries_per_family = 0;
  return generate_synthetic_corpus(spec);
}

}  // namespace

static void BM_StageAFilter(benchmark::State& state) {
  const auto corpus = corpus_of_size(static_cast<int>(state.range(0)));
  const auto index = InvertedIndex::build(corpus.store.entries);
  const auto user = corpus.store.entries.front().profile;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stage_a_filter(user, index, 0.5));
  }
  state.SetComplexityN(state.range(0) * 5);
}
BENCHMARK(BM_StageAFilter)->Arg(20)->Arg(200)->Arg(2000)->Complexity();

static void BM_Embed(benchmark::State& state) {
  TokenHashEmbedder embedder(static_cast<std::size_t>(state.range(0)));
  const std::string text =
      "incoming family-3 request needing the same skills as before";
  for (auto _ : state) {
    benchmark::DoNotOptimize(embedder.embed(text));
  }
}
BENCHMARK(BM_Embed)->Arg(64)->Arg(256)->Arg(1024);

static void BM_StageBRank(benchmark::State& state) {
  TokenHashEmbedder embedder;
  std::vector<std::pair<std::string, EmbeddingVector>> pool;
  for (int i = 0; i < state.range(0); ++i) {
    pool.emplace_back("e" + std::to_string(i),
                      embedder.embed("entry text " + std::to_string(i)));
  }
  const auto user = embedder.embed("user query text");
  for (auto _ : state) {
    benchmark::DoNotOptimize(stage_b_rank(user, pool, 3));
  }
}
BENCHMARK(BM_StageBRank)->Arg(16)->Arg(128)->Arg(1024);

static void BM_FullRoute(benchmark::State& state) {
  const auto corpus = corpus_of_size(static_cast<int>(state.range(0)));
  const RoutingEngine engine(
      corpus.store, corpus.config,
      std::make_shared<KeywordDeconstructor>(corpus.rules),
      std::make_shared<TokenHashEmbedder>(),
      std::make_shared<CoverageOracleEvaluator>());
  const std::string query = "incoming family-1 request needing the same skills";
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.route(query));
  }
}
BENCHMARK(BM_FullRoute)->Arg(20)->Arg(200)->Arg(2000);

static void BM_RouteOod(benchmark::State& state) {
  const auto corpus = corpus_of_size(200);
  const RoutingEngine engine(
      corpus.store, corpus.config,
      std::make_shared<KeywordDeconstructor>(corpus.rules),
      std::make_shared<TokenHashEmbedder>(),
      std::make_shared<CoverageOracleEvaluator>());
  for (auto _ : state) {
    benchmark::DoNotOptimize(engine.route("an entirely unrelated request"));
  }
}
BENCHMARK(BM_RouteOod);

BENCHMARK_MAIN();
