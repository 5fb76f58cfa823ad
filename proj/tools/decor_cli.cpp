#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <json.hpp>

#include "decor/harness.hpp"
#include "decor/http_backends.hpp"
#include "decor/router.hpp"
#include "decor/service.hpp"
#include "decor/store.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw decor::IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw decor::IoError("cannot write file: " + path);
  out << data;
}

nlohmann::json load_json_file(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    throw decor::MalformedJson("file is not valid JSON: " + path);
  }
  return j;
}

std::vector<decor::KeywordRule> load_rules(const std::string& path) {
  return decor::rules_from_json(load_json_file(path));
}

struct Backends {
  std::shared_ptr<decor::Deconstructor> deconstructor;
  std::shared_ptr<decor::Embedder> embedder;
  std::shared_ptr<decor::Evaluator> evaluator;
};

// Backends come from the config's optional "backends" block; everything
// defaults to the deterministic offline kinds.
Backends build_backends(const nlohmann::json& config_json,
                        const std::string& rules_path) {
  Backends b;
  nlohmann::json spec =
      config_json.contains("backends") ? config_json.at("backends")
                                       : nlohmann::json::object();

  auto kind = [&](const char* name, const char* fallback) {
    if (spec.contains(name) && spec.at(name).contains("kind")) {
      return spec.at(name).at("kind").get<std::string>();
    }
    return std::string(fallback);
  };

  const auto dec_kind = kind("deconstructor", "keyword-rules");
  if (dec_kind == "keyword-rules") {
    if (rules_path.empty()) {
      throw decor::InvalidConfig("keyword-rules backend needs --rules");
    }
    b.deconstructor =
        std::make_shared<decor::KeywordDeconstructor>(load_rules(rules_path));
  } else if (dec_kind == "remote-chat") {
    const auto& d = spec.at("deconstructor");
    auto chat = std::make_shared<decor::HttpChatBackend>(
        d.at("url").get<std::string>(),
        d.value("api_key_env", std::string{}), d.value("timeout", 30));
    b.deconstructor = std::make_shared<decor::RemoteDeconstructor>(
        chat, d.value("retries", 2));
  } else {
    throw decor::InvalidConfig("unknown deconstructor kind: " + dec_kind);
  }

  const auto emb_kind = kind("embedder", "token-hash");
  if (emb_kind == "token-hash") {
    std::size_t dim = 256;
    if (spec.contains("embedder")) {
      dim = spec.at("embedder").value("dim", 256);
    }
    b.embedder = std::make_shared<decor::TokenHashEmbedder>(dim);
  } else if (emb_kind == "remote-embedding") {
    const auto& e = spec.at("embedder");
    b.embedder = std::make_shared<decor::HttpEmbedder>(
        e.at("url").get<std::string>(), e.at("dim").get<std::size_t>(),
        e.value("api_key_env", std::string{}), e.value("timeout", 30));
  } else {
    throw decor::InvalidConfig("unknown embedder kind: " + emb_kind);
  }

  const auto eval_kind = kind("evaluator", "coverage-oracle");
  if (eval_kind == "coverage-oracle") {
    b.evaluator = std::make_shared<decor::CoverageOracleEvaluator>();
  } else if (eval_kind == "remote-chat") {
    const auto& e = spec.at("evaluator");
    auto chat = std::make_shared<decor::HttpChatBackend>(
        e.at("url").get<std::string>(),
        e.value("api_key_env", std::string{}), e.value("timeout", 30));
    b.evaluator = std::make_shared<decor::RemoteEvaluator>(
        chat, e.value("retries", 2), e.value("fail_open", true));
  } else {
    throw decor::InvalidConfig("unknown evaluator kind: " + eval_kind);
  }
  return b;
}

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:step" or a comma-separated list.
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double a, b, step;
    char c1, c2;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0.0) {
      throw decor::InvalidGridValue("bad grid spec: " + text);
    }
    for (double v = a; v <= b + 1e-12; v += step) grid.push_back(v);
  } else {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      grid.push_back(std::stod(tok));
    }
  }
  if (grid.empty()) throw decor::InvalidGridValue("empty grid: " + text);
  return grid;
}

decor::RoutingEngine make_engine(const std::string& store_path,
                                 const std::string& config_path,
                                 const std::string& rules_path) {
  auto config_json = load_json_file(config_path);
  auto cfg = decor::RoutingConfig::from_json(config_json);
  auto backends = build_backends(config_json, rules_path);
  return decor::RoutingEngine(decor::load_store(store_path), cfg,
                              backends.deconstructor, backends.embedder,
                              backends.evaluator);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capability-aware LLM request router"};
  app.require_subcommand(1);

  // --- ingest ---
  std::string ingest_raw, ingest_out, ingest_rules;
  std::size_t ingest_dim = 256;
  auto* ingest = app.add_subcommand(
      "ingest", "augment raw logs with capability profiles and vectors");
  ingest->add_option("raw", ingest_raw, "raw JSONL input")->required();
  ingest->add_option("--out", ingest_out, "store JSONL output")->required();
  ingest->add_option("--rules", ingest_rules, "keyword rule table JSON")
      ->required();
  ingest->add_option("--dim", ingest_dim, "token-hash embedding dimension");

  // --- augment ---
  std::string augment_in, augment_out;
  std::size_t augment_dim = 256;
  auto* augment = app.add_subcommand(
      "augment", "refresh the vector cache of an existing store");
  augment->add_option("store", augment_in, "store JSONL input")->required();
  augment->add_option("--out", augment_out, "output path (defaults to input)");
  augment->add_option("--dim", augment_dim, "token-hash embedding dimension");

  // --- validate ---
  std::string validate_path;
  auto* validate =
      app.add_subcommand("validate", "check a store file's invariants");
  validate->add_option("store", validate_path, "store JSONL")->required();

  // --- replay ---
  std::string replay_policy, replay_store, replay_testset, replay_config,
      replay_rules, replay_out;
  unsigned replay_seed = 42;
  int replay_knn_k = 3;
  auto* replay_cmd =
      app.add_subcommand("replay", "replay routing policies over a testset");
  replay_cmd
      ->add_option("--policy", replay_policy,
                   "comma-separated: decor,random,knn,fixed:<m>,oracle")
      ->required();
  replay_cmd->add_option("--store", replay_store)->required();
  replay_cmd->add_option("--testset", replay_testset)->required();
  replay_cmd->add_option("--config", replay_config)->required();
  replay_cmd->add_option("--rules", replay_rules);
  replay_cmd->add_option("--out", replay_out, "report JSON output")
      ->required();
  replay_cmd->add_option("--seed", replay_seed);
  replay_cmd->add_option("--knn-k", replay_knn_k);

  // --- sweep ---
  std::string sweep_param, sweep_grid, sweep_store, sweep_testset,
      sweep_config, sweep_rules, sweep_out;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "parameter sweep over lambda or tau");
  sweep_cmd->add_option("--param", sweep_param, "lambda or tau")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "a:b:step or v1,v2,...")
      ->required();
  sweep_cmd->add_option("--store", sweep_store)->required();
  sweep_cmd->add_option("--testset", sweep_testset)->required();
  sweep_cmd->add_option("--config", sweep_config)->required();
  sweep_cmd->add_option("--rules", sweep_rules);
  sweep_cmd->add_option("--out", sweep_out, "CSV output")->required();

  // --- synth ---
  int synth_families = 3, synth_entries = 5, synth_models = 4,
      synth_tests = 20;
  unsigned synth_seed = 7;
  std::string synth_out_dir;
  auto* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--families", synth_families);
  synth_cmd->add_option("--entries-per-family", synth_entries);
  synth_cmd->add_option("--models", synth_models);
  synth_cmd->add_option("--tests-per-family", synth_tests);
  synth_cmd->add_option("--seed", synth_seed);
  synth_cmd->add_option("--out-dir", synth_out_dir)->required();

  // --- serve ---
  std::string serve_store, serve_config, serve_rules, serve_host = "0.0.0.0";
  int serve_port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "run the routing service");
  serve_cmd->add_option("--store", serve_store)->required();
  serve_cmd->add_option("--config", serve_config)->required();
  serve_cmd->add_option("--rules", serve_rules);
  serve_cmd->add_option("--host", serve_host);
  serve_cmd->add_option("--port", serve_port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto raw = decor::load_raw_records(ingest_raw);
      decor::KeywordDeconstructor dec(load_rules(ingest_rules));
      decor::TokenHashEmbedder emb(ingest_dim);
      auto result = decor::augment_logs(raw, dec, emb);
      decor::save_store(result.store, ingest_out);
      std::cout << "ingested " << result.store.entries.size() << " entries ("
                << result.skipped << " skipped) -> " << ingest_out << "\n";
    } else if (*augment) {
      auto store = decor::load_store(augment_in);
      decor::TokenHashEmbedder emb(augment_dim);
      store.vectors.clear();
      store.embedder_tag = emb.tag();
      for (const auto& e : store.entries) {
        store.vectors.emplace(
            e.id, decor::embed_for_ranking(e.query, e.profile, emb));
      }
      const std::string out =
          augment_out.empty() ? augment_in : augment_out;
      decor::save_store(store, out);
      std::cout << "re-embedded " << store.entries.size() << " entries -> "
                << out << "\n";
    } else if (*validate) {
      auto store = decor::load_store(validate_path);
      store.build_index();
      std::cout << "ok: " << store.entries.size() << " entries, "
                << store.vectors.size() << " cached vectors\n";
    } else if (*replay_cmd) {
      auto engine = make_engine(replay_store, replay_config, replay_rules);
      auto testset = decor::load_store(replay_testset).entries;
      std::vector<decor::Policy> policies;
      std::istringstream in(replay_policy);
      std::string tok;
      while (std::getline(in, tok, ',')) {
        policies.push_back(decor::parse_policy(tok));
      }
      decor::ReplayOptions opts;
      opts.seed = replay_seed;
      opts.knn_k = replay_knn_k;
      auto report = decor::replay(testset, policies, engine, opts);
      write_file(replay_out, report.to_json().dump(2) + "\n");
      for (const auto& p : report.policies) {
        std::cout << p.policy << ": perf=" << p.mean_perf
                  << " cost=" << p.mean_cost << " norm=" << p.norm_cost
                  << "x ood=" << p.ood_rate << "\n";
      }
    } else if (*sweep_cmd) {
      auto engine = make_engine(sweep_store, sweep_config, sweep_rules);
      auto testset = decor::load_store(sweep_testset).entries;
      decor::SweepParameter param;
      if (sweep_param == "lambda") {
        param = decor::SweepParameter::kLambda;
      } else if (sweep_param == "tau") {
        param = decor::SweepParameter::kTau;
      } else {
        throw decor::InvalidGridValue("unknown sweep parameter: " +
                                      sweep_param);
      }
      auto table =
          decor::sweep(param, parse_grid(sweep_grid), testset, engine);
      write_file(sweep_out, table.to_csv());
      std::cout << "wrote " << table.rows.size() << " rows -> " << sweep_out
                << "\n";
    } else if (*synth_cmd) {
      decor::SynthSpec spec;
      spec.families = synth_families;
      spec.entries_per_family = synth_entries;
      spec.models = synth_models;
      spec.test_queries_per_family = synth_tests;
      spec.seed = synth_seed;
      auto corpus = decor::generate_synthetic_corpus(spec);

      decor::save_store(corpus.store, synth_out_dir + "/store.jsonl");
      decor::LogStore testset;
      testset.entries = corpus.testset;
      decor::save_store(testset, synth_out_dir + "/testset.jsonl");
      write_file(synth_out_dir + "/config.json",
                 corpus.config.to_json().dump(2) + "\n");
      write_file(synth_out_dir + "/rules.json",
                 decor::rules_to_json(corpus.rules).dump(2) + "\n");
      std::cout << "wrote synthetic corpus (" << corpus.store.entries.size()
                << " store entries, " << corpus.testset.size()
                << " test cases) -> " << synth_out_dir << "\n";
    } else if (*serve_cmd) {
      auto engine = std::make_shared<decor::RoutingEngine>(
          make_engine(serve_store, serve_config, serve_rules));
      decor::RouterService service(engine);
      const int port = service.start(serve_host, serve_port);
      std::cout << "serving on " << serve_host << ":" << port << "\n";
      // listen() runs on the service thread; block forever here.
      std::promise<void>().get_future().wait();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
