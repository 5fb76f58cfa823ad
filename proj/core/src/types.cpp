#include "decor/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace decor {

DifficultyLevel::DifficultyLevel(int level) : level_(level) {
  if (level < 0 || level > 3) {
    throw UnknownDifficulty("D" + std::to_string(level));
  }
}

std::string DifficultyLevel::to_string() const {
  return "D" + std::to_string(level_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

DifficultyLevel parse_difficulty(std::string_view text) {
  auto t = trim(text);
  if (t.size() == 2 && (t[0] == 'D' || t[0] == 'd') && t[1] >= '0' &&
      t[1] <= '3') {
    return DifficultyLevel(t[1] - '0');
  }
  throw UnknownDifficulty(std::string(text));
}

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) throw EmptyLabel();
  return out;
}

namespace {

void check_labels(const LabelSet& labels, const std::string& what) {
  if (labels.empty()) {
    throw InvalidProfile(what + " set must be non-empty");
  }
  for (const auto& label : labels) {
    if (label.empty() || normalize_label(label) != label) {
      throw InvalidProfile(what + " label '" + label + "' is not normalized");
    }
  }
}

}  // namespace

void CapabilityProfile::validate() const {
  check_labels(skills, "skills");
  check_labels(knowledge, "knowledge");
  if (skills.count("none")) {
    throw InvalidProfile("'none' is not a valid skill label");
  }
  if (knowledge.count("none") && knowledge.size() > 1) {
    throw InvalidProfile("'none' must be the sole knowledge label");
  }
}

nlohmann::json CapabilityProfile::to_json() const {
  // std::set iterates in sorted order, so S and K arrays come out sorted.
  return nlohmann::json{
      {"S", skills},
      {"S_reason", skills_reason},
      {"K", knowledge},
      {"K_reason", knowledge_reason},
      {"D", difficulty.to_string()},
      {"D_reason", difficulty_reason},
  };
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j,
                                    const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw MissingField(name);
  return *it;
}

LabelSet labels_from_json(const nlohmann::json& arr, const char* name) {
  if (!arr.is_array()) {
    throw MalformedJson(std::string("field '") + name + "' must be an array");
  }
  LabelSet out;
  for (const auto& v : arr) {
    if (!v.is_string()) {
      throw MalformedJson(std::string("field '") + name +
                          "' must contain only strings");
    }
    out.insert(normalize_label(v.get<std::string>()));
  }
  return out;
}

}  // namespace

CapabilityProfile CapabilityProfile::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MalformedJson("profile must be a JSON object");
  CapabilityProfile p;
  p.skills = labels_from_json(require_field(j, "S"), "S");
  p.skills_reason = require_field(j, "S_reason").get<std::string>();
  p.knowledge = labels_from_json(require_field(j, "K"), "K");
  p.knowledge_reason = require_field(j, "K_reason").get<std::string>();
  p.difficulty = parse_difficulty(require_field(j, "D").get<std::string>());
  p.difficulty_reason = require_field(j, "D_reason").get<std::string>();
  p.validate();
  return p;
}

void ExecutionRecord::validate() const {
  if (model.empty()) {
    throw InvalidProfile("execution record model id must be non-empty");
  }
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw InvalidProfile("score must be finite in [0,1]");
  }
  if (!std::isfinite(cost) || cost < 0.0) {
    throw InvalidProfile("cost must be finite and non-negative");
  }
}

void HistoryEntry::validate() const {
  if (id.empty()) throw InvalidProfile("entry id must be non-empty");
  if (records.empty()) {
    throw InvalidProfile("entry '" + id + "' has no execution records");
  }
  profile.validate();
  std::set<std::string> seen;
  for (const auto& r : records) {
    r.validate();
    if (!seen.insert(r.model).second) {
      throw InvalidProfile("entry '" + id + "' repeats model '" + r.model +
                           "'");
    }
  }
}

void RoutingConfig::validate() const {
  if (!(tau > 0.0 && tau <= 2.0)) {
    throw InvalidConfig("tau must lie in (0, 2]");
  }
  if (top_k < 1) throw InvalidConfig("top_k must be >= 1");
  if (!(lambda_ >= 0.0 && lambda_ <= 1.0)) {
    throw InvalidConfig("lambda must lie in [0, 1]");
  }
  if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be positive");
  if (candidate_models.empty()) {
    throw InvalidConfig("candidate model list must be non-empty");
  }
  if (std::find(candidate_models.begin(), candidate_models.end(),
                fallback_model) == candidate_models.end()) {
    throw InvalidConfig("fallback model '" + fallback_model +
                        "' is not in the candidate list");
  }
}

nlohmann::json RoutingConfig::to_json() const {
  return nlohmann::json{
      {"tau", tau},
      {"top_k", top_k},
      {"lambda", lambda_},
      {"epsilon", epsilon},
      {"fallback_model", fallback_model},
      {"candidate_models", candidate_models},
  };
}

RoutingConfig RoutingConfig::from_json(const nlohmann::json& j) {
  RoutingConfig cfg;
  if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
  if (j.contains("top_k")) cfg.top_k = j.at("top_k").get<int>();
  if (j.contains("lambda")) cfg.lambda_ = j.at("lambda").get<double>();
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  cfg.fallback_model = require_field(j, "fallback_model").get<std::string>();
  cfg.candidate_models =
      require_field(j, "candidate_models").get<std::vector<std::string>>();
  cfg.validate();
  return cfg;
}

double reward(const std::set<int>& predicted, const std::set<int>& truth) {
  if (predicted == truth) return 6.0;
  if (truth.empty()) return -2.0 * static_cast<double>(predicted.size());

  std::size_t hits = 0;
  for (int v : predicted) hits += truth.count(v);
  if (hits == 0) return -6.0;

  const double false_positives =
      static_cast<double>(predicted.size() - hits);
  return 6.0 / static_cast<double>(truth.size()) *
         (static_cast<double>(hits) - false_positives);
}

}  // namespace decor
