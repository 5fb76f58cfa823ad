#include "decor/deconstruct.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace decor {

const std::string& deconstruction_system_prompt() {
  static const std::string kPrompt =
      "You are a Capability Decomposition Engine. Your task is to decompose "
      "the user query into its capability-space representation "
      "C(q) = {S, K, D}. Follow all rules strictly and output JSON only.";
  return kPrompt;
}

namespace {

constexpr std::string_view kPromptTemplate = R"(Instruction:
${query}

Decomposition Rules:
1. Skill Set (S): Identify required skills (e.g., reasoning, coding). Output as a list and provide "S_reason".
2. Knowledge Domain (K): Identify domains (e.g., law, finance). If none, output "none". Output as a list and provide "K_reason".
3. Difficulty (D): Choose exactly one from {D0, D1, D2, D3} based on complexity. Provide "D_reason".

Important Rules:
- Output MUST be valid pure JSON.
- Do NOT include markdown code.

Output Format (STRICT):
{
  "S": [...], "S_reason": "...",
  "K": [...], "K_reason": "...",
  "D": "...", "D_reason": "..."
}
)";

constexpr std::string_view kQueryPlaceholder = "${query}";

}  // namespace

std::string render_deconstruction_prompt(const std::string& query) {
  if (query.empty()) throw EmptyQuery();
  std::string out(kPromptTemplate);
  out.replace(out.find(kQueryPlaceholder), kQueryPlaceholder.size(), query);
  return out;
}

namespace {

std::string strip_markdown_fence(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text.compare(first, 3, "```") != 0) {
    return text;
  }
  auto body_start = text.find('\n', first);
  if (body_start == std::string::npos) return text;
  auto fence_end = text.rfind("```");
  if (fence_end <= body_start) return text;
  return text.substr(body_start + 1, fence_end - body_start - 1);
}

}  // namespace

CapabilityProfile parse_profile_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    j = nlohmann::json::parse(strip_markdown_fence(text), nullptr, false);
    if (j.is_discarded()) {
      throw MalformedJson("profile payload is not valid JSON");
    }
  }
  try {
    return CapabilityProfile::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
}

nlohmann::json rules_to_json(const std::vector<KeywordRule>& rules) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rules) {
    out.push_back({{"needle", r.needle},
                   {"skills", r.skills},
                   {"knowledge", r.knowledge},
                   {"difficulty", r.difficulty.to_string()}});
  }
  return out;
}

std::vector<KeywordRule> rules_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw MalformedJson("rule table must be a JSON array");
  std::vector<KeywordRule> out;
  for (const auto& r : j) {
    KeywordRule rule;
    rule.needle = r.at("needle").get<std::string>();
    for (const auto& s : r.at("skills")) {
      rule.skills.insert(normalize_label(s.get<std::string>()));
    }
    for (const auto& k : r.at("knowledge")) {
      rule.knowledge.insert(normalize_label(k.get<std::string>()));
    }
    rule.difficulty = parse_difficulty(r.at("difficulty").get<std::string>());
    out.push_back(std::move(rule));
  }
  return out;
}

KeywordDeconstructor::KeywordDeconstructor(std::vector<KeywordRule> rules)
    : rules_(std::move(rules)) {
  if (rules_.empty()) {
    throw InvalidConfig("keyword rule table must be non-empty");
  }
  bool has_catch_all = std::any_of(
      rules_.begin(), rules_.end(),
      [](const KeywordRule& r) { return r.needle.empty(); });
  if (!has_catch_all) {
    throw InvalidConfig("keyword rule table needs a catch-all rule");
  }
}

namespace {

std::string lowercase(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

CapabilityProfile KeywordDeconstructor::deconstruct(const std::string& query) {
  if (query.empty()) throw EmptyQuery();
  const std::string haystack = lowercase(query);

  const KeywordRule* best = nullptr;
  for (const auto& rule : rules_) {
    if (!rule.needle.empty() &&
        haystack.find(lowercase(rule.needle)) == std::string::npos) {
      continue;
    }
    if (best == nullptr || rule.needle.size() > best->needle.size()) {
      best = &rule;
    }
  }

  CapabilityProfile p;
  p.skills = best->skills;
  p.skills_reason = "matched rule '" + best->needle + "'";
  p.knowledge = best->knowledge;
  p.knowledge_reason = p.skills_reason;
  p.difficulty = best->difficulty;
  p.difficulty_reason = p.skills_reason;
  p.validate();
  return p;
}

RemoteDeconstructor::RemoteDeconstructor(std::shared_ptr<ChatBackend> backend,
                                         int max_retries)
    : backend_(std::move(backend)), max_retries_(max_retries) {
  if (!backend_) throw InvalidConfig("deconstructor backend must be set");
}

CapabilityProfile RemoteDeconstructor::deconstruct(const std::string& query) {
  const std::string user_text = render_deconstruction_prompt(query);
  std::string last_error = "no attempts made";
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    std::string reply;
    try {
      reply = backend_->complete(deconstruction_system_prompt(), user_text);
    } catch (const BackendUnavailable&) {
      throw;
    }
    try {
      return parse_profile_json(reply);
    } catch (const RoutingError& e) {
      last_error = e.what();
    }
  }
  throw DeconstructionFailed("all retries exhausted: " + last_error);
}

}  // namespace decor
