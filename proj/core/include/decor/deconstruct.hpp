#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decor/types.hpp"

namespace decor {

/// Minimal single-turn chat contract: system text + user text in,
/// assistant text out. Implementations must tolerate concurrent calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& system_text,
                               const std::string& user_text) = 0;
};

/// System prompt for the capability decomposition engine.
const std::string& deconstruction_system_prompt();

/// Renders the decomposition instruction for one query. Deterministic;
/// the query is substituted verbatim into the template.
std::string render_deconstruction_prompt(const std::string& query);

/// Parses the strict {S, S_reason, K, K_reason, D, D_reason} payload.
/// A markdown-fenced payload is stripped once as leniency, then must parse.
CapabilityProfile parse_profile_json(const std::string& text);

/// Produces a CapabilityProfile for a query.
class Deconstructor {
 public:
  virtual ~Deconstructor() = default;
  virtual CapabilityProfile deconstruct(const std::string& query) = 0;
};

/// One keyword rule: queries containing `needle` (case-insensitive) map to
/// the attached profile parts. An empty needle matches every query and
/// serves as the catch-all default.
struct KeywordRule {
  std::string needle;
  LabelSet skills;
  LabelSet knowledge;
  DifficultyLevel difficulty;
};

nlohmann::json rules_to_json(const std::vector<KeywordRule>& rules);
std::vector<KeywordRule> rules_from_json(const nlohmann::json& j);

/// Deterministic rule-table deconstructor for offline use. The longest
/// matching needle wins; ties fall back to table order. The table must
/// contain a catch-all rule so the backend is total.
class KeywordDeconstructor : public Deconstructor {
 public:
  explicit KeywordDeconstructor(std::vector<KeywordRule> rules);
  CapabilityProfile deconstruct(const std::string& query) override;

 private:
  std::vector<KeywordRule> rules_;
};

/// Chat-backed deconstructor: renders the prompt, calls the backend, and
/// parses the reply, retrying on malformed output up to `max_retries`
/// additional attempts.
class RemoteDeconstructor : public Deconstructor {
 public:
  RemoteDeconstructor(std::shared_ptr<ChatBackend> backend,
                      int max_retries = 2);
  CapabilityProfile deconstruct(const std::string& query) override;

 private:
  std::shared_ptr<ChatBackend> backend_;
  int max_retries_;
};

}  // namespace decor
