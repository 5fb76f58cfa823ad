#pragma once

#include <string>

#include "decor/deconstruct.hpp"
#include "decor/sifting.hpp"

namespace decor {

/// Single-turn chat over HTTP/JSON: POST {system, user} to `url`, reply
/// {"text": "..."}. Credentials, when configured, are sent as a bearer
/// token read from the named environment variable.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string url, std::string api_key_env = {},
                  int timeout_seconds = 30);
  std::string complete(const std::string& system_text,
                       const std::string& user_text) override;

  /// Cheap reachability check for /health.
  bool reachable() const;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  int timeout_seconds_;
};

/// Remote embedding contract: POST {"text": "..."} to `url`, reply
/// {"vector": [...]} of the configured dimension.
class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(std::string url, std::size_t dim,
               std::string api_key_env = {}, int timeout_seconds = 30);
  EmbeddingVector embed(const std::string& text) override;
  std::string tag() const override;

 private:
  std::string base_;
  std::string path_;
  std::size_t dim_;
  std::string api_key_;
  int timeout_seconds_;
};

}  // namespace decor
