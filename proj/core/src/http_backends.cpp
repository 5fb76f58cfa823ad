#include "decor/http_backends.hpp"

#include <cstdlib>

#include <httplib.h>

#include <json.hpp>

namespace decor {

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
  // "http://host:port/path" -> ("http://host:port", "/path")
  auto scheme = url.find("://");
  auto slash =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string read_api_key(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  return value ? value : "";
}

httplib::Headers auth_headers(const std::string& api_key) {
  httplib::Headers headers;
  if (!api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key);
  }
  return headers;
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string url, std::string api_key_env,
                                 int timeout_seconds)
    : api_key_(read_api_key(api_key_env)),
      timeout_seconds_(timeout_seconds) {
  std::tie(base_, path_) = split_url(url);
}

std::string HttpChatBackend::complete(const std::string& system_text,
                                      const std::string& user_text) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);

  const nlohmann::json payload{{"system", system_text}, {"user", user_text}};
  auto res = client.Post(path_, auth_headers(api_key_), payload.dump(),
                         "application/json");
  if (!res || res->status != 200) {
    throw BackendUnavailable(
        "chat backend " + base_ + path_ + " failed: " +
        (res ? "HTTP " + std::to_string(res->status) : "no response"));
  }
  nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("text")) {
    // Hand the raw body back; parse_profile_json decides what to do.
    return res->body;
  }
  return j.at("text").get<std::string>();
}

bool HttpChatBackend::reachable() const {
  httplib::Client client(base_);
  client.set_connection_timeout(2, 0);
  auto res = client.Get("/");
  return static_cast<bool>(res);
}

HttpEmbedder::HttpEmbedder(std::string url, std::size_t dim,
                           std::string api_key_env, int timeout_seconds)
    : dim_(dim),
      api_key_(read_api_key(api_key_env)),
      timeout_seconds_(timeout_seconds) {
  std::tie(base_, path_) = split_url(url);
}

EmbeddingVector HttpEmbedder::embed(const std::string& text) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);

  const nlohmann::json payload{{"text", text}};
  auto res = client.Post(path_, auth_headers(api_key_), payload.dump(),
                         "application/json");
  if (!res || res->status != 200) {
    throw BackendUnavailable(
        "embedding backend " + base_ + path_ + " failed: " +
        (res ? "HTTP " + std::to_string(res->status) : "no response"));
  }
  nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("vector")) {
    throw BackendUnavailable("embedding backend returned no vector");
  }
  EmbeddingVector vec;
  vec.values = j.at("vector").get<std::vector<double>>();
  if (vec.dim() != dim_) throw DimensionMismatch(vec.dim(), dim_);
  return vec;
}

std::string HttpEmbedder::tag() const {
  return "remote-" + base_ + path_ + "-" + std::to_string(dim_);
}

}  // namespace decor
