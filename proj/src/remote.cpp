// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/remote.hpp"

#include <chrono>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"

namespace bookmarks {

using json = nlohmann::json;

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ConfigError("malformed endpoint URL '" + url + "'");
  Endpoint e;
  e.scheme = m[1].str();
  for (char& c : e.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  e.host = m[2].str();
  e.port = m[3].matched ? std::stoi(m[3].str()) : (e.scheme == "https" ? 443 : 80);
  e.path = m[4].matched ? m[4].str() : "/v1/chat/completions";
  return e;
}

std::string chat_request_body(const OracleRequest& request, const std::string& model) {
  json body;
  body["model"] = model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output;
  return body.dump();
}

std::string extract_first_choice(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw OracleError(std::string("response is not JSON: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw OracleError("response has no choices: " + body.substr(0, 512));
  }
  const json& first = j["choices"][0];
  if (first.contains("message") && first["message"].contains("content") &&
      first["message"]["content"].is_string()) {
    return first["message"]["content"].get<std::string>();
  }
  if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  throw OracleError("first choice carries no text: " + body.substr(0, 512));
}

RemoteBackend::RemoteBackend(Endpoint endpoint, std::string api_key, int attempts, int backoff_ms,
                             int timeout_ms)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      attempts_(attempts),
      backoff_ms_(backoff_ms),
      timeout_ms_(timeout_ms) {}

std::string RemoteBackend::complete(const OracleRequest& request, const std::string& model) {
  const std::string base =
      endpoint_.scheme + "://" + endpoint_.host + ":" + std::to_string(endpoint_.port);
  httplib::Client client(base);
  const auto timeout = std::chrono::milliseconds(timeout_ms_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

  const std::string body = chat_request_body(request, model);
  std::string last_error;
  for (int attempt = 0; attempt < attempts_; ++attempt) {
    if (attempt > 0) {
      const int delay = backoff_ms_ * (1 << std::min(attempt - 1, 10));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    ++http_attempts_;
    auto result = client.Post(endpoint_.path, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      spdlog::warn("{} attempt {}/{}: {}", to_string(request.role), attempt + 1, attempts_, last_error);
      continue;
    }
    if (result->status == 200) return extract_first_choice(result->body);
    last_error = "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 2048);
    if (result->status == 429 || result->status >= 500) {
      spdlog::warn("{} attempt {}/{}: {}", to_string(request.role), attempt + 1, attempts_, last_error);
      continue;
    }
    throw OracleError(std::string(to_string(request.role)) + " backend error " + last_error);
  }
  throw OracleError(std::string(to_string(request.role)) + " failed after " +
                    std::to_string(attempts_) + " attempts; last error " + last_error);
}

}  // namespace bookmarks
