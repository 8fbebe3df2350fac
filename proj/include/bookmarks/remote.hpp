// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <string>

#include "bookmarks/oracle.hpp"

namespace bookmarks {

struct Endpoint {
  std::string scheme;  // http | https
  std::string host;
  int port = 0;
  std::string path;  // defaults to /v1/chat/completions
};

Endpoint parse_endpoint(const std::string& url);

/// Chat-completion request body: {model, messages:[{role:"user", content}],
/// temperature, max_tokens}.
std::string chat_request_body(const OracleRequest& request, const std::string& model);
/// Text of the first choice (message.content, or text for completion-style replies).
std::string extract_first_choice(const std::string& body);

/// Chat-completion client with bounded retries. Transport errors, 429 and 5xx
/// responses are retried with exponential backoff; other statuses fail
/// immediately with the response body in the error.
class RemoteBackend : public OracleBackend {
 public:
  RemoteBackend(Endpoint endpoint, std::string api_key, int attempts, int backoff_ms,
                int timeout_ms);

  std::string complete(const OracleRequest& request, const std::string& model) override;
  std::string_view kind() const override { return "remote"; }

  std::size_t http_attempts() const noexcept { return http_attempts_.load(); }

 private:
  Endpoint endpoint_;
  std::string api_key_;
  int attempts_;
  int backoff_ms_;
  int timeout_ms_;
  std::atomic<std::size_t> http_attempts_{0};
};

}  // namespace bookmarks
