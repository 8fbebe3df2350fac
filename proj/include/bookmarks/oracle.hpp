// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "bookmarks/bank.hpp"
#include "bookmarks/cache.hpp"
#include "bookmarks/config.hpp"

namespace bookmarks {

enum class OracleRole {
  kProposer,
  kRelationJudge,
  kDeriveInitializer,
  kStateTransitioner,
  kEvidenceFilter,
  kBehaviorSummarizer,
  kConceptSummarizer,
  kActor,
  kEMJudge,
  kProfileUpdater,
};

inline constexpr std::array<OracleRole, 10> kAllRoles = {
    OracleRole::kProposer,          OracleRole::kRelationJudge,
    OracleRole::kDeriveInitializer, OracleRole::kStateTransitioner,
    OracleRole::kEvidenceFilter,    OracleRole::kBehaviorSummarizer,
    OracleRole::kConceptSummarizer, OracleRole::kActor,
    OracleRole::kEMJudge,           OracleRole::kProfileUpdater,
};

std::string_view to_string(OracleRole role);
std::optional<OracleRole> try_parse_role(std::string_view name);

struct OracleRequest {
  OracleRole role = OracleRole::kActor;
  std::string prompt;
  int max_output = 256;
  double temperature = 0.0;
};

/// Something that turns a request into text: a chat-completion endpoint or
/// the scripted backend.
class OracleBackend {
 public:
  virtual ~OracleBackend() = default;
  virtual std::string complete(const OracleRequest& request, const std::string& model) = 0;
  virtual std::string_view kind() const = 0;
};

struct RoleSettings {
  std::string model = "aux-model";
  double temperature = 0.0;
  int max_output = 256;
};

struct GatewayConfig {
  std::string backend_kind = "scripted";  // scripted | remote
  std::string endpoint;
  std::string credential_env;
  std::optional<std::filesystem::path> fixtures;
  std::string ruleset = "desk";  // scripted builtin rules; "none" disables
  std::map<OracleRole, RoleSettings> roles;
  std::optional<std::filesystem::path> cache_path;
  int retry_attempts = 3;
  int backoff_ms = 200;
  int timeout_ms = 60000;

  const RoleSettings& settings(OracleRole role) const;
};

/// Reads backend.*, roles.<Role>.*, cache.path and retry.* keys. `roles.*.model`
/// and `roles.*.temperature` set defaults for every role. Unknown role names
/// and unknown backend kinds are errors; a remote backend needs an endpoint.
GatewayConfig parse_gateway_config(const FlatConfig& config);

/// Lenient yes/no: trims, case-folds, drops trailing punctuation.
std::optional<bool> parse_yes_no(std::string_view text);
std::optional<Relation> parse_relation(std::string_view text);

/// Routes every role-tagged call through the response cache to a backend.
/// Safe for concurrent callers.
class OracleGateway {
 public:
  OracleGateway(std::unique_ptr<OracleBackend> backend, GatewayConfig config);

  /// Builds a request using the role's configured temperature and budget.
  OracleRequest make_request(OracleRole role, std::string prompt) const;

  std::string call(const OracleRequest& request);

  /// Constrained yes/no call. Unparseable output counts as "no" and is logged.
  bool classify_binary(OracleRole role, std::string prompt);
  /// reuse/derive/none call. Unparseable output counts as "none" and is logged.
  Relation classify_relation(std::string prompt);

  const GatewayConfig& config() const noexcept { return config_; }
  OracleBackend& backend() noexcept { return *backend_; }
  ResponseCache* cache() noexcept { return cache_.get(); }

  /// Requests that reached the backend (cache misses).
  std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::uint64_t cache_hits() const noexcept { return cache_hits_.load(); }

  static std::string cache_key(const OracleRequest& request, std::string_view model);

 private:
  std::unique_ptr<OracleBackend> backend_;
  GatewayConfig config_;
  std::unique_ptr<ResponseCache> cache_;
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

/// Builds the backend named by the config (reading fixtures or checking the
/// credential variable) and opens the cache.
std::unique_ptr<OracleGateway> configure_gateway(const GatewayConfig& config);

using RoleCounts = std::map<OracleRole, std::size_t>;

/// Per-replay view of a gateway that tallies calls by role and exposes every
/// issued prompt to an optional observer. Single-threaded.
class OracleSession {
 public:
  using PromptObserver = std::function<void(OracleRole, const std::string&)>;

  explicit OracleSession(OracleGateway& gateway) : gateway_(&gateway) {}

  std::string generate(OracleRole role, std::string prompt);
  bool yes_no(OracleRole role, std::string prompt);
  Relation relation(std::string prompt);

  const RoleCounts& counts() const noexcept { return counts_; }
  std::size_t total_calls() const;
  void reset_counts() { counts_.clear(); }

  void set_prompt_observer(PromptObserver observer) { observer_ = std::move(observer); }
  OracleGateway& gateway() noexcept { return *gateway_; }

 private:
  void record(OracleRole role, const std::string& prompt);

  OracleGateway* gateway_;
  RoleCounts counts_;
  PromptObserver observer_;
};

}  // namespace bookmarks
