// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"
#include "bookmarks/hashing.hpp"
#include "bookmarks/remote.hpp"
#include "bookmarks/scripted.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

std::string_view to_string(OracleRole role) {
  switch (role) {
    case OracleRole::kProposer: return "Proposer";
    case OracleRole::kRelationJudge: return "RelationJudge";
    case OracleRole::kDeriveInitializer: return "DeriveInitializer";
    case OracleRole::kStateTransitioner: return "StateTransitioner";
    case OracleRole::kEvidenceFilter: return "EvidenceFilter";
    case OracleRole::kBehaviorSummarizer: return "BehaviorSummarizer";
    case OracleRole::kConceptSummarizer: return "ConceptSummarizer";
    case OracleRole::kActor: return "Actor";
    case OracleRole::kEMJudge: return "EMJudge";
    case OracleRole::kProfileUpdater: return "ProfileUpdater";
  }
  return "Actor";
}

std::optional<OracleRole> try_parse_role(std::string_view name) {
  for (OracleRole role : kAllRoles) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

const RoleSettings& GatewayConfig::settings(OracleRole role) const {
  static const RoleSettings kDefault;
  auto it = roles.find(role);
  return it == roles.end() ? kDefault : it->second;
}

GatewayConfig parse_gateway_config(const FlatConfig& config) {
  GatewayConfig out;
  out.backend_kind = config.get_or("backend.kind", "scripted");
  if (out.backend_kind != "scripted" && out.backend_kind != "remote") {
    throw ConfigError("backend.kind must be 'scripted' or 'remote', got '" + out.backend_kind + "'");
  }
  out.endpoint = config.get_or("backend.endpoint", "");
  out.credential_env = config.get_or("backend.credential_env", "");
  if (auto fixtures = config.get("backend.fixtures")) out.fixtures = config.resolve_path(*fixtures);
  out.ruleset = config.get_or("backend.rules", "desk");
  if (out.ruleset != "desk" && out.ruleset != "none") {
    throw ConfigError("backend.rules must be 'desk' or 'none', got '" + out.ruleset + "'");
  }
  if (auto cache = config.get("cache.path"); cache && !cache->empty()) {
    out.cache_path = config.resolve_path(*cache);
  }
  out.retry_attempts = static_cast<int>(config.get_int("retry.attempts", out.retry_attempts));
  out.backoff_ms = static_cast<int>(config.get_int("retry.backoff_ms", out.backoff_ms));
  out.timeout_ms = static_cast<int>(config.get_int("retry.timeout_ms", out.timeout_ms));
  if (out.retry_attempts < 1) throw ConfigError("retry.attempts must be at least 1");

  RoleSettings defaults;
  defaults.model = config.get_or("roles.*.model", defaults.model);
  defaults.temperature = config.get_double("roles.*.temperature", defaults.temperature);
  defaults.max_output = static_cast<int>(config.get_int("roles.*.max_output", defaults.max_output));
  for (OracleRole role : kAllRoles) out.roles[role] = defaults;

  for (const auto& [key, value] : config.values()) {
    if (!key.starts_with("roles.")) continue;
    const auto dot = key.find('.', 6);
    if (dot == std::string::npos) throw ConfigError("malformed role key '" + key + "'");
    const std::string name = key.substr(6, dot - 6);
    const std::string field = key.substr(dot + 1);
    if (name == "*") continue;
    auto role = try_parse_role(name);
    if (!role) throw ConfigError("unknown role '" + name + "' in key '" + key + "'");
    RoleSettings& s = out.roles[*role];
    if (field == "model") {
      s.model = value;
    } else if (field == "temperature") {
      s.temperature = config.get_double(key, s.temperature);
    } else if (field == "max_output") {
      s.max_output = static_cast<int>(config.get_int(key, s.max_output));
    } else {
      throw ConfigError("unknown role setting '" + field + "' in key '" + key + "'");
    }
  }

  if (out.backend_kind == "remote") {
    if (out.endpoint.empty()) throw ConfigError("remote backend requires backend.endpoint");
    if (out.credential_env.empty()) throw ConfigError("remote backend requires backend.credential_env");
  }
  return out;
}

namespace {

std::string fold_answer(std::string_view text) {
  std::string s = to_lower(trim(text));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '"' || s.back() == '\'')) {
    s.pop_back();
  }
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
  return trim(s);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

std::optional<bool> parse_yes_no(std::string_view text) {
  const std::string s = fold_answer(text);
  if (s == "yes") return true;
  if (s == "no") return false;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view text) {
  const std::string s = fold_answer(text);
  if (s == "reuse") return Relation::kReuse;
  if (s == "derive") return Relation::kDerive;
  if (s == "none") return Relation::kNone;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// OracleGateway

OracleGateway::OracleGateway(std::unique_ptr<OracleBackend> backend, GatewayConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) throw ConfigError("gateway requires a backend");
  if (config_.cache_path) cache_ = std::make_unique<ResponseCache>(*config_.cache_path);
}

OracleRequest OracleGateway::make_request(OracleRole role, std::string prompt) const {
  const RoleSettings& s = config_.settings(role);
  return OracleRequest{role, std::move(prompt), s.max_output, s.temperature};
}

std::string OracleGateway::cache_key(const OracleRequest& request, std::string_view model) {
  std::ostringstream temperature;
  temperature << std::setprecision(6) << request.temperature;
  std::string material(to_string(request.role));
  material += '\x1f';
  material.append(model);
  material += '\x1f';
  material += temperature.str();
  material += '\x1f';
  material += request.prompt;
  return sha256_hex(material);
}

std::string OracleGateway::call(const OracleRequest& request) {
  const std::string& model = config_.settings(request.role).model;
  std::string key;
  if (cache_) {
    key = cache_key(request, model);
    if (auto hit = cache_->lookup(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  ++backend_calls_;
  std::string response = backend_->complete(request, model);
  if (cache_) {
    cache_->append(CacheRecord{key, std::string(to_string(request.role)), model, response,
                               utc_timestamp()});
  }
  return response;
}

bool OracleGateway::classify_binary(OracleRole role, std::string prompt) {
  const std::string response = call(make_request(role, std::move(prompt)));
  if (auto parsed = parse_yes_no(response)) return *parsed;
  spdlog::warn("{}: unparseable yes/no output '{}', treated as no", to_string(role), response);
  return false;
}

Relation OracleGateway::classify_relation(std::string prompt) {
  const std::string response = call(make_request(OracleRole::kRelationJudge, std::move(prompt)));
  if (auto parsed = parse_relation(response)) return *parsed;
  spdlog::warn("RelationJudge: unparseable output '{}', treated as none", response);
  return Relation::kNone;
}

std::unique_ptr<OracleGateway> configure_gateway(const GatewayConfig& config) {
  std::unique_ptr<OracleBackend> backend;
  if (config.backend_kind == "remote") {
    const char* key = std::getenv(config.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("credential environment variable '" + config.credential_env + "' is not set");
    }
    backend = std::make_unique<RemoteBackend>(parse_endpoint(config.endpoint), key,
                                              config.retry_attempts, config.backoff_ms,
                                              config.timeout_ms);
  } else {
    auto scripted = std::make_unique<ScriptedBackend>();
    if (config.fixtures) scripted->load_fixture_dir(*config.fixtures);
    scripted->use_builtin_rules(config.ruleset == "desk");
    backend = std::move(scripted);
  }
  return std::make_unique<OracleGateway>(std::move(backend), config);
}

// ---------------------------------------------------------------------------
// OracleSession

void OracleSession::record(OracleRole role, const std::string& prompt) {
  ++counts_[role];
  if (observer_) observer_(role, prompt);
}

std::string OracleSession::generate(OracleRole role, std::string prompt) {
  record(role, prompt);
  return gateway_->call(gateway_->make_request(role, std::move(prompt)));
}

bool OracleSession::yes_no(OracleRole role, std::string prompt) {
  record(role, prompt);
  return gateway_->classify_binary(role, std::move(prompt));
}

Relation OracleSession::relation(std::string prompt) {
  record(OracleRole::kRelationJudge, prompt);
  return gateway_->classify_relation(std::move(prompt));
}

std::size_t OracleSession::total_calls() const {
  std::size_t total = 0;
  for (const auto& [role, n] : counts_) total += n;
  return total;
}

}  // namespace bookmarks
