// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bookmarks/oracle.hpp"

namespace bookmarks {

/// A scripted response rule; returns nullopt to pass the request on.
using ScriptRule = std::function<std::optional<std::string>(const OracleRequest&)>;

/// Deterministic backend for tests and desk-scale runs. Resolution order:
/// exact-prompt fixtures, then registered rules in registration order, then
/// the builtin rule set. Anything left unresolved is an "unscripted call"
/// error naming the role and prompt hash.
class ScriptedBackend : public OracleBackend {
 public:
  std::string complete(const OracleRequest& request, const std::string& model) override;
  std::string_view kind() const override { return "scripted"; }

  void add_fixture(OracleRole role, std::string prompt, std::string response);
  void add_rule(OracleRole role, ScriptRule rule);
  /// "Respond `then` iff the prompt contains `needle`, else `otherwise` (when set)."
  void add_contains_rule(OracleRole role, std::string needle, std::string then,
                         std::optional<std::string> otherwise = std::nullopt);

  /// Loads every *.jsonl file in `dir` (sorted by name). Each line is one of
  ///   {"role", "prompt", "response"}
  ///   {"role", "prompt_sha256", "response"}
  ///   {"role", "contains", "response", "otherwise"?}
  void load_fixture_dir(const std::filesystem::path& dir);

  /// Enables the "desk" builtin rules covering every role.
  void use_builtin_rules(bool enabled = true) { builtin_ = enabled; }

  /// Number of requests answered, by any route.
  std::size_t answered() const noexcept { return answered_.load(); }

 private:
  std::map<std::pair<OracleRole, std::string>, std::string> fixtures_;  // keyed by prompt sha256
  std::vector<std::pair<OracleRole, ScriptRule>> rules_;
  bool builtin_ = false;
  std::atomic<std::size_t> answered_{0};
};

/// The builtin "desk" rules: cheap, pure functions of the prompt that behave
/// plausibly for every role. Returns nullopt for prompts they do not
/// recognize.
std::optional<std::string> builtin_response(const OracleRequest& request);

}  // namespace bookmarks
