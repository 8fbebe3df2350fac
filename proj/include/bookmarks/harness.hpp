// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bookmarks/baselines.hpp"
#include "bookmarks/config.hpp"
#include "bookmarks/engine.hpp"
#include "bookmarks/oracle.hpp"
#include "bookmarks/report.hpp"
#include "bookmarks/storyline.hpp"

namespace bookmarks {

enum class Method { kBookmarks, kVanilla, kRicl, kEta };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct RunConfig {
  std::filesystem::path storyline;
  std::string artifact;                 // defaults to the storyline file stem
  std::vector<std::string> characters;  // empty: every non-special character
  Method method = Method::kBookmarks;
  EngineConfig engine;
  std::size_t ricl_k = kDefaultRiclExemplars;
  std::uint64_t seed = 0;
  bool shared_bank = false;  // one bank for all characters, steps in storyline order
  std::size_t max_steps = 0;  // 0: no limit

  /// 16 hex digits over every field that affects results, including the
  /// storyline bytes.
  std::string hash() const;
};

/// Keys: run.storyline, run.artifact, run.characters, run.method,
/// run.ablation, run.seed, run.shared_bank, run.max_steps, engine.proposals,
/// engine.prefilter, engine.scene_window, engine.near_distance,
/// engine.context_cap, engine.chunk_size, engine.context_radius,
/// engine.behavior_window, engine.evidence_max, baseline.ricl_k.
/// Ablation flags with a method other than bookmarks are rejected.
RunConfig run_config_from(const FlatConfig& config);

/// One EMJudge call. nullopt when the judge fails or answers neither yes
/// nor no; such steps count toward neither side of the EM rate.
std::optional<bool> judge_em(OracleSession& session, std::string_view predicted,
                             std::string_view reference);

/// Finds prompts that quote actions at or after the step being predicted.
/// Only texts that are not also contained in another action are tracked,
/// so that short or repeated lines do not raise false alarms. EMJudge
/// prompts are skipped because they carry the reference by design.
class LeakageScanner {
 public:
  explicit LeakageScanner(const Storyline& story, std::size_t min_length = 12);

  void scan(std::size_t step_index, OracleRole role, const std::string& prompt);

  struct Finding {
    std::size_t step_index = 0;
    std::size_t leaked_index = 0;
    OracleRole role = OracleRole::kActor;
  };
  const std::vector<Finding>& findings() const noexcept { return findings_; }
  std::size_t prompts_scanned() const noexcept { return scanned_; }

 private:
  std::vector<std::pair<std::size_t, std::string>> distinctive_;  // (index, text), ascending
  std::vector<Finding> findings_;
  std::size_t scanned_ = 0;
};

struct ReplayOptions {
  /// Called for every oracle prompt with the index of the step in progress.
  std::function<void(std::size_t index, OracleRole role, const std::string& prompt)> prompt_observer;
  /// Stop cleanly after this many newly executed steps (simulated interruption).
  std::optional<std::size_t> stop_after;
};

struct ReplayResult {
  std::vector<TraceRecord> traces;  // resumed and new, in plan order
  RunReport report;
  std::size_t resumed = 0;
  std::size_t executed = 0;
  bool complete = false;
};

/// Replays the test split of every selected character into `out_dir`:
/// traces.jsonl (appended per step), state/ (bank or profile after each
/// step), report.json, report.csv and timing.json. Existing traces with the
/// same config hash are kept and their steps skipped; a different hash or
/// schema is an error.
ReplayResult replay(const RunConfig& config, OracleGateway& gateway,
                    const std::filesystem::path& out_dir, const ReplayOptions& options = {});

/// Report invariants: fractions in [0, 1], outcomes summing to proposals,
/// and efficiency recomputed from the traces equal to the report. Returns
/// one message per violation.
std::vector<std::string> check_invariants(const RunReport& report,
                                          const std::vector<TraceRecord>& traces);

}  // namespace bookmarks
