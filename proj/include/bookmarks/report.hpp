// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bookmarks/engine.hpp"

namespace bookmarks {

inline constexpr std::string_view kEngineVersion = "0.1.0";
inline constexpr int kTraceSchemaVersion = 1;

/// One JSON Lines record per replayed step.
struct TraceRecord {
  std::size_t step = 0;  // position in the replay, 1-based
  std::size_t index = 0;
  std::string character;
  std::string method;
  std::string ablation;
  std::string config_hash;
  std::vector<ProposalTrace> proposals;
  std::size_t near_count = 0;
  std::map<std::string, std::size_t> oracle_calls;
  std::string predicted;
  std::string reference;
  std::optional<bool> em;  // nullopt: excluded from EM
  bool fallback = false;
  std::optional<std::string> error;

  bool operator==(const TraceRecord&) const = default;
};

std::string trace_to_json_line(const TraceRecord& record);
TraceRecord trace_from_json_line(std::string_view line);
std::vector<TraceRecord> read_traces(const std::filesystem::path& path);

struct Efficiency {
  std::size_t proposals = 0;  // proposals that reached a match outcome
  std::size_t reuse = 0;
  std::size_t derive = 0;
  std::size_t create = 0;
  std::size_t processed = 0;
  std::size_t from_scratch = 0;
  double hit_rate = 0.0;
  double reuse_rate = 0.0;
  double derive_rate = 0.0;
  double create_rate = 0.0;
  double saved_fraction = 0.0;
};

/// hit_rate = (reuse + derive) / proposals; saved_fraction =
/// 1 - sum(processed) / sum(index - 1) over those proposals. Zero
/// denominators give 0.
Efficiency compute_efficiency(const std::vector<TraceRecord>& traces);

struct CharacterReport {
  std::string character;
  std::size_t steps = 0;
  std::size_t n_judged = 0;
  std::size_t n_excluded = 0;
  std::size_t em_hits = 0;
  double em_rate = 0.0;
  Efficiency efficiency;
  std::size_t oracle_calls_total = 0;
  std::map<std::string, std::size_t> oracle_calls;
};

struct RunReport {
  std::string method;
  std::string ablation;
  std::string artifact;
  std::string config_hash;
  std::string engine_version{kEngineVersion};
  std::vector<CharacterReport> characters;  // in first-seen trace order
  CharacterReport aggregate;                // character = "*"
  std::size_t step_errors = 0;
  double runtime_seconds = 0.0;  // kept out of the serialized report
};

/// Builds the report from traces alone.
RunReport build_report(const std::vector<TraceRecord>& traces, std::string artifact);

/// Deterministic JSON (runtime omitted).
std::string report_to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);

/// CSV columns: method, artifact, character, em_rate, n_judged, n_excluded,
/// hit_rate, reuse_rate, derive_rate, saved_fraction, oracle_calls_total.
/// One row per character then an aggregate row (character "*"); header only
/// when the report has no characters. Rates use six decimals.
std::string report_to_csv(const RunReport& report);

enum class ReportFormat { kJson, kCsv };
void write_report(const RunReport& report, const std::filesystem::path& path, ReportFormat format);

}  // namespace bookmarks
