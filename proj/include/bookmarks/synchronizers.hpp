// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Type-specific synchronization: advance a bookmark from its sync point p to
// a target point t by reading only actions p+1..t. Local context for the
// evidence filter and concept spans is clipped to that suffix, so no
// synchronization ever reads at or below p.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bookmarks/bookmark.hpp"
#include "bookmarks/error.hpp"
#include "bookmarks/storyline.hpp"

namespace bookmarks {

class OracleSession;

struct SyncSettings {
  std::size_t chunk_size = 20;
  std::size_t context_radius = 2;
  std::size_t behavior_window = 5;
  std::size_t evidence_max = 20;
  /// Track behavioral bookmarks with chunked rewrites instead of evidence filtering.
  bool incremental_behavior = false;
};

using ConceptPassages = std::vector<std::pair<Span, std::string>>;

/// Oracle hooks used by the synchronizers.
struct SyncOracles {
  std::function<std::string(std::string_view question, std::string_view answer,
                            std::span<const Action> chunk)>
      transition;
  std::function<bool(std::string_view question, std::string_view subject,
                     std::span<const Action> context, const Action& action)>
      filter;
  std::function<std::string(std::string_view question, std::string_view subject,
                            std::span<const Evidence> evidence)>
      summarize_behavior;
  std::function<std::string(std::string_view question, std::string_view answer,
                            const ConceptPassages& passages)>
      summarize_concept;
};

/// Binds every hook to the role prompts issued through `session`.
SyncOracles session_oracles(OracleSession& session);

/// Raised when an oracle fails mid-sync. The bookmark has already been left at
/// its last durable step; `processed` counts the suffix actions folded in.
class SyncError : public Error {
 public:
  SyncError(const std::string& what, std::size_t processed)
      : Error(what), processed_(processed) {}
  std::size_t processed() const noexcept { return processed_; }

 private:
  std::size_t processed_;
};

struct SyncStats {
  std::size_t processed = 0;  // suffix actions consumed
  std::size_t transition_calls = 0;
  std::size_t filter_calls = 0;
  std::size_t summarizer_calls = 0;
};

/// Answer plus the last chunk boundary it reflects. Updated in place after
/// every completed chunk.
struct StateProgress {
  std::string answer;
  std::size_t boundary = 0;
};

/// Folds `suffix` into `progress` in consecutive chunks of `chunk_size` (the
/// last may be short), one transition call per chunk. On failure `progress`
/// reflects the last completed chunk and the exception propagates.
SyncStats sync_state(std::string_view question, StateProgress& progress,
                     std::span<const Action> suffix, std::size_t chunk_size,
                     const SyncOracles& oracles);

struct BehavioralResult {
  std::string answer;
  std::vector<Evidence> evidence;
  std::size_t added = 0;
  SyncStats stats;
};

/// Filters the subject's actions in `suffix`, appends accepted ones to the
/// evidence (deduplicated by index) and, when anything was added, summarizes
/// the most recent `evidence_max` snippets.
BehavioralResult sync_behavioral(std::string_view question, std::string_view subject,
                                 std::string_view answer, const std::vector<Evidence>& evidence,
                                 std::span<const Action> suffix, const SyncSettings& settings,
                                 const SyncOracles& oracles);

struct ConceptResult {
  std::string answer;
  std::vector<Span> spans;      // all evidence spans, merged
  std::vector<Span> new_spans;  // spans from this suffix, merged among themselves
  SyncStats stats;
};

/// Keyword hits in `suffix` each contribute [j - r, j + r] clipped to the
/// suffix. New spans are merged into `spans`; when there was any hit the
/// summarizer sees the prior answer and the text of the new spans.
ConceptResult sync_concept(std::string_view question, const std::vector<std::string>& keywords,
                           std::string_view answer, const std::vector<Span>& spans,
                           std::span<const Action> suffix, const SyncSettings& settings,
                           const SyncOracles& oracles);

/// Advances `bookmark` to `target`. A no-op apart from the sync point when the
/// suffix is empty. Throws SyncError after recording durable progress.
SyncStats synchronize(Bookmark& bookmark, const Storyline& story, std::size_t target,
                      const SyncSettings& settings, const SyncOracles& oracles);

}  // namespace bookmarks
