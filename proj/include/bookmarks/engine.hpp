// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bookmarks/bank.hpp"
#include "bookmarks/oracle.hpp"
#include "bookmarks/prompts.hpp"
#include "bookmarks/storyline.hpp"
#include "bookmarks/synchronizers.hpp"

namespace bookmarks {

/// Ablation switches. `derive_off` and `reuse_off` restrict matching,
/// `near_off` drops recently synchronized bookmarks from the context and
/// `ibu` tracks behavior with chunked rewrites.
struct Ablation {
  bool derive_off = false;
  bool reuse_off = false;
  bool near_off = false;
  bool ibu = false;

  /// Comma list of the enabled flags in fixed order, "" when none.
  std::string to_string() const;
  /// Accepts derive_off, reuse_off, near_off, ibu; throws on anything else.
  static Ablation parse(std::string_view list);
  bool any() const { return derive_off || reuse_off || near_off || ibu; }
};

struct EngineConfig {
  std::size_t proposals = 5;       // K, queries per prediction
  std::size_t prefilter_size = 5;  // K', candidates judged per query
  std::size_t scene_window = kDefaultSceneWindow;
  std::size_t near_distance = 5;
  std::size_t context_cap = 6000;  // rendered grounding characters
  SyncSettings sync;
  Ablation ablation;
};

struct ContextEntry {
  BookmarkId id = 0;
  std::string question;
  std::string answer;
  BookmarkKind kind = BookmarkKind::kState;
  std::size_t sync_point = 0;
  bool operator==(const ContextEntry&) const = default;
};

struct GroundingContext {
  std::vector<ContextEntry> active;
  std::vector<ContextEntry> near;
  std::string rendered;
};

/// Outcome of resolving one proposed query.
struct ProposalTrace {
  std::string question;
  BookmarkKind kind = BookmarkKind::kState;
  std::string outcome;  // reuse | derive | create | error (match never completed)
  std::size_t processed = 0;
  std::size_t from_point = 0;  // sync point before synchronization
  std::optional<BookmarkId> bookmark;
  std::optional<std::string> error;
  bool operator==(const ProposalTrace&) const = default;
};

struct StepTrace {
  std::size_t index = 0;
  std::string character;
  std::vector<ProposalTrace> proposals;
  std::vector<std::string> dropped_lines;
  std::size_t near_count = 0;
  RoleCounts oracle_calls;
  std::string predicted;
  bool fallback = false;  // proposal failed; predicted without grounding
  std::optional<std::string> error;
  GroundingContext context;
};

/// Observation points around every synchronize call.
struct SyncHooks {
  std::function<void(const Bookmark& before, std::size_t target)> before;
  std::function<void(const Bookmark& after)> after;
};

/// Context string: an "Active memory" section, then a "Recent memory"
/// section. Unknown active answers are shown as not established; unknown near
/// entries are omitted. When the result exceeds `cap` characters, near entries
/// are dropped farthest (lowest sync point, then highest id) first. Empty
/// input renders kEmptyContext.
GroundingContext assemble_context(std::vector<ContextEntry> active, std::vector<ContextEntry> near,
                                  std::size_t cap);

/// One Actor call for the scene's character.
std::string predict_action(OracleSession& session, const Scene& scene,
                           const GroundingContext& context);

ContextEntry context_entry(const Bookmark& b);

/// Runs prediction steps against one storyline and bank.
class GroundingEngine {
 public:
  GroundingEngine(const Storyline& story, MemoryBank& bank, OracleSession& session,
                  EngineConfig config);

  /// Full step for action `index`: propose, resolve and synchronize each
  /// query to index-1, gather near bookmarks, assemble and predict.
  StepTrace step(std::size_t index);

  /// One Proposer call. Throws OracleError on backend failure; an empty item
  /// list is returned as-is.
  ProposalParse propose(const Scene& scene);

  /// Prefilter, match, reuse/derive/create, then synchronize to `point`.
  /// Failures are recorded in the trace rather than thrown.
  ProposalTrace resolve_and_sync(const Proposal& proposal, std::size_t point,
                                 std::string_view character);

  /// Bookmarks synchronized within `near_distance` of `point`, excluding
  /// `exclude` and unknown answers, nearest first then by id.
  std::vector<ContextEntry> collect_near(std::size_t point,
                                         const std::set<BookmarkId>& exclude) const;

  void set_sync_hooks(SyncHooks hooks) { hooks_ = std::move(hooks); }
  void set_oracles(SyncOracles oracles) { oracles_ = std::move(oracles); }

  const EngineConfig& config() const noexcept { return config_; }
  MemoryBank& bank() noexcept { return *bank_; }

 private:
  const Storyline* story_;
  MemoryBank* bank_;
  OracleSession* session_;
  EngineConfig config_;
  SyncOracles oracles_;
  SyncHooks hooks_;
};

}  // namespace bookmarks
