// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bookmarks/bookmark.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

inline constexpr int kBankSchemaVersion = 1;
inline constexpr std::size_t kDefaultPrefilterSize = 5;

/// Global bookmark pool with a per-kind index. Ids are assigned
/// monotonically and never reused.
class MemoryBank {
 public:
  /// Assigns a fresh id to `b` and stores it. Returns the id.
  BookmarkId insert(Bookmark b);
  /// Replaces an existing bookmark with the same id.
  void update(const Bookmark& b);

  const Bookmark& get(BookmarkId id) const;
  Bookmark& get(BookmarkId id);
  const Bookmark* find(BookmarkId id) const;
  bool contains(BookmarkId id) const { return bookmarks_.contains(id); }

  std::size_t size() const noexcept { return bookmarks_.size(); }
  bool empty() const noexcept { return bookmarks_.empty(); }
  BookmarkId next_id() const noexcept { return next_id_; }

  /// Ids of one kind, ascending.
  const std::vector<BookmarkId>& ids_of(BookmarkKind kind) const;
  /// All bookmarks ordered by id.
  const std::map<BookmarkId, Bookmark>& all() const noexcept { return bookmarks_; }

  /// Token set of a stored question, computed once at insert.
  const TokenSet& question_tokens(BookmarkId id) const;

  bool operator==(const MemoryBank& other) const {
    return next_id_ == other.next_id_ && bookmarks_ == other.bookmarks_;
  }

 private:
  friend MemoryBank bank_from_json_text(std::string_view text);

  std::map<BookmarkId, Bookmark> bookmarks_;
  std::map<BookmarkId, TokenSet> tokens_;
  std::map<BookmarkKind, std::vector<BookmarkId>> by_kind_;
  BookmarkId next_id_ = 1;
};

struct Candidate {
  BookmarkId id = 0;
  double score = 0.0;
};

/// Same-kind bookmarks with positive overlap, best first, at most k_prime.
/// Ties: higher sync_point, then lower id.
std::vector<Candidate> prefilter(const MemoryBank& bank, std::string_view query,
                                 BookmarkKind kind, std::size_t k_prime);

enum class Relation { kReuse, kDerive, kNone };
std::string_view to_string(Relation r);

struct Reuse {
  BookmarkId id;
  bool operator==(const Reuse&) const = default;
};
struct Derive {
  BookmarkId parent;
  bool operator==(const Derive&) const = default;
};
struct CreateNew {
  bool operator==(const CreateNew&) const = default;
};
using MatchOutcome = std::variant<Reuse, Derive, CreateNew>;

/// "reuse" / "derive" / "create".
std::string_view outcome_name(const MatchOutcome& outcome);

struct MatchPolicy {
  bool derive_enabled = true;
  bool reuse_enabled = true;
};

/// Classifies the relation between a proposed query and one stored bookmark.
using RelationJudge = std::function<Relation(std::string_view query, const Bookmark& candidate)>;

/// Two-pass resolution over rank-ordered candidates: any "reuse" wins (first
/// in rank order), otherwise the first "derive", otherwise CreateNew. The judge
/// is consulted in rank order and scanning stops at the first reuse. With
/// reuse disabled every query creates; with derive disabled a derive becomes
/// CreateNew.
MatchOutcome match(std::string_view query, const MemoryBank& bank,
                   const std::vector<Candidate>& candidates, const RelationJudge& judge,
                   MatchPolicy policy = {});

/// Fresh bookmark at the storyline start with an "Unknown" answer. Behavioral
/// bookmarks require a subject. The id is left 0 until inserted.
Bookmark create_bookmark(std::string question, BookmarkKind kind,
                         std::optional<std::string> subject = std::nullopt);

/// Projects the parent's answer onto a new question.
using DeriveInitializer =
    std::function<std::string(const Bookmark& parent, std::string_view question)>;

/// Child inherits the parent's sync point. Aux starts empty (concept keywords
/// are recomputed from the new question). An "Unknown" parent yields an
/// "Unknown" child without consulting the initializer.
Bookmark derive_bookmark(const Bookmark& parent, std::string question, BookmarkKind kind,
                         std::optional<std::string> subject, const DeriveInitializer& init);

std::string bank_to_json_text(const MemoryBank& bank);
MemoryBank bank_from_json_text(std::string_view text);
void save_bank(const MemoryBank& bank, const std::filesystem::path& path);
MemoryBank load_bank(const std::filesystem::path& path);

}  // namespace bookmarks
