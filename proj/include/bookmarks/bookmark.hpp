// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bookmarks/spans.hpp"

namespace bookmarks {

using BookmarkId = std::uint64_t;

inline constexpr std::string_view kUnknownAnswer = "Unknown";

enum class BookmarkKind { kConcept, kState, kBehavioral };

std::string_view to_string(BookmarkKind kind);
/// Accepts "concept" / "state" / "behavioral" in any case; throws otherwise.
BookmarkKind parse_kind(std::string_view text);
std::optional<BookmarkKind> try_parse_kind(std::string_view text);

/// Chunked state tracking: the last chunk boundary already folded into the answer.
struct StateAux {
  std::size_t last_boundary = 0;
  bool operator==(const StateAux&) const = default;
};

struct Evidence {
  std::size_t index = 0;
  std::string snippet;
  bool operator==(const Evidence&) const = default;
};

struct BehavioralAux {
  std::vector<Evidence> evidence;  // ascending, unique by index
  bool operator==(const BehavioralAux&) const = default;
};

struct ConceptAux {
  std::vector<Span> spans;  // merged, sorted
  std::vector<std::string> keywords;
  bool operator==(const ConceptAux&) const = default;
};

using AuxMemory = std::variant<StateAux, BehavioralAux, ConceptAux>;

AuxMemory empty_aux(BookmarkKind kind);

/// A question whose answer is valid at storyline position `sync_point`.
struct Bookmark {
  BookmarkId id = 0;
  std::string question;
  std::string answer{kUnknownAnswer};
  BookmarkKind kind = BookmarkKind::kState;
  std::size_t sync_point = 0;
  AuxMemory aux{StateAux{}};
  std::optional<std::string> subject;
  std::optional<BookmarkId> parent;  // lineage only; no behavior attached

  bool operator==(const Bookmark&) const = default;
  bool unknown() const noexcept { return answer == kUnknownAnswer; }
};

}  // namespace bookmarks
