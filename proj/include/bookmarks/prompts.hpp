// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Prompt templates for every oracle role, and the output grammars they ask
// for. Every prompt opens with a header line `#prompt <name> <version>` and
// carries its inputs in `[Section]` blocks, one block per input, so scripted
// backends can read inputs back with prompt_sections(). Action lines are
// rendered as `Character: text` with embedded newlines flattened to spaces.
//
// Bumping kPromptVersion invalidates every cached response.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bookmarks/bookmark.hpp"
#include "bookmarks/storyline.hpp"

namespace bookmarks {

inline constexpr std::string_view kPromptVersion = "v1";
inline constexpr std::string_view kEmptyContext = "(no grounding memory)";

struct Proposal {
  std::string question;
  BookmarkKind kind = BookmarkKind::kState;
  bool operator==(const Proposal&) const = default;
};

struct ProposalParse {
  std::vector<Proposal> items;
  std::vector<std::string> dropped;  // non-blank lines that failed the grammar
};

/// Proposal grammar, one per line: `<n>. <KIND> | <question>` where `<n>` is a
/// positive integer followed by '.' or ')', KIND is CONCEPT, STATE or
/// BEHAVIORAL (any case) and the question is non-empty. Blank lines are
/// ignored; anything else is dropped. At most `limit` items are kept.
ProposalParse parse_proposals(std::string_view text, std::size_t limit);

/// Name of the template that produced `prompt` (from its header line).
std::string prompt_name(std::string_view prompt);
/// `[Section]` name -> body (without trailing newline).
std::map<std::string, std::string> prompt_sections(std::string_view prompt);

std::string proposer_prompt(const Scene& scene, std::size_t k);
std::string relation_prompt(std::string_view query, BookmarkKind kind, const Bookmark& candidate);
std::string derive_prompt(const Bookmark& parent, std::string_view question);
std::string state_transition_prompt(std::string_view question, std::string_view answer,
                                    std::span<const Action> chunk);
std::string evidence_filter_prompt(std::string_view question, std::string_view subject,
                                   std::span<const Action> context, const Action& action);
std::string behavior_summary_prompt(std::string_view question, std::string_view subject,
                                    std::span<const Evidence> evidence);
std::string concept_summary_prompt(std::string_view question, std::string_view answer,
                                   const std::vector<std::pair<Span, std::string>>& spans);
std::string actor_prompt(const Scene& scene, std::string_view grounding);
std::string em_judge_prompt(std::string_view predicted, std::string_view reference);
std::string profile_update_prompt(std::string_view character, std::string_view profile,
                                  std::span<const Action> context, const Action& action);

/// `Character: text` with newlines flattened.
std::string action_line(const Action& action);

}  // namespace bookmarks
