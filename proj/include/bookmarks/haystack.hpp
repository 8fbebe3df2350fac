// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bookmarks/config.hpp"
#include "bookmarks/engine.hpp"
#include "bookmarks/harness.hpp"
#include "bookmarks/oracle.hpp"
#include "bookmarks/prompts.hpp"
#include "bookmarks/storyline.hpp"

namespace bookmarks {

enum class NeedleKind { kConcept, kState, kBehavioral };

std::string_view to_string(NeedleKind kind);
NeedleKind parse_needle_kind(std::string_view name);

struct HaystackSpec {
  std::size_t filler_count = 1000;  // storyline length
  NeedleKind kind = NeedleKind::kConcept;
  std::size_t depth = 500;  // index of the needle, 1-based
  std::size_t distractors = 0;
  std::uint64_t seed = 1;
  bool control = false;  // no needle; the probe must stay Unknown
};

/// Reads haystack.filler_count, haystack.kind, haystack.depth,
/// haystack.distractors, haystack.seed and haystack.control.
HaystackSpec haystack_spec_from(const FlatConfig& config);

/// The character whose memory the probe asks about.
inline constexpr std::string_view kProbeCharacter = "Mika";

struct HaystackInstance {
  Storyline story;
  Proposal probe;
  std::vector<std::string> key_tokens;  // all must appear in a recovered answer
  std::vector<std::string> stale_tokens;  // must not appear (state: the old location)
  std::size_t needle_index = 0;  // 0 for controls
  std::vector<std::size_t> distractor_indices;
};

/// Seeded storyline of filler lines with one planted fact. Filler and
/// concept distractors are redrawn until they share no token with the probe
/// question or the key tokens and contain no concept keyword. Throws Error
/// when 1 <= depth <= filler_count does not hold or no clean filler exists.
HaystackInstance generate_haystack(const HaystackSpec& spec);

struct HaystackResult {
  bool success = false;
  std::string answer;  // synchronized answer, or the baseline's grounding text
  std::size_t processed = 0;
  std::size_t needle_index = 0;
  std::size_t oracle_calls = 0;
};

/// Probes the memory the method would hold right after the last action.
/// bookmarks: resolve and synchronize the probe query on a fresh bank.
/// ricl / eta: the grounding text for the probe character; vanilla: none.
/// Success means every key token (and no stale token) is in the answer, or
/// for controls that the answer is Unknown / carries no key token.
HaystackResult run_haystack(const HaystackSpec& spec, Method method, OracleGateway& gateway,
                            const EngineConfig& engine = {});

}  // namespace bookmarks
