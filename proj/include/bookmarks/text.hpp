// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bookmarks {

using TokenSet = std::set<std::string>;

/// Lowercase, drop punctuation and possessive 's, remove stop words.
/// Returns unique tokens.
TokenSet normalize_tokens(std::string_view text);

/// Jaccard |a ∩ b| / |a ∪ b|; 0 when both are empty.
double overlap_score(const TokenSet& a, const TokenSet& b);

bool is_stop_word(std::string_view token);

/// The shipped stop-word list, in its documented order.
const std::vector<std::string_view>& stop_words();

/// ASCII lowercase. UTF-8 continuation bytes pass through.
std::string to_lower(std::string_view text);

/// Keywords a concept bookmark scans for: content tokens of the question
/// minus question scaffolding words, plus any double-quoted phrase verbatim
/// (lowercased). Sorted, unique.
std::vector<std::string> concept_keywords(std::string_view question);

/// Case-insensitive substring test of any keyword against `text`.
bool contains_any_keyword(std::string_view text, const std::vector<std::string>& keywords);

std::string trim(std::string_view text);

}  // namespace bookmarks
