// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace bookmarks {

/// Inclusive range of 1-based action indexes.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
  std::size_t length() const noexcept { return end - start + 1; }
};

/// Sorts and coalesces spans that overlap or touch (next.start <= end + 1).
/// The result is the maximal runs of the covered index set.
inline std::vector<Span> merge_spans(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<Span> merged;
  merged.reserve(spans.size());
  for (const Span& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end + 1) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

/// Merges `added` into an already-merged span list.
inline std::vector<Span> merge_into(const std::vector<Span>& existing,
                                    const std::vector<Span>& added) {
  std::vector<Span> all(existing);
  all.insert(all.end(), added.begin(), added.end());
  return merge_spans(std::move(all));
}

/// Span [hit - radius, hit + radius] clipped to [lo, hi].
inline Span span_around(std::size_t hit, std::size_t radius, std::size_t lo, std::size_t hi) {
  const std::size_t start = hit > lo + radius ? hit - radius : lo;
  const std::size_t end = std::min(hit + radius, hi);
  return Span{start, end};
}

}  // namespace bookmarks
