// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/synchronizers.hpp"

#include <algorithm>

#include "bookmarks/oracle.hpp"
#include "bookmarks/prompts.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {
namespace {

std::string or_unknown(std::string text) {
  text = trim(text);
  return text.empty() ? std::string(kUnknownAnswer) : text;
}

}  // namespace

SyncOracles session_oracles(OracleSession& session) {
  SyncOracles o;
  o.transition = [&session](std::string_view q, std::string_view y, std::span<const Action> chunk) {
    return session.generate(OracleRole::kStateTransitioner, state_transition_prompt(q, y, chunk));
  };
  o.filter = [&session](std::string_view q, std::string_view subject,
                        std::span<const Action> context, const Action& action) {
    return session.yes_no(OracleRole::kEvidenceFilter,
                          evidence_filter_prompt(q, subject, context, action));
  };
  o.summarize_behavior = [&session](std::string_view q, std::string_view subject,
                                    std::span<const Evidence> evidence) {
    return session.generate(OracleRole::kBehaviorSummarizer,
                            behavior_summary_prompt(q, subject, evidence));
  };
  o.summarize_concept = [&session](std::string_view q, std::string_view y,
                                   const ConceptPassages& passages) {
    return session.generate(OracleRole::kConceptSummarizer, concept_summary_prompt(q, y, passages));
  };
  return o;
}

SyncStats sync_state(std::string_view question, StateProgress& progress,
                     std::span<const Action> suffix, std::size_t chunk_size,
                     const SyncOracles& oracles) {
  if (chunk_size == 0) throw Error("chunk size must be at least 1");
  SyncStats stats;
  for (std::size_t offset = 0; offset < suffix.size(); offset += chunk_size) {
    auto chunk = suffix.subspan(offset, std::min(chunk_size, suffix.size() - offset));
    std::string next = or_unknown(oracles.transition(question, progress.answer, chunk));
    ++stats.transition_calls;
    progress.answer = std::move(next);
    progress.boundary = chunk.back().index;
    stats.processed += chunk.size();
  }
  return stats;
}

BehavioralResult sync_behavioral(std::string_view question, std::string_view subject,
                                 std::string_view answer, const std::vector<Evidence>& evidence,
                                 std::span<const Action> suffix, const SyncSettings& settings,
                                 const SyncOracles& oracles) {
  BehavioralResult result;
  result.answer = std::string(answer);
  result.evidence = evidence;
  const std::size_t last_seen = evidence.empty() ? 0 : evidence.back().index;

  for (std::size_t k = 0; k < suffix.size(); ++k) {
    const Action& action = suffix[k];
    if (action.character != subject) continue;
    if (action.index <= last_seen) continue;  // already judged in an earlier sync
    const std::size_t from = k > settings.behavior_window ? k - settings.behavior_window : 0;
    auto context = suffix.subspan(from, k - from);
    ++result.stats.filter_calls;
    if (oracles.filter(question, subject, context, action)) {
      result.evidence.push_back({action.index, action.text});
      ++result.added;
    }
  }
  result.stats.processed = suffix.size();

  if (result.added > 0) {
    std::span<const Evidence> recent(result.evidence);
    if (recent.size() > settings.evidence_max) {
      recent = recent.subspan(recent.size() - settings.evidence_max);
    }
    result.answer = or_unknown(oracles.summarize_behavior(question, subject, recent));
    ++result.stats.summarizer_calls;
  }
  return result;
}

ConceptResult sync_concept(std::string_view question, const std::vector<std::string>& keywords,
                           std::string_view answer, const std::vector<Span>& spans,
                           std::span<const Action> suffix, const SyncSettings& settings,
                           const SyncOracles& oracles) {
  ConceptResult result;
  result.answer = std::string(answer);
  result.spans = spans;
  result.stats.processed = suffix.size();
  if (suffix.empty()) return result;

  const std::size_t lo = suffix.front().index;
  const std::size_t hi = suffix.back().index;
  std::vector<Span> hits;
  for (const Action& action : suffix) {
    if (contains_any_keyword(action.text, keywords)) {
      hits.push_back(span_around(action.index, settings.context_radius, lo, hi));
    }
  }
  if (hits.empty()) return result;

  result.new_spans = merge_spans(std::move(hits));
  ConceptPassages passages;
  for (const Span& s : result.new_spans) {
    passages.emplace_back(s, render_actions(suffix.subspan(s.start - lo, s.length())));
  }
  result.answer = or_unknown(oracles.summarize_concept(question, answer, passages));
  ++result.stats.summarizer_calls;
  result.spans = merge_into(spans, result.new_spans);
  return result;
}

SyncStats synchronize(Bookmark& bookmark, const Storyline& story, std::size_t target,
                      const SyncSettings& settings, const SyncOracles& oracles) {
  const std::size_t start = bookmark.sync_point;
  if (target < start) {
    throw Error("cannot synchronize bookmark " + std::to_string(bookmark.id) + " backwards from " +
                std::to_string(start) + " to " + std::to_string(target));
  }
  if (target > story.size()) {
    throw Error("sync target " + std::to_string(target) + " beyond storyline end " +
                std::to_string(story.size()));
  }
  if (target == start) return {};

  const auto suffix = story.slice(start + 1, target);
  const bool chunked = bookmark.kind == BookmarkKind::kState ||
                       (bookmark.kind == BookmarkKind::kBehavioral && settings.incremental_behavior);

  if (chunked) {
    StateProgress progress{bookmark.answer, start};
    try {
      SyncStats stats = sync_state(bookmark.question, progress, suffix, settings.chunk_size, oracles);
      bookmark.answer = progress.answer;
      bookmark.sync_point = target;
      if (auto* aux = std::get_if<StateAux>(&bookmark.aux)) aux->last_boundary = target;
      return stats;
    } catch (const std::exception& e) {
      bookmark.answer = progress.answer;
      bookmark.sync_point = progress.boundary;
      if (auto* aux = std::get_if<StateAux>(&bookmark.aux)) aux->last_boundary = progress.boundary;
      throw SyncError(std::string("state sync interrupted: ") + e.what(), progress.boundary - start);
    }
  }

  try {
    if (bookmark.kind == BookmarkKind::kBehavioral) {
      if (!bookmark.subject) throw Error("behavioral bookmark without subject");
      auto& aux = std::get<BehavioralAux>(bookmark.aux);
      BehavioralResult r = sync_behavioral(bookmark.question, *bookmark.subject, bookmark.answer,
                                           aux.evidence, suffix, settings, oracles);
      bookmark.answer = std::move(r.answer);
      aux.evidence = std::move(r.evidence);
      bookmark.sync_point = target;
      return r.stats;
    }
    auto& aux = std::get<ConceptAux>(bookmark.aux);
    ConceptResult r = sync_concept(bookmark.question, aux.keywords, bookmark.answer, aux.spans,
                                   suffix, settings, oracles);
    bookmark.answer = std::move(r.answer);
    aux.spans = std::move(r.spans);
    bookmark.sync_point = target;
    return r.stats;
  } catch (const SyncError&) {
    throw;
  } catch (const std::exception& e) {
    throw SyncError(std::string(to_string(bookmark.kind)) + " sync failed: " + e.what(), 0);
  }
}

}  // namespace bookmarks
