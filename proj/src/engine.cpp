// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/engine.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

std::string Ablation::to_string() const {
  std::vector<std::string_view> on;
  if (derive_off) on.push_back("derive_off");
  if (reuse_off) on.push_back("reuse_off");
  if (near_off) on.push_back("near_off");
  if (ibu) on.push_back("ibu");
  std::string out;
  for (auto flag : on) {
    if (!out.empty()) out += ',';
    out += flag;
  }
  return out;
}

Ablation Ablation::parse(std::string_view list) {
  Ablation a;
  for (const std::string& flag : split_list(list)) {
    if (flag == "derive_off") {
      a.derive_off = true;
    } else if (flag == "reuse_off") {
      a.reuse_off = true;
    } else if (flag == "near_off") {
      a.near_off = true;
    } else if (flag == "ibu") {
      a.ibu = true;
    } else {
      throw ConfigError("unknown ablation flag '" + flag + "'");
    }
  }
  return a;
}

ContextEntry context_entry(const Bookmark& b) {
  return ContextEntry{b.id, b.question, b.answer, b.kind, b.sync_point};
}

namespace {

std::string render_entry(const ContextEntry& e, bool active) {
  std::string answer = e.answer;
  if (active && answer == kUnknownAnswer) answer = "Unknown (not established in the story so far)";
  return "- (" + std::string(to_string(e.kind)) + ", as of action " + std::to_string(e.sync_point) +
         ") Q: " + e.question + " A: " + answer;
}

std::string render_context(const std::vector<ContextEntry>& active,
                           const std::vector<ContextEntry>& near) {
  if (active.empty() && near.empty()) return std::string(kEmptyContext);
  std::string out;
  if (!active.empty()) {
    out += "Active memory:";
    for (const auto& e : active) out += "\n" + render_entry(e, true);
  }
  if (!near.empty()) {
    if (!out.empty()) out += '\n';
    out += "Recent memory:";
    for (const auto& e : near) out += "\n" + render_entry(e, false);
  }
  return out;
}

}  // namespace

GroundingContext assemble_context(std::vector<ContextEntry> active, std::vector<ContextEntry> near,
                                  std::size_t cap) {
  std::erase_if(near, [](const ContextEntry& e) { return e.answer == kUnknownAnswer; });
  GroundingContext ctx;
  ctx.active = std::move(active);
  ctx.near = std::move(near);
  ctx.rendered = render_context(ctx.active, ctx.near);
  while (ctx.rendered.size() > cap && !ctx.near.empty()) {
    auto farthest = std::min_element(ctx.near.begin(), ctx.near.end(),
                                     [](const ContextEntry& a, const ContextEntry& b) {
                                       if (a.sync_point != b.sync_point) return a.sync_point < b.sync_point;
                                       return a.id > b.id;
                                     });
    ctx.near.erase(farthest);
    ctx.rendered = render_context(ctx.active, ctx.near);
  }
  return ctx;
}

std::string predict_action(OracleSession& session, const Scene& scene,
                           const GroundingContext& context) {
  std::string action = trim(session.generate(OracleRole::kActor, actor_prompt(scene, context.rendered)));
  if (action.empty()) throw OracleError("Actor returned an empty action");
  return action;
}

GroundingEngine::GroundingEngine(const Storyline& story, MemoryBank& bank, OracleSession& session,
                                 EngineConfig config)
    : story_(&story),
      bank_(&bank),
      session_(&session),
      config_(std::move(config)),
      oracles_(session_oracles(session)) {
  config_.sync.incremental_behavior = config_.ablation.ibu;
  if (config_.proposals == 0) throw ConfigError("proposal count K must be at least 1");
  if (config_.prefilter_size == 0) throw ConfigError("prefilter size K' must be at least 1");
}

ProposalParse GroundingEngine::propose(const Scene& scene) {
  const std::string response =
      session_->generate(OracleRole::kProposer, proposer_prompt(scene, config_.proposals));
  ProposalParse parsed = parse_proposals(response, config_.proposals);
  for (const std::string& line : parsed.dropped) {
    spdlog::warn("proposer line dropped at step {}: '{}'", scene.target_index, line);
  }
  return parsed;
}

ProposalTrace GroundingEngine::resolve_and_sync(const Proposal& proposal, std::size_t point,
                                                std::string_view character) {
  ProposalTrace trace;
  trace.question = proposal.question;
  trace.kind = proposal.kind;
  trace.outcome = "error";

  std::optional<std::string> subject;
  if (proposal.kind == BookmarkKind::kBehavioral) subject = std::string(character);

  BookmarkId id = 0;
  try {
    const auto candidates =
        prefilter(*bank_, proposal.question, proposal.kind, config_.prefilter_size);
    RelationJudge judge = [this](std::string_view query, const Bookmark& candidate) {
      return session_->relation(relation_prompt(query, candidate.kind, candidate));
    };
    MatchPolicy policy{!config_.ablation.derive_off, !config_.ablation.reuse_off};
    const MatchOutcome outcome = match(proposal.question, *bank_, candidates, judge, policy);
    trace.outcome = std::string(outcome_name(outcome));

    if (const auto* reuse = std::get_if<Reuse>(&outcome)) {
      id = reuse->id;
    } else if (const auto* derive = std::get_if<Derive>(&outcome)) {
      DeriveInitializer init = [this](const Bookmark& parent, std::string_view question) {
        return session_->generate(OracleRole::kDeriveInitializer, derive_prompt(parent, question));
      };
      id = bank_->insert(derive_bookmark(bank_->get(derive->parent), proposal.question,
                                         proposal.kind, subject, init));
    } else {
      id = bank_->insert(create_bookmark(proposal.question, proposal.kind, subject));
    }
  } catch (const std::exception& e) {
    trace.error = e.what();
    spdlog::warn("query '{}' failed during matching: {}", proposal.question, e.what());
    return trace;
  }

  trace.bookmark = id;
  Bookmark working = bank_->get(id);
  trace.from_point = working.sync_point;
  if (working.sync_point > point) {
    // Answers never rewind, and one valid past this point would leak later actions.
    trace.error = "bookmark is ahead of the current point";
    return trace;
  }
  if (hooks_.before) hooks_.before(working, point);
  try {
    const SyncStats stats = synchronize(working, *story_, point, config_.sync, oracles_);
    trace.processed = stats.processed;
    bank_->update(working);
  } catch (const SyncError& e) {
    trace.processed = e.processed();
    trace.error = e.what();
    bank_->update(working);
    spdlog::warn("query '{}' failed during synchronization: {}", proposal.question, e.what());
  }
  if (hooks_.after) hooks_.after(working);
  return trace;
}

std::vector<ContextEntry> GroundingEngine::collect_near(std::size_t point,
                                                        const std::set<BookmarkId>& exclude) const {
  const std::size_t lo = point > config_.near_distance ? point - config_.near_distance : 0;
  std::vector<ContextEntry> out;
  for (const auto& [id, b] : bank_->all()) {
    if (exclude.contains(id) || b.unknown()) continue;
    if (b.sync_point < lo || b.sync_point > point) continue;
    out.push_back(context_entry(b));
  }
  std::sort(out.begin(), out.end(), [point](const ContextEntry& a, const ContextEntry& b) {
    const std::size_t da = point - a.sync_point;
    const std::size_t db = point - b.sync_point;
    return da != db ? da < db : a.id < b.id;
  });
  return out;
}

StepTrace GroundingEngine::step(std::size_t index) {
  const RoleCounts before = session_->counts();
  StepTrace trace;
  const Scene scene = build_scene(*story_, index, config_.scene_window);
  trace.index = index;
  trace.character = scene.target_character;
  const std::size_t point = index - 1;

  std::vector<Proposal> proposals;
  try {
    ProposalParse parsed = propose(scene);
    trace.dropped_lines = std::move(parsed.dropped);
    proposals = std::move(parsed.items);
    if (proposals.empty()) throw OracleError("proposer returned no parseable queries");
  } catch (const std::exception& e) {
    spdlog::warn("step {}: {}; predicting without grounding", index, e.what());
    trace.fallback = true;
    trace.error = e.what();
  }

  std::vector<ContextEntry> active;
  std::set<BookmarkId> active_ids;
  for (const Proposal& p : proposals) {
    ProposalTrace pt = resolve_and_sync(p, point, scene.target_character);
    if (pt.bookmark && !pt.error) {
      const Bookmark& b = bank_->get(*pt.bookmark);
      if (active_ids.insert(b.id).second) active.push_back(context_entry(b));
    }
    trace.proposals.push_back(std::move(pt));
  }

  std::vector<ContextEntry> near;
  if (!config_.ablation.near_off && !trace.fallback) near = collect_near(point, active_ids);
  trace.context = trace.fallback ? assemble_context({}, {}, config_.context_cap)
                                 : assemble_context(std::move(active), std::move(near),
                                                    config_.context_cap);
  trace.near_count = trace.context.near.size();

  try {
    trace.predicted = predict_action(*session_, scene, trace.context);
  } catch (const std::exception& e) {
    trace.error = std::string("prediction failed: ") + e.what();
  }

  for (const auto& [role, n] : session_->counts()) {
    const auto it = before.find(role);
    const std::size_t delta = n - (it == before.end() ? 0 : it->second);
    if (delta > 0) trace.oracle_calls[role] = delta;
  }
  return trace;
}

}  // namespace bookmarks
