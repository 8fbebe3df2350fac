// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/baselines.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"
#include "bookmarks/prompts.hpp"

namespace bookmarks {

std::string vanilla_predict(OracleSession& session, const Scene& scene) {
  std::string action = trim(session.generate(OracleRole::kActor, actor_prompt(scene, kEmptyContext)));
  if (action.empty()) throw OracleError("Actor returned an empty action");
  return action;
}

void ExemplarIndex::extend(const Storyline& story, std::size_t before) {
  const std::size_t end = std::min(before, story.size() + 1);
  for (; next_ < end; ++next_) {
    const Action& a = story.actions()[next_ - 1];
    if (a.character != character_) continue;
    const Scene scene = build_scene(story, next_, scene_window_);
    Exemplar e;
    e.index = next_;
    e.scene_text = render_actions(scene.window);
    e.action_text = a.text;
    e.tokens = normalize_tokens(e.scene_text);
    records_.push_back(std::move(e));
  }
}

void ExemplarIndex::add(Exemplar exemplar) {
  if (exemplar.tokens.empty()) exemplar.tokens = normalize_tokens(exemplar.scene_text);
  records_.push_back(std::move(exemplar));
}

std::vector<const Exemplar*> ricl_select(const Scene& scene, const ExemplarIndex& index,
                                         std::size_t k) {
  if (k == 0) throw Error("RICL k must be at least 1");
  const TokenSet query = normalize_tokens(render_actions(scene.window));
  std::vector<std::pair<double, const Exemplar*>> scored;
  for (const Exemplar& e : index.records()) {
    if (e.index >= scene.target_index) continue;
    scored.emplace_back(overlap_score(query, e.tokens), &e);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->index > b.second->index;
  });
  std::vector<const Exemplar*> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::string ricl_ground(const Scene& scene, const ExemplarIndex& index, std::size_t k) {
  const auto selected = ricl_select(scene, index, k);
  if (selected.empty()) return {};
  std::string out = "Past scenes and reactions of " + index.character() + ":";
  std::size_t n = 0;
  for (const Exemplar* e : selected) {
    out += "\n#" + std::to_string(++n) + " (action " + std::to_string(e->index) + ")\nScene:\n";
    out += e->scene_text.empty() ? "(story start)" : e->scene_text;
    out += "\nAction: " + index.character() + ": " + e->action_text;
  }
  return out;
}

Profile eta_update(const Profile& profile, const Action& action, std::span<const Action> context,
                   OracleSession& session) {
  if (action.character != profile.character) {
    throw Error("ETA update for " + profile.character + " given an action by " + action.character);
  }
  if (action.index <= profile.last_update_index) {
    throw Error("ETA update at index " + std::to_string(action.index) +
                " does not advance past " + std::to_string(profile.last_update_index));
  }
  Profile next = profile;
  next.last_update_index = action.index;
  try {
    next.text = trim(session.generate(OracleRole::kProfileUpdater,
                                      profile_update_prompt(profile.character, profile.text,
                                                            context, action)));
  } catch (const std::exception& e) {
    spdlog::warn("ETA update for {} at action {} failed: {}", profile.character, action.index, e.what());
    next.text = profile.text;
  }
  return next;
}

std::size_t eta_catch_up(Profile& profile, const Storyline& story, std::size_t before,
                         std::size_t scene_window, OracleSession& session) {
  std::size_t calls = 0;
  const std::size_t end = std::min(before, story.size() + 1);
  for (std::size_t j = profile.last_update_index + 1; j < end; ++j) {
    const Action& a = story.actions()[j - 1];
    if (a.character != profile.character) continue;
    const Scene scene = build_scene(story, j, scene_window);
    profile = eta_update(profile, a, scene.window, session);
    ++calls;
  }
  return calls;
}

std::string eta_ground(const Profile& profile) {
  if (profile.text.empty()) return {};
  return "Profile of " + profile.character + ":\n" + profile.text;
}

}  // namespace bookmarks
