// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bookmarks/oracle.hpp"
#include "bookmarks/storyline.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

inline constexpr std::size_t kDefaultRiclExemplars = 8;

/// Actor call with no grounding.
std::string vanilla_predict(OracleSession& session, const Scene& scene);

struct Exemplar {
  std::size_t index = 0;  // storyline index of the action
  std::string scene_text;
  std::string action_text;
  TokenSet tokens;  // of scene_text
};

/// Past (scene, action) pairs of one character, in storyline order.
class ExemplarIndex {
 public:
  explicit ExemplarIndex(std::string character, std::size_t scene_window = kDefaultSceneWindow)
      : character_(std::move(character)), scene_window_(scene_window) {}

  /// Adds every action of the character with index < `before` not yet indexed.
  void extend(const Storyline& story, std::size_t before);
  void add(Exemplar exemplar);

  const std::vector<Exemplar>& records() const noexcept { return records_; }
  const std::string& character() const noexcept { return character_; }

 private:
  std::string character_;
  std::size_t scene_window_;
  std::size_t next_ = 1;
  std::vector<Exemplar> records_;
};

/// Top-k exemplars by scene-token overlap with the current scene (ties: most
/// recent first). Exemplars at or after the scene's target are never used.
std::vector<const Exemplar*> ricl_select(const Scene& scene, const ExemplarIndex& index,
                                         std::size_t k);

/// Selected exemplars rendered as scene -> action pairs; "" when none.
std::string ricl_ground(const Scene& scene, const ExemplarIndex& index,
                        std::size_t k = kDefaultRiclExemplars);

struct Profile {
  std::string character;
  std::string text;
  std::size_t last_update_index = 0;
};

/// Folds one new action of the profile's character into the profile through
/// a ProfileUpdater call. Throws if the action belongs to someone else or
/// does not advance the profile. On updater failure the profile text is
/// unchanged, the action is marked consumed and the error is logged.
Profile eta_update(const Profile& profile, const Action& action, std::span<const Action> context,
                   OracleSession& session);

/// Applies eta_update for every action of the character with index < `before`
/// past the profile's last update, using the scene window as context.
/// Returns the number of updater calls.
std::size_t eta_catch_up(Profile& profile, const Storyline& story, std::size_t before,
                         std::size_t scene_window, OracleSession& session);

/// Grounding text for the actor: "Profile of <character>:\n<text>", or "" if empty.
std::string eta_ground(const Profile& profile);

}  // namespace bookmarks
