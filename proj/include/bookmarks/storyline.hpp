// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bookmarks {

/// One line of a storyline. `index` is 1-based.
struct Action {
  std::size_t index = 0;
  std::string character;
  std::string text;
  std::optional<std::string> episode;

  bool operator==(const Action&) const = default;
};

/// Called with the 1-based index of every action read through
/// Storyline::at / Storyline::slice.
using AccessObserver = std::function<void(std::size_t)>;

/// Ordered action sequence with contiguous indexes 1..N. Immutable after
/// construction except for the access observer, which exists for
/// instrumentation.
class Storyline {
 public:
  /// Validates and re-indexes `actions` in the given order.
  static Storyline from_actions(std::vector<Action> actions);

  std::size_t size() const noexcept { return actions_.size(); }

  /// Observed read of action `index` (1-based). Throws std::out_of_range.
  const Action& at(std::size_t index) const;

  /// Observed read of actions [first, last], both inclusive and 1-based.
  /// Returns an empty span when first > last.
  std::span<const Action> slice(std::size_t first, std::size_t last) const;

  /// Unobserved view of every action, for I/O and bookkeeping that does not
  /// read story content on behalf of a memory operation.
  const std::vector<Action>& actions() const noexcept { return actions_; }

  const std::set<std::string>& characters() const noexcept { return characters_; }

  /// Ascending indexes of the actions taken by `character`.
  std::vector<std::size_t> indices_of(std::string_view character) const;

  void set_access_observer(AccessObserver observer);

 private:
  void notify(std::size_t first, std::size_t last) const;

  std::vector<Action> actions_;
  std::set<std::string> characters_;
  std::shared_ptr<AccessObserver> observer_;
};

/// The W actions preceding a prediction target.
struct Scene {
  std::size_t target_index = 0;
  std::vector<Action> window;
  std::string target_character;
};

struct CharacterSplit {
  std::string character;
  std::size_t train_cutoff = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

inline constexpr std::size_t kDefaultSceneWindow = 10;

/// Characters that narrate rather than act; never used as split targets.
bool is_special_character(std::string_view character);

/// NFC-normalizes a UTF-8 string. Invalid UTF-8 is returned unchanged.
std::string nfc(std::string_view text);

/// Parses JSON Lines storyline content. Errors name the offending line.
Storyline parse_storyline(std::string_view content);
Storyline load_storyline(const std::filesystem::path& path);

/// Canonical JSON Lines form: {"character","text"[,"episode"]} per line.
std::string serialize_storyline(const Storyline& story);
void save_storyline(const Storyline& story, const std::filesystem::path& path);

Scene build_scene(const Storyline& story, std::size_t index,
                  std::size_t window = kDefaultSceneWindow);

/// First ceil(k/2) of the character's k actions train; the rest test.
CharacterSplit split_for_character(const Storyline& story, std::string_view character);

/// Characters eligible as split targets: non-special and acting at least twice.
std::vector<std::string> split_targets(const Storyline& story);

/// "Character: text" lines joined by '\n'.
std::string render_actions(std::span<const Action> actions);

}  // namespace bookmarks
