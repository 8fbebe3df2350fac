// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/storyline.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "bookmarks/error.hpp"

namespace bookmarks {

using ordered_json = nlohmann::ordered_json;

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (normalizer->isNormalized(source, status) && U_SUCCESS(status)) {
    return std::string(text);
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool is_special_character(std::string_view character) {
  return character == "Narration" || character == "Environment" ||
         character == "narration" || character == "environment";
}

Storyline Storyline::from_actions(std::vector<Action> actions) {
  if (actions.empty()) throw FormatError("storyline is empty");
  Storyline story;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    Action& a = actions[i];
    if (a.character.empty()) throw FormatError("empty character", i + 1);
    if (a.text.empty()) throw FormatError("empty text", i + 1);
    a.index = i + 1;
    a.character = nfc(a.character);
    story.characters_.insert(a.character);
  }
  story.actions_ = std::move(actions);
  return story;
}

const Action& Storyline::at(std::size_t index) const {
  if (index == 0 || index > actions_.size()) {
    throw std::out_of_range("action index " + std::to_string(index) + " outside 1.." +
                            std::to_string(actions_.size()));
  }
  notify(index, index);
  return actions_[index - 1];
}

std::span<const Action> Storyline::slice(std::size_t first, std::size_t last) const {
  if (first > last) return {};
  if (first == 0 || last > actions_.size()) {
    throw std::out_of_range("slice [" + std::to_string(first) + ", " + std::to_string(last) +
                            "] outside 1.." + std::to_string(actions_.size()));
  }
  notify(first, last);
  return std::span<const Action>(actions_).subspan(first - 1, last - first + 1);
}

std::vector<std::size_t> Storyline::indices_of(std::string_view character) const {
  std::vector<std::size_t> out;
  for (const Action& a : actions_) {
    if (a.character == character) out.push_back(a.index);
  }
  return out;
}

void Storyline::set_access_observer(AccessObserver observer) {
  observer_ = observer ? std::make_shared<AccessObserver>(std::move(observer)) : nullptr;
}

void Storyline::notify(std::size_t first, std::size_t last) const {
  if (!observer_) return;
  for (std::size_t i = first; i <= last; ++i) (*observer_)(i);
}

Storyline parse_storyline(std::string_view content) {
  std::vector<Action> actions;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw FormatError("blank line", line_no);

    ordered_json record;
    try {
      record = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw FormatError("record is not an object", line_no);

    auto field = [&](const char* name) -> std::string {
      auto it = record.find(name);
      if (it == record.end()) throw FormatError(std::string("missing field '") + name + "'", line_no);
      if (!it->is_string()) throw FormatError(std::string("field '") + name + "' is not a string", line_no);
      return it->get<std::string>();
    };

    Action a;
    a.character = field("character");
    a.text = field("text");
    if (a.character.empty()) throw FormatError("empty character", line_no);
    if (a.text.empty()) throw FormatError("empty text", line_no);
    if (auto it = record.find("episode"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) throw FormatError("field 'episode' is not a string", line_no);
      a.episode = it->get<std::string>();
    }
    actions.push_back(std::move(a));
  }
  if (actions.empty()) throw FormatError("storyline is empty");
  return Storyline::from_actions(std::move(actions));
}

Storyline load_storyline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read storyline " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_storyline(buffer.str());
}

std::string serialize_storyline(const Storyline& story) {
  std::string out;
  for (const Action& a : story.actions()) {
    ordered_json record;
    record["character"] = a.character;
    record["text"] = a.text;
    if (a.episode) record["episode"] = *a.episode;
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_storyline(const Storyline& story, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write storyline " + path.string());
  out << serialize_storyline(story);
}

Scene build_scene(const Storyline& story, std::size_t index, std::size_t window) {
  if (index == 0 || index > story.size()) {
    throw std::out_of_range("scene target " + std::to_string(index) + " outside 1.." +
                            std::to_string(story.size()));
  }
  Scene scene;
  scene.target_index = index;
  scene.target_character = story.actions()[index - 1].character;
  const std::size_t first = index > window ? index - window : 1;
  auto span = story.slice(first, index - 1);
  scene.window.assign(span.begin(), span.end());
  return scene;
}

CharacterSplit split_for_character(const Storyline& story, std::string_view character) {
  const std::string name = nfc(character);
  std::vector<std::size_t> indices = story.indices_of(name);
  if (indices.empty()) throw Error("character '" + name + "' does not appear in the storyline");
  if (indices.size() < 2) throw Error("character '" + name + "' acts only once; cannot split");
  const std::size_t train_count = (indices.size() + 1) / 2;
  CharacterSplit split;
  split.character = name;
  split.train_indices.assign(indices.begin(), indices.begin() + train_count);
  split.test_indices.assign(indices.begin() + train_count, indices.end());
  split.train_cutoff = split.train_indices.back();
  return split;
}

std::vector<std::string> split_targets(const Storyline& story) {
  std::vector<std::string> out;
  for (const std::string& c : story.characters()) {
    if (is_special_character(c)) continue;
    if (story.indices_of(c).size() >= 2) out.push_back(c);
  }
  return out;
}

std::string render_actions(std::span<const Action> actions) {
  std::string out;
  for (const Action& a : actions) {
    if (!out.empty()) out += '\n';
    out += a.character;
    out += ": ";
    out += a.text;
  }
  return out;
}

}  // namespace bookmarks
