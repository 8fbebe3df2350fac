// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/scripted.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "bookmarks/error.hpp"
#include "bookmarks/hashing.hpp"
#include "bookmarks/prompts.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

std::string ScriptedBackend::complete(const OracleRequest& request, const std::string&) {
  const std::string hash = sha256_hex(request.prompt);
  if (auto it = fixtures_.find({request.role, hash}); it != fixtures_.end()) {
    ++answered_;
    return it->second;
  }
  for (const auto& [role, rule] : rules_) {
    if (role != request.role) continue;
    if (auto response = rule(request)) {
      ++answered_;
      return *response;
    }
  }
  if (builtin_) {
    if (auto response = builtin_response(request)) {
      ++answered_;
      return *response;
    }
  }
  throw OracleError("unscripted call: role " + std::string(to_string(request.role)) +
                    ", prompt sha256 " + hash.substr(0, 16));
}

void ScriptedBackend::add_fixture(OracleRole role, std::string prompt, std::string response) {
  fixtures_[{role, sha256_hex(prompt)}] = std::move(response);
}

void ScriptedBackend::add_rule(OracleRole role, ScriptRule rule) {
  rules_.emplace_back(role, std::move(rule));
}

void ScriptedBackend::add_contains_rule(OracleRole role, std::string needle, std::string then,
                                        std::optional<std::string> otherwise) {
  add_rule(role, [needle = std::move(needle), then = std::move(then),
                  otherwise = std::move(otherwise)](const OracleRequest& r) -> std::optional<std::string> {
    if (r.prompt.find(needle) != std::string::npos) return then;
    return otherwise;
  });
}

void ScriptedBackend::load_fixture_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("fixture directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const std::string where = file.filename().string() + ":" + std::to_string(line_no);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("fixture " + where + ": " + e.what());
      }
      const auto role = try_parse_role(j.value("role", ""));
      if (!role) throw ConfigError("fixture " + where + ": unknown role '" + j.value("role", "") + "'");
      if (!j.contains("response") || !j["response"].is_string()) {
        throw ConfigError("fixture " + where + ": missing response");
      }
      std::string response = j["response"].get<std::string>();
      if (j.contains("prompt")) {
        add_fixture(*role, j["prompt"].get<std::string>(), std::move(response));
      } else if (j.contains("prompt_sha256")) {
        fixtures_[{*role, j["prompt_sha256"].get<std::string>()}] = std::move(response);
      } else if (j.contains("contains")) {
        std::optional<std::string> otherwise;
        if (j.contains("otherwise")) otherwise = j["otherwise"].get<std::string>();
        add_contains_rule(*role, j["contains"].get<std::string>(), std::move(response),
                          std::move(otherwise));
      } else {
        throw ConfigError("fixture " + where + ": needs prompt, prompt_sha256 or contains");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Builtin "desk" rules

namespace {

struct SceneLine {
  std::string character;
  std::string text;
};

std::vector<std::string> lines_of(std::string_view body) {
  std::vector<std::string> out;
  std::istringstream in{std::string(body)};
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<SceneLine> scene_lines(std::string_view body) {
  std::vector<SceneLine> out;
  for (const std::string& line : lines_of(body)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    out.push_back({line.substr(0, colon), line.substr(colon + 2)});
  }
  return out;
}

std::string strip_trailing_punct(std::string s) {
  while (!s.empty() && std::string_view(".,!?;:\"'").find(s.back()) != std::string_view::npos) {
    s.pop_back();
  }
  return trim(s);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out.append(sep);
    out += p;
  }
  return out;
}

std::vector<std::string> split_on(std::string_view text, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    out.push_back(std::string(text.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

std::string propose(const std::map<std::string, std::string>& s) {
  const std::string c = s.count("Character") ? s.at("Character") : "";
  const std::size_t limit = s.count("Limit") ? std::stoul(s.at("Limit")) : 5;
  const auto scene = scene_lines(s.count("Scene") ? s.at("Scene") : "");

  std::string other;
  std::unordered_set<std::string> names{c};
  for (auto it = scene.rbegin(); it != scene.rend(); ++it) {
    names.insert(it->character);
    if (other.empty() && it->character != c && !is_special_character(it->character)) {
      other = it->character;
    }
  }

  // Most frequent capitalized non-name word in the scene, first occurrence
  // breaking ties.
  std::map<std::string, std::pair<int, std::size_t>> counts;
  std::size_t order = 0;
  static const std::regex kCapitalized(R"(\b([A-Z][a-z]{2,})\b)");
  for (const SceneLine& line : scene) {
    for (auto it = std::sregex_iterator(line.text.begin(), line.text.end(), kCapitalized);
         it != std::sregex_iterator(); ++it) {
      const std::string word = (*it)[1].str();
      if (names.contains(word) || is_stop_word(to_lower(word))) continue;
      auto& entry = counts[word];
      if (entry.first == 0) entry.second = order++;
      ++entry.first;
    }
  }
  std::string concept_name;
  int best = 0;
  std::size_t best_order = 0;
  for (const auto& [word, entry] : counts) {
    if (entry.first > best || (entry.first == best && entry.second < best_order)) {
      best = entry.first;
      best_order = entry.second;
      concept_name = word;
    }
  }

  std::vector<std::string> items;
  items.push_back("STATE | Where is " + c + " right now?");
  items.push_back(other.empty() ? "BEHAVIORAL | How does " + c + " usually react to the others?"
                                : "BEHAVIORAL | How does " + c + " respond to " + other + "?");
  items.push_back("STATE | What is " + c + " currently trying to do?");
  if (!concept_name.empty()) items.push_back("CONCEPT | What is \"" + concept_name + "\"?");
  items.push_back("BEHAVIORAL | How does " + c + " speak?");

  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    out += std::to_string(i + 1) + ". " + items[i] + "\n";
  }
  return out;
}

std::string relate(const std::map<std::string, std::string>& s) {
  const double score = overlap_score(normalize_tokens(s.at("Proposed")), normalize_tokens(s.at("Existing")));
  if (score >= 1.0) return "reuse";
  if (score >= 0.5) return "derive";
  return "none";
}

std::string transition(const std::map<std::string, std::string>& s) {
  const std::string& question = s.at("Question");
  const std::string& current = s.at("Current answer");
  const auto chunk = scene_lines(s.at("Chunk"));

  static const std::regex kWhere(R"(^\s*where\s+is\s+([A-Za-z][\w'-]*))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(question, m, kWhere)) {
    const std::string who = m[1].str();
    const std::regex move("\\b" + who +
                          R"(\s+(?:moves|goes|walks|runs|returns|arrives|is)\s+(?:to|at|in|into|back to)\s+(?:the\s+)?([^.!?,;]+))");
    std::string location;
    for (const SceneLine& line : chunk) {
      for (auto it = std::sregex_iterator(line.text.begin(), line.text.end(), move);
           it != std::sregex_iterator(); ++it) {
        location = strip_trailing_punct((*it)[1].str());
      }
    }
    return location.empty() ? current : location;
  }

  const TokenSet tokens = normalize_tokens(question);
  for (auto it = chunk.rbegin(); it != chunk.rend(); ++it) {
    const TokenSet line_tokens = normalize_tokens(it->character + " " + it->text);
    if (overlap_score(tokens, line_tokens) > 0.0) return it->character + ": " + it->text;
  }
  return current;
}

std::string filter(const std::map<std::string, std::string>& s) {
  static const std::unordered_set<std::string> kGeneric = {
      "usually", "react", "respond", "behave", "act", "speak", "talk", "others",
      "treat",   "feel",  "handle",  "deal",   "tend", "typically", "generally"};
  TokenSet wanted = normalize_tokens(s.at("Question"));
  for (const std::string& t : normalize_tokens(s.at("Subject"))) wanted.erase(t);
  std::erase_if(wanted, [](const std::string& t) { return kGeneric.contains(t); });
  if (wanted.empty()) return "yes";
  const TokenSet action = normalize_tokens(s.at("Action"));
  for (const std::string& t : wanted) {
    if (action.contains(t)) return "yes";
  }
  return "no";
}

std::string summarize_behavior(const std::map<std::string, std::string>& s) {
  static const std::regex kEvidence(R"(^#\d+\s+(.*)$)");
  std::vector<std::string> snippets;
  for (const std::string& line : lines_of(s.at("Evidence"))) {
    std::smatch m;
    if (std::regex_match(line, m, kEvidence)) snippets.push_back(m[1].str());
  }
  if (snippets.empty()) return std::string(kUnknownAnswer);
  if (snippets.size() > 3) snippets.erase(snippets.begin(), snippets.end() - 3);
  return s.at("Subject") + " tends to: " + join(snippets, " / ");
}

std::string summarize_concept(const std::map<std::string, std::string>& s) {
  const auto keywords = concept_keywords(s.at("Question"));
  const std::string& current = s.at("Current answer");
  std::vector<std::string> facts;
  if (current != kUnknownAnswer) facts = split_on(current, " | ");
  bool added = false;
  for (const std::string& line : lines_of(s.at("Passages"))) {
    if (line.starts_with("@")) continue;
    if (contains_any_keyword(line, keywords)) {
      facts.push_back(line);
      added = true;
    }
  }
  if (!added) return current;
  if (facts.size() > 3) facts.erase(facts.begin(), facts.end() - 3);
  return join(facts, " | ");
}

std::string act(const std::map<std::string, std::string>& s) {
  const std::string& c = s.at("Character");
  const auto scene = scene_lines(s.at("Scene"));
  for (auto it = scene.rbegin(); it != scene.rend(); ++it) {
    if (it->character == c) return it->text;
  }
  return "Hmm... let's keep going together!";
}

std::string judge(const std::map<std::string, std::string>& s) {
  const std::string predicted = trim(s.at("Predicted"));
  const std::string reference = trim(s.at("Reference"));
  if (predicted == reference) return "yes";
  return overlap_score(normalize_tokens(predicted), normalize_tokens(reference)) >= 0.5 ? "yes" : "no";
}

std::string update_profile(const std::map<std::string, std::string>& s) {
  const std::string& profile = s.at("Profile");
  std::vector<std::string> entries;
  if (profile != "(empty)") entries = split_on(profile, "; ");
  std::string action = s.at("Action");
  if (auto colon = action.find(": "); colon != std::string::npos) action = action.substr(colon + 2);
  std::istringstream words(action);
  std::vector<std::string> head;
  std::string w;
  while (head.size() < 8 && words >> w) head.push_back(w);
  entries.push_back(join(head, " "));
  if (entries.size() > 10) entries.erase(entries.begin(), entries.end() - 10);
  return join(entries, "; ");
}

}  // namespace

std::optional<std::string> builtin_response(const OracleRequest& request) {
  const std::string name = prompt_name(request.prompt);
  if (name.empty()) return std::nullopt;
  const auto sections = prompt_sections(request.prompt);
  try {
    switch (request.role) {
      case OracleRole::kProposer:
        if (name == "proposer") return propose(sections);
        break;
      case OracleRole::kRelationJudge:
        if (name == "relation") return relate(sections);
        break;
      case OracleRole::kDeriveInitializer:
        if (name == "derive") return sections.at("Existing answer");
        break;
      case OracleRole::kStateTransitioner:
        if (name == "state") return transition(sections);
        break;
      case OracleRole::kEvidenceFilter:
        if (name == "evidence") return filter(sections);
        break;
      case OracleRole::kBehaviorSummarizer:
        if (name == "behavior") return summarize_behavior(sections);
        break;
      case OracleRole::kConceptSummarizer:
        if (name == "concept") return summarize_concept(sections);
        break;
      case OracleRole::kActor:
        if (name == "actor") return act(sections);
        break;
      case OracleRole::kEMJudge:
        if (name == "em") return judge(sections);
        break;
      case OracleRole::kProfileUpdater:
        if (name == "profile") return update_profile(sections);
        break;
    }
  } catch (const std::out_of_range&) {
    return std::nullopt;  // prompt lacks a section the rule needs
  }
  return std::nullopt;
}

}  // namespace bookmarks
