// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/prompts.hpp"

#include <regex>
#include <sstream>

#include "bookmarks/text.hpp"

namespace bookmarks {
namespace {

std::string flatten(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

class PromptBuilder {
 public:
  explicit PromptBuilder(std::string_view name) {
    out_ << "#prompt " << name << ' ' << kPromptVersion << '\n';
  }
  PromptBuilder& text(std::string_view line) {
    out_ << line << '\n';
    return *this;
  }
  PromptBuilder& section(std::string_view name, std::string_view body) {
    out_ << '[' << name << "]\n" << flatten_block(body) << '\n';
    return *this;
  }
  PromptBuilder& actions(std::string_view name, std::span<const Action> actions,
                         std::string_view if_empty = "(none)") {
    out_ << '[' << name << "]\n";
    if (actions.empty()) {
      out_ << if_empty << '\n';
    } else {
      for (const Action& a : actions) out_ << action_line(a) << '\n';
    }
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  // Section bodies may be multi-line, but a line must never look like a
  // section header.
  static std::string flatten_block(std::string_view body) {
    std::string out;
    std::istringstream in{std::string(body)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!first) out += '\n';
      first = false;
      if (!line.empty() && line.front() == '[') out += ' ';
      out += line;
    }
    return out;
  }

  std::ostringstream out_;
};

}  // namespace

std::string action_line(const Action& action) {
  return action.character + ": " + flatten(action.text);
}

ProposalParse parse_proposals(std::string_view text, std::size_t limit) {
  static const std::regex kLine(R"(^\s*\d+\s*[.)]\s*([A-Za-z]+)\s*\|\s*(.*\S)\s*$)");
  ProposalParse out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::smatch m;
    std::optional<BookmarkKind> kind;
    if (std::regex_match(line, m, kLine)) {
      const std::string tag = to_lower(m[1].str());
      if (tag == "concept" || tag == "state" || tag == "behavioral") kind = parse_kind(tag);
    }
    if (!kind) {
      out.dropped.push_back(line);
      continue;
    }
    if (out.items.size() < limit) out.items.push_back({trim(m[2].str()), *kind});
  }
  return out;
}

std::string prompt_name(std::string_view prompt) {
  const auto eol = prompt.find('\n');
  std::string_view header = prompt.substr(0, eol);
  if (!header.starts_with("#prompt ")) return {};
  header.remove_prefix(8);
  return std::string(header.substr(0, header.find(' ')));
}

std::map<std::string, std::string> prompt_sections(std::string_view prompt) {
  std::map<std::string, std::string> sections;
  std::istringstream in{std::string(prompt)};
  std::string line;
  std::string current;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      current = line.substr(1, line.size() - 2);
      sections[current];
      inside = true;
      continue;
    }
    if (!inside) continue;
    std::string& body = sections[current];
    if (!body.empty()) body += '\n';
    body += line;
  }
  return sections;
}

std::string proposer_prompt(const Scene& scene, std::size_t k) {
  return PromptBuilder("proposer")
      .text("Propose memory lookups that would help predict the next action of the character.")
      .text("Each lookup is a question answered from the earlier storyline, tagged with a kind:")
      .text("BEHAVIORAL: a general pattern of how a character acts, phrased so many future scenes can add evidence.")
      .text("STATE: what is true at the current story point, such as a location, relationship or goal.")
      .text("CONCEPT: a named entity or concept that may recur or evolve; put its name in double quotes.")
      .text("Reply with numbered lines only, each formatted as: <n>. <KIND> | <question>")
      .section("Character", scene.target_character)
      .section("Limit", std::to_string(k))
      .actions("Scene", scene.window, "(story start)")
      .str();
}

std::string relation_prompt(std::string_view query, BookmarkKind kind, const Bookmark& candidate) {
  return PromptBuilder("relation")
      .text("Decide how a proposed memory question relates to an existing bookmark.")
      .text("reuse: both track essentially the same memory target and should share one bookmark.")
      .text("derive: not the same, but the existing answer is a useful starting point for the new question.")
      .text("none: the bookmark is not relevant enough.")
      .text("Reply with exactly one word: reuse, derive or none.")
      .section("Kind", to_string(kind))
      .section("Proposed", query)
      .section("Existing", candidate.question)
      .section("Existing answer", candidate.answer)
      .str();
}

std::string derive_prompt(const Bookmark& parent, std::string_view question) {
  return PromptBuilder("derive")
      .text("Answer the new question using only what the existing bookmark already establishes.")
      .text("If it establishes nothing relevant, reply Unknown. Reply with the answer only.")
      .section("Existing", parent.question)
      .section("Existing answer", parent.answer)
      .section("Question", question)
      .str();
}

std::string state_transition_prompt(std::string_view question, std::string_view answer,
                                    std::span<const Action> chunk) {
  const std::string range =
      chunk.empty() ? std::string("-")
                    : std::to_string(chunk.front().index) + "-" + std::to_string(chunk.back().index);
  return PromptBuilder("state")
      .text("Update the answer so it is true after the new part of the story.")
      .text("Keep the current answer when the new part does not change it. Reply with the answer only.")
      .section("Question", question)
      .section("Current answer", answer)
      .section("Range", range)
      .actions("Chunk", chunk)
      .str();
}

std::string evidence_filter_prompt(std::string_view question, std::string_view subject,
                                   std::span<const Action> context, const Action& action) {
  return PromptBuilder("evidence")
      .text("Does the action directly show the behavior pattern asked about, given its local context?")
      .text("Reply yes or no.")
      .section("Question", question)
      .section("Subject", subject)
      .actions("Context", context)
      .section("Action", action_line(action))
      .str();
}

std::string behavior_summary_prompt(std::string_view question, std::string_view subject,
                                    std::span<const Evidence> evidence) {
  std::string lines;
  for (const Evidence& e : evidence) {
    if (!lines.empty()) lines += '\n';
    lines += "#" + std::to_string(e.index) + " " + flatten(e.snippet);
  }
  return PromptBuilder("behavior")
      .text("Summarize the behavior pattern shown by the evidence in one or two sentences.")
      .section("Question", question)
      .section("Subject", subject)
      .section("Evidence", lines)
      .str();
}

std::string concept_summary_prompt(std::string_view question, std::string_view answer,
                                   const std::vector<std::pair<Span, std::string>>& spans) {
  std::string lines;
  for (const auto& [span, text] : spans) {
    if (!lines.empty()) lines += '\n';
    lines += "@" + std::to_string(span.start) + "-" + std::to_string(span.end) + '\n' + text;
  }
  return PromptBuilder("concept")
      .text("Update what the story has established about the concept, using the new passages.")
      .text("Keep earlier facts unless the passages revise them. Reply with the answer only.")
      .section("Question", question)
      .section("Current answer", answer)
      .section("Passages", lines)
      .str();
}

std::string actor_prompt(const Scene& scene, std::string_view grounding) {
  return PromptBuilder("actor")
      .text("Play the character. Reply with a single next action or utterance, without a name prefix.")
      .section("Character", scene.target_character)
      .section("Grounding", grounding)
      .actions("Scene", scene.window, "(story start)")
      .section("Question", "What'll be " + scene.target_character +
                               "'s next action in response to the current scene?")
      .str();
}

std::string em_judge_prompt(std::string_view predicted, std::string_view reference) {
  return PromptBuilder("em")
      .text("Do the two actions make the same key move? Wording may differ.")
      .text("Reply yes or no.")
      .section("Predicted", flatten(predicted))
      .section("Reference", flatten(reference))
      .str();
}

std::string profile_update_prompt(std::string_view character, std::string_view profile,
                                  std::span<const Action> context, const Action& action) {
  return PromptBuilder("profile")
      .text("Summarize what the new action reveals about the character and merge it into the profile.")
      .text("Reply with the full updated profile.")
      .section("Character", character)
      .section("Profile", profile.empty() ? std::string_view("(empty)") : profile)
      .actions("Context", context)
      .section("Action", action_line(action))
      .str();
}

}  // namespace bookmarks
