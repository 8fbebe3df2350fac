// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/haystack.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>

#include "bookmarks/baselines.hpp"
#include "bookmarks/error.hpp"
#include "bookmarks/text.hpp"

namespace bookmarks {

std::string_view to_string(NeedleKind kind) {
  switch (kind) {
    case NeedleKind::kConcept: return "concept";
    case NeedleKind::kState: return "state";
    case NeedleKind::kBehavioral: return "behavioral";
  }
  return "?";
}

NeedleKind parse_needle_kind(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "concept") return NeedleKind::kConcept;
  if (n == "state") return NeedleKind::kState;
  if (n == "behavioral" || n == "behavioural" || n == "behavior") return NeedleKind::kBehavioral;
  throw ConfigError("unknown needle kind '" + std::string(name) + "'");
}

HaystackSpec haystack_spec_from(const FlatConfig& config) {
  HaystackSpec spec;
  const long long n = config.get_int("haystack.filler_count", static_cast<long long>(spec.filler_count));
  const long long depth = config.get_int("haystack.depth", static_cast<long long>(spec.depth));
  const long long distractors = config.get_int("haystack.distractors", 0);
  const long long seed = config.get_int("haystack.seed", static_cast<long long>(spec.seed));
  if (n < 1 || depth < 1 || distractors < 0 || seed < 0) {
    throw ConfigError("haystack sizes must be positive and the seed non-negative");
  }
  spec.filler_count = static_cast<std::size_t>(n);
  spec.depth = static_cast<std::size_t>(depth);
  spec.distractors = static_cast<std::size_t>(distractors);
  spec.seed = static_cast<std::uint64_t>(seed);
  spec.kind = parse_needle_kind(config.get_or("haystack.kind", "concept"));
  spec.control = config.get_bool("haystack.control", false);
  return spec;
}

namespace {

constexpr std::array kSpeakers = {"Rin", "Taro", "Yui", "Sora", "Kenji", "Hana", "Narration"};
constexpr std::array kPlaces = {"garden", "station", "library", "bakery", "classroom", "rooftop", "studio"};
constexpr std::array kTimes = {"evening", "morning", "lunch", "practice", "dinner"};
constexpr std::array kThings = {"guitar", "umbrella", "notebook", "poster", "teapot", "bicycle", "scarf"};
constexpr std::array kVerbs = {"clean", "paint", "carry", "check", "borrow", "fix"};
constexpr std::array kAdjectives = {"bright", "odd", "heavy", "lovely", "dusty"};

struct Entity {
  const char* name;
  const char* definition;
};

constexpr std::array kEntities = {
    Entity{"Azure Key", "is the vault's only opener"},
    Entity{"Crimson Lantern", "glows whenever someone lies"},
    Entity{"Silent Compass", "points toward lost friends"},
    Entity{"Golden Loom", "weaves the town's memories"},
    Entity{"Obsidian Bell", "rings once per century"},
    Entity{"Velvet Mirror", "shows tomorrow's weather"},
};

constexpr std::array kLocations = {"Harbor", "Lighthouse", "Market", "Chapel", "Orchard", "Observatory"};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  template <typename Array>
  std::string pick(const Array& a) {
    return a[below(a.size())];
  }

  Action filler() {
    Action a;
    a.character = pick(kSpeakers);
    if (a.character == "Narration") {
      switch (below(3)) {
        case 0: a.text = "The " + pick(kPlaces) + " is quiet this " + pick(kTimes) + "."; break;
        case 1: a.text = "Rain taps against the " + pick(kThings) + "."; break;
        default: a.text = "A bell rings somewhere in the " + pick(kPlaces) + "."; break;
      }
      return a;
    }
    switch (below(5)) {
      case 0: a.text = "I think we should " + pick(kVerbs) + " the " + pick(kThings) + " before " + pick(kTimes) + "."; break;
      case 1: a.text = "Did you see the " + pick(kThings) + " near the " + pick(kPlaces) + "?"; break;
      case 2: a.text = "Let's " + pick(kVerbs) + " together after " + pick(kTimes) + "."; break;
      case 3: a.text = "That " + pick(kThings) + " looks " + pick(kAdjectives) + " today."; break;
      default: a.text = "Honestly, I'd rather " + pick(kVerbs) + " the " + pick(kThings) + "."; break;
    }
    return a;
  }

 private:
  std::mt19937_64 rng_;
};

/// Tokens and keywords a filler line must not touch.
struct Forbidden {
  TokenSet tokens;
  std::vector<std::string> keywords;

  bool clean(const Action& a) const {
    if (a.character == kProbeCharacter) return false;
    const std::string line = a.character + ": " + a.text;
    if (contains_any_keyword(line, keywords)) return false;
    const TokenSet t = normalize_tokens(line);
    return std::none_of(t.begin(), t.end(), [&](const std::string& w) { return tokens.contains(w); });
  }
};

std::vector<std::string> lowered_words(std::string_view text) {
  const TokenSet t = normalize_tokens(text);
  return {t.begin(), t.end()};
}

}  // namespace

HaystackInstance generate_haystack(const HaystackSpec& spec) {
  if (spec.depth < 1 || spec.depth > spec.filler_count) {
    throw Error("haystack depth " + std::to_string(spec.depth) + " is outside 1.." +
                std::to_string(spec.filler_count));
  }
  Generator gen(spec.seed);
  const std::string who(kProbeCharacter);
  HaystackInstance inst;
  std::vector<Action> planted;     // needle actions in order
  std::vector<std::size_t> where;  // their indexes

  switch (spec.kind) {
    case NeedleKind::kConcept: {
      const Entity& e = kEntities[gen.below(kEntities.size())];
      inst.probe = {std::string("What is \"") + e.name + "\"?", BookmarkKind::kConcept};
      inst.key_tokens = {to_lower(e.name)};
      planted.push_back({0, "Narration", std::string("The ") + e.name + " " + e.definition + ".", {}});
      where.push_back(spec.depth);
      break;
    }
    case NeedleKind::kState: {
      const std::size_t first = gen.below(kLocations.size());
      const std::size_t second = (first + 1 + gen.below(kLocations.size() - 1)) % kLocations.size();
      inst.probe = {"Where is " + who + " right now?", BookmarkKind::kState};
      inst.key_tokens = {to_lower(kLocations[second])};
      if (spec.depth >= 2) {
        inst.stale_tokens = {to_lower(kLocations[first])};
        planted.push_back({0, "Narration", who + " moves to the " + kLocations[first] + ".", {}});
        where.push_back(std::max<std::size_t>(1, spec.depth / 2));
      }
      planted.push_back({0, "Narration", who + " moves to the " + kLocations[second] + ".", {}});
      where.push_back(spec.depth);
      break;
    }
    case NeedleKind::kBehavioral: {
      inst.probe = {"How does " + who + " act under pressure?", BookmarkKind::kBehavioral};
      inst.key_tokens = {"nervous"};
      planted.push_back({0, who, "(nervous) Under this much pressure I always start to stammer.", {}});
      where.push_back(spec.depth);
      break;
    }
  }

  Forbidden forbidden;
  forbidden.tokens = normalize_tokens(inst.probe.question);
  forbidden.tokens.erase(to_lower(who));  // the probe name is excluded by speaker check below
  for (const auto& k : inst.key_tokens) {
    for (auto& w : lowered_words(k)) forbidden.tokens.insert(w);
  }
  for (const auto& k : inst.stale_tokens) forbidden.tokens.insert(k);
  if (spec.kind == NeedleKind::kConcept) forbidden.keywords = concept_keywords(inst.probe.question);
  forbidden.keywords.push_back(to_lower(who));

  constexpr int kMaxDraws = 10000;
  auto clean_filler = [&]() {
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      Action a = gen.filler();
      if (forbidden.clean(a)) return a;
    }
    throw Error("haystack generator could not draw filler free of the needle's words");
  };

  std::vector<Action> actions;
  actions.reserve(spec.filler_count);
  for (std::size_t i = 0; i < spec.filler_count; ++i) actions.push_back(clean_filler());

  std::set<std::size_t> taken(where.begin(), where.end());
  if (spec.distractors + taken.size() > spec.filler_count) {
    throw Error("haystack has room for at most " + std::to_string(spec.filler_count - taken.size()) +
                " distractors");
  }
  for (std::size_t d = 0; d < spec.distractors; ++d) {
    std::size_t idx = 0;
    do {
      idx = 1 + gen.below(spec.filler_count);
    } while (taken.contains(idx));
    taken.insert(idx);
    Action a;
    a.character = gen.pick(std::array{"Rin", "Taro", "Yui", "Sora"});
    switch (spec.kind) {
      case NeedleKind::kConcept: {
        // Another invented entity that shares no keyword with the probe.
        for (int draw = 0;; ++draw) {
          const Entity& e = kEntities[gen.below(kEntities.size())];
          a.character = "Narration";
          a.text = std::string("The ") + e.name + " " + e.definition + ".";
          if (forbidden.clean(a)) break;
          if (draw > kMaxDraws) throw Error("haystack generator could not draw a clean distractor");
        }
        break;
      }
      case NeedleKind::kState: {
        // Someone else moves, possibly to the needle's location.
        const std::string mover = a.character;
        a.character = "Narration";
        a.text = mover + " moves to the " + kLocations[gen.below(kLocations.size())] + ".";
        break;
      }
      case NeedleKind::kBehavioral:
        a.text = "(nervous) Under this much pressure I can barely think.";
        break;
    }
    actions[idx - 1] = std::move(a);
    inst.distractor_indices.push_back(idx);
  }
  std::sort(inst.distractor_indices.begin(), inst.distractor_indices.end());

  if (!spec.control) {
    for (std::size_t k = 0; k < planted.size(); ++k) actions[where[k] - 1] = planted[k];
    inst.needle_index = where.back();
  } else {
    inst.stale_tokens.clear();
  }
  inst.story = Storyline::from_actions(std::move(actions));
  return inst;
}

namespace {

bool contains_all(const std::string& answer, const std::vector<std::string>& tokens) {
  const std::string a = to_lower(answer);
  return std::all_of(tokens.begin(), tokens.end(),
                     [&](const std::string& t) { return a.find(t) != std::string::npos; });
}

bool contains_none(const std::string& answer, const std::vector<std::string>& tokens) {
  const std::string a = to_lower(answer);
  return std::none_of(tokens.begin(), tokens.end(),
                      [&](const std::string& t) { return a.find(t) != std::string::npos; });
}

}  // namespace

HaystackResult run_haystack(const HaystackSpec& spec, Method method, OracleGateway& gateway,
                            const EngineConfig& engine) {
  HaystackInstance inst = generate_haystack(spec);
  const std::size_t point = inst.story.size();
  const std::string who(kProbeCharacter);
  OracleSession session(gateway);
  HaystackResult result;
  result.needle_index = inst.needle_index;

  switch (method) {
    case Method::kBookmarks: {
      MemoryBank bank;
      GroundingEngine eng(inst.story, bank, session, engine);
      const ProposalTrace trace = eng.resolve_and_sync(inst.probe, point, who);
      if (trace.error) throw Error("haystack probe failed: " + *trace.error);
      result.answer = bank.get(*trace.bookmark).answer;
      result.processed = trace.processed;
      break;
    }
    case Method::kVanilla:
      break;
    case Method::kRicl: {
      Scene scene;
      scene.target_index = point + 1;
      scene.target_character = who;
      const std::size_t first = point > engine.scene_window ? point - engine.scene_window + 1 : 1;
      const auto window = inst.story.slice(first, point);
      scene.window.assign(window.begin(), window.end());
      ExemplarIndex index(who, engine.scene_window);
      index.extend(inst.story, point + 1);
      result.answer = ricl_ground(scene, index);
      break;
    }
    case Method::kEta: {
      Profile profile{who, "", 0};
      eta_catch_up(profile, inst.story, point + 1, engine.scene_window, session);
      result.answer = eta_ground(profile);
      break;
    }
  }
  result.oracle_calls = session.total_calls();

  if (spec.control) {
    result.success = method == Method::kBookmarks ? result.answer == kUnknownAnswer
                                                  : contains_none(result.answer, inst.key_tokens);
  } else {
    result.success = contains_all(result.answer, inst.key_tokens) &&
                     contains_none(result.answer, inst.stale_tokens);
  }
  return result;
}

}  // namespace bookmarks
