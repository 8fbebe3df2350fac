// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bookmarks/bank.hpp"
#include "bookmarks/error.hpp"
#include "bookmarks/hashing.hpp"
#include "bookmarks/prompts.hpp"

namespace bookmarks {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kBookmarks: return "bookmarks";
    case Method::kVanilla: return "vanilla";
    case Method::kRicl: return "ricl";
    case Method::kEta: return "eta";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "bookmarks") return Method::kBookmarks;
  if (n == "vanilla") return Method::kVanilla;
  if (n == "ricl") return Method::kRicl;
  if (n == "eta") return Method::kEta;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected bookmarks, vanilla, ricl or eta)");
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::size_t positive(const FlatConfig& config, std::string_view key, std::size_t fallback) {
  const long long v = config.get_int(key, static_cast<long long>(fallback));
  if (v < 1) throw ConfigError(std::string(key) + " must be at least 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string RunConfig::hash() const {
  std::ostringstream d;
  d << "engine=" << kEngineVersion << "\nprompts=" << kPromptVersion
    << "\nstoryline=" << sha256_hex(read_file(storyline)) << "\nartifact=" << artifact
    << "\ncharacters=";
  for (const auto& c : characters) d << c << '\x1f';
  d << "\nmethod=" << to_string(method) << "\nablation=" << engine.ablation.to_string()
    << "\nK=" << engine.proposals << "\nK'=" << engine.prefilter_size
    << "\nW=" << engine.scene_window << "\nd=" << engine.near_distance
    << "\ncap=" << engine.context_cap << "\nchunk=" << engine.sync.chunk_size
    << "\nr=" << engine.sync.context_radius << "\nWb=" << engine.sync.behavior_window
    << "\nEmax=" << engine.sync.evidence_max << "\nricl_k=" << ricl_k << "\nseed=" << seed
    << "\nshared=" << shared_bank << "\nmax_steps=" << max_steps;
  return sha256_hex(d.str()).substr(0, 16);
}

RunConfig run_config_from(const FlatConfig& config) {
  RunConfig rc;
  const auto story = config.get("run.storyline");
  if (!story || story->empty()) throw ConfigError("run.storyline is required");
  rc.storyline = config.resolve_path(*story);
  rc.artifact = config.get_or("run.artifact", rc.storyline.stem().string());
  for (const std::string& c : split_list(config.get_or("run.characters", ""))) {
    rc.characters.push_back(nfc(c));
  }
  rc.method = parse_method(config.get_or("run.method", "bookmarks"));
  rc.engine.ablation = Ablation::parse(config.get_or("run.ablation", ""));
  if (rc.engine.ablation.any() && rc.method != Method::kBookmarks) {
    throw ConfigError("ablation flags apply only to method bookmarks");
  }
  const long long seed = config.get_int("run.seed", 0);
  if (seed < 0) throw ConfigError("run.seed must not be negative");
  rc.seed = static_cast<std::uint64_t>(seed);
  rc.shared_bank = config.get_bool("run.shared_bank", false);
  const long long max_steps = config.get_int("run.max_steps", 0);
  if (max_steps < 0) throw ConfigError("run.max_steps must not be negative");
  rc.max_steps = static_cast<std::size_t>(max_steps);

  EngineConfig& e = rc.engine;
  e.proposals = positive(config, "engine.proposals", e.proposals);
  e.prefilter_size = positive(config, "engine.prefilter", e.prefilter_size);
  e.scene_window = positive(config, "engine.scene_window", e.scene_window);
  const long long near = config.get_int("engine.near_distance", static_cast<long long>(e.near_distance));
  if (near < 0) throw ConfigError("engine.near_distance must not be negative");
  e.near_distance = static_cast<std::size_t>(near);
  e.context_cap = positive(config, "engine.context_cap", e.context_cap);
  e.sync.chunk_size = positive(config, "engine.chunk_size", e.sync.chunk_size);
  const long long radius = config.get_int("engine.context_radius", static_cast<long long>(e.sync.context_radius));
  if (radius < 0) throw ConfigError("engine.context_radius must not be negative");
  e.sync.context_radius = static_cast<std::size_t>(radius);
  e.sync.behavior_window = positive(config, "engine.behavior_window", e.sync.behavior_window);
  e.sync.evidence_max = positive(config, "engine.evidence_max", e.sync.evidence_max);
  e.sync.incremental_behavior = e.ablation.ibu;
  rc.ricl_k = positive(config, "baseline.ricl_k", rc.ricl_k);
  return rc;
}

std::optional<bool> judge_em(OracleSession& session, std::string_view predicted,
                             std::string_view reference) {
  if (trim(predicted).empty() || trim(reference).empty()) return std::nullopt;
  try {
    const std::string reply = session.generate(OracleRole::kEMJudge, em_judge_prompt(predicted, reference));
    const auto verdict = parse_yes_no(reply);
    if (!verdict) spdlog::warn("EM judge gave an unparseable verdict: '{}'", reply);
    return verdict;
  } catch (const std::exception& e) {
    spdlog::warn("EM judge failed: {}", e.what());
    return std::nullopt;
  }
}

LeakageScanner::LeakageScanner(const Storyline& story, std::size_t min_length) {
  const auto& actions = story.actions();
  for (const Action& a : actions) {
    if (a.text.size() < min_length) continue;
    const bool shared = std::any_of(actions.begin(), actions.end(), [&](const Action& other) {
      return other.index != a.index && other.text.find(a.text) != std::string::npos;
    });
    if (!shared) distinctive_.emplace_back(a.index, a.text);
  }
}

void LeakageScanner::scan(std::size_t step_index, OracleRole role, const std::string& prompt) {
  if (role == OracleRole::kEMJudge) return;
  ++scanned_;
  auto it = std::lower_bound(distinctive_.begin(), distinctive_.end(), step_index,
                             [](const auto& entry, std::size_t i) { return entry.first < i; });
  for (; it != distinctive_.end(); ++it) {
    if (prompt.find(it->second) != std::string::npos) {
      findings_.push_back(Finding{step_index, it->first, role});
    }
  }
}

namespace {

struct PlannedStep {
  std::string character;
  std::size_t index = 0;
};

/// Memory carried between the steps of one replay slot.
struct SlotState {
  std::size_t steps = 0;
  MemoryBank bank;
  Profile profile;
  std::unique_ptr<ExemplarIndex> exemplars;
};

std::string slot_file_name(const std::string& slot) {
  std::string safe;
  for (char c : slot) {
    const auto u = static_cast<unsigned char>(c);
    safe += (std::isalnum(u) != 0 && u < 0x80) ? c : '_';
  }
  return safe + "-" + sha256_hex(slot).substr(0, 8) + ".json";
}

std::string state_to_json(const SlotState& s, Method method) {
  json j;
  j["steps"] = s.steps;
  if (method == Method::kBookmarks) j["bank"] = json::parse(bank_to_json_text(s.bank));
  if (method == Method::kEta) {
    j["profile"] = {{"character", s.profile.character},
                    {"text", s.profile.text},
                    {"last_update_index", s.profile.last_update_index}};
  }
  return j.dump(1) + "\n";
}

void load_state(SlotState& s, Method method, const fs::path& path) {
  try {
    const json j = json::parse(read_file(path));
    s.steps = j.at("steps");
    if (method == Method::kBookmarks) s.bank = bank_from_json_text(j.at("bank").dump());
    if (method == Method::kEta) {
      const json& p = j.at("profile");
      s.profile.character = p.at("character");
      s.profile.text = p.at("text");
      s.profile.last_update_index = p.at("last_update_index");
    }
  } catch (const json::exception& e) {
    throw FormatError("bad replay state " + path.string() + ": " + e.what());
  }
}

std::vector<PlannedStep> make_plan(const Storyline& story, const RunConfig& config) {
  std::vector<std::string> characters = config.characters;
  if (characters.empty()) characters = split_targets(story);
  std::vector<PlannedStep> plan;
  for (const std::string& c : characters) {
    for (std::size_t i : split_for_character(story, c).test_indices) plan.push_back({c, i});
  }
  if (config.shared_bank) {
    std::stable_sort(plan.begin(), plan.end(),
                     [](const PlannedStep& a, const PlannedStep& b) { return a.index < b.index; });
  }
  if (config.max_steps > 0 && plan.size() > config.max_steps) plan.resize(config.max_steps);
  return plan;
}

std::map<std::string, std::size_t> role_delta(const RoleCounts& before, const RoleCounts& after) {
  std::map<std::string, std::size_t> out;
  for (const auto& [role, n] : after) {
    const auto it = before.find(role);
    const std::size_t delta = n - (it == before.end() ? 0 : it->second);
    if (delta > 0) out[std::string(to_string(role))] = delta;
  }
  return out;
}

std::string ground_or_empty(std::string grounding) {
  return grounding.empty() ? std::string(kEmptyContext) : grounding;
}

}  // namespace

ReplayResult replay(const RunConfig& config, OracleGateway& gateway, const fs::path& out_dir,
                    const ReplayOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const Storyline story = load_storyline(config.storyline);
  const std::string hash = config.hash();
  const std::vector<PlannedStep> plan = make_plan(story, config);

  fs::create_directories(out_dir / "state");
  const fs::path trace_path = out_dir / "traces.jsonl";

  std::map<std::pair<std::string, std::size_t>, TraceRecord> done;
  if (fs::exists(trace_path)) {
    for (TraceRecord& t : read_traces(trace_path)) {
      if (t.config_hash != hash) {
        throw Error("unresumable: " + trace_path.string() + " was written with config " +
                    t.config_hash + ", current config is " + hash);
      }
      done.emplace(std::make_pair(t.character, t.index), std::move(t));
    }
  }

  std::map<std::string, SlotState> slots;
  auto slot_name = [&](const std::string& character) {
    return config.shared_bank && config.method == Method::kBookmarks ? std::string("*") : character;
  };
  auto slot_for = [&](const std::string& character) -> SlotState& {
    const std::string name = slot_name(character);
    auto [it, inserted] = slots.try_emplace(name);
    SlotState& s = it->second;
    if (inserted) {
      s.profile.character = character;
      s.exemplars = std::make_unique<ExemplarIndex>(character, config.engine.scene_window);
      const fs::path path = out_dir / "state" / slot_file_name(name);
      if (fs::exists(path)) load_state(s, config.method, path);
    }
    return s;
  };

  std::map<std::string, std::pair<std::string, std::size_t>> resumed_per_slot;  // slot -> (character, steps)
  for (const PlannedStep& p : plan) {
    auto& entry = resumed_per_slot[slot_name(p.character)];
    entry.first = p.character;
    if (done.contains({p.character, p.index})) ++entry.second;
  }
  for (const auto& [name, entry] : resumed_per_slot) {
    const std::size_t saved = slot_for(entry.first).steps;
    if (saved != entry.second) {
      throw Error("unresumable: saved state for '" + name + "' covers " + std::to_string(saved) +
                  " steps but the trace file has " + std::to_string(entry.second));
    }
  }

  OracleSession session(gateway);
  std::size_t current_index = 0;
  if (options.prompt_observer) {
    session.set_prompt_observer([&](OracleRole role, const std::string& prompt) {
      options.prompt_observer(current_index, role, prompt);
    });
  }

  std::ofstream trace_out(trace_path, std::ios::binary | std::ios::app);
  if (!trace_out) throw Error("cannot append to " + trace_path.string());

  ReplayResult result;
  result.complete = true;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const PlannedStep& p = plan[k];
    if (auto it = done.find({p.character, p.index}); it != done.end()) {
      result.traces.push_back(it->second);
      ++result.resumed;
      continue;
    }
    if (options.stop_after && result.executed >= *options.stop_after) {
      result.complete = false;
      break;
    }

    SlotState& slot = slot_for(p.character);
    current_index = p.index;
    TraceRecord rec;
    rec.step = k + 1;
    rec.index = p.index;
    rec.character = p.character;
    rec.method = std::string(to_string(config.method));
    rec.ablation = config.engine.ablation.to_string();
    rec.config_hash = hash;
    rec.reference = story.actions()[p.index - 1].text;

    const RoleCounts before = session.counts();
    try {
      const Scene scene = build_scene(story, p.index, config.engine.scene_window);
      switch (config.method) {
        case Method::kBookmarks: {
          GroundingEngine engine(story, slot.bank, session, config.engine);
          StepTrace st = engine.step(p.index);
          rec.proposals = std::move(st.proposals);
          rec.near_count = st.near_count;
          rec.predicted = std::move(st.predicted);
          rec.fallback = st.fallback;
          rec.error = std::move(st.error);
          break;
        }
        case Method::kVanilla:
          rec.predicted = vanilla_predict(session, scene);
          break;
        case Method::kRicl: {
          slot.exemplars->extend(story, p.index);
          const std::string grounding = ricl_ground(scene, *slot.exemplars, config.ricl_k);
          rec.predicted = trim(session.generate(OracleRole::kActor,
                                                actor_prompt(scene, ground_or_empty(grounding))));
          if (rec.predicted.empty()) throw OracleError("Actor returned an empty action");
          break;
        }
        case Method::kEta: {
          eta_catch_up(slot.profile, story, p.index, config.engine.scene_window, session);
          rec.predicted = trim(session.generate(
              OracleRole::kActor, actor_prompt(scene, ground_or_empty(eta_ground(slot.profile)))));
          if (rec.predicted.empty()) throw OracleError("Actor returned an empty action");
          break;
        }
      }
    } catch (const std::exception& e) {
      spdlog::warn("step {} ({} at action {}) failed: {}", k + 1, p.character, p.index, e.what());
      rec.error = e.what();
    }
    // Method calls only; the EM judge belongs to the evaluation, not the method.
    rec.oracle_calls = role_delta(before, session.counts());
    if (!rec.predicted.empty()) rec.em = judge_em(session, rec.predicted, rec.reference);

    trace_out << trace_to_json_line(rec) << '\n';
    trace_out.flush();
    if (!trace_out) throw Error("write failed for " + trace_path.string());
    ++slot.steps;
    write_file_atomic(out_dir / "state" / slot_file_name(slot_name(p.character)),
                      state_to_json(slot, config.method));

    result.traces.push_back(std::move(rec));
    ++result.executed;
  }

  result.report = build_report(result.traces, config.artifact);
  result.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_report(result.report, out_dir / "report.json", ReportFormat::kJson);
  write_report(result.report, out_dir / "report.csv", ReportFormat::kCsv);
  json timing = {{"runtime_seconds", result.report.runtime_seconds},
                 {"executed", result.executed},
                 {"resumed", result.resumed},
                 {"complete", result.complete}};
  write_file_atomic(out_dir / "timing.json", timing.dump(2) + "\n");
  return result;
}

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_character(const CharacterReport& c, const Efficiency& recomputed,
                     std::vector<std::string>& out) {
  const std::string who = "character '" + c.character + "': ";
  const Efficiency& e = c.efficiency;
  for (auto [name, v] : {std::pair<const char*, double>{"em_rate", c.em_rate},
                         {"hit_rate", e.hit_rate},
                         {"reuse_rate", e.reuse_rate},
                         {"derive_rate", e.derive_rate},
                         {"create_rate", e.create_rate},
                         {"saved_fraction", e.saved_fraction}}) {
    if (!in_unit(v)) out.push_back(who + name + " = " + std::to_string(v) + " is outside [0, 1]");
  }
  if (e.reuse + e.derive + e.create != e.proposals) {
    out.push_back(who + "reuse + derive + create != proposals");
  }
  if (c.n_judged + c.n_excluded != c.steps) out.push_back(who + "judged + excluded != steps");
  if (e.processed != recomputed.processed || e.from_scratch != recomputed.from_scratch ||
      e.proposals != recomputed.proposals || e.reuse != recomputed.reuse ||
      e.derive != recomputed.derive || e.hit_rate != recomputed.hit_rate ||
      e.saved_fraction != recomputed.saved_fraction) {
    out.push_back(who + "efficiency differs from the value recomputed from traces");
  }
}

}  // namespace

std::vector<std::string> check_invariants(const RunReport& report,
                                          const std::vector<TraceRecord>& traces) {
  std::vector<std::string> out;
  for (const CharacterReport& c : report.characters) {
    std::vector<TraceRecord> mine;
    std::copy_if(traces.begin(), traces.end(), std::back_inserter(mine),
                 [&](const TraceRecord& t) { return t.character == c.character; });
    check_character(c, compute_efficiency(mine), out);
  }
  check_character(report.aggregate, compute_efficiency(traces), out);
  return out;
}

}  // namespace bookmarks
