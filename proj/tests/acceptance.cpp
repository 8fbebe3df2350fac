// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// fails. Every threshold and size is fixed below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"
#include "bookmarks/harness.hpp"
#include "bookmarks/haystack.hpp"
#include "bookmarks/spans.hpp"
#include "support.hpp"

namespace bookmarks {
namespace {

using Clock = std::chrono::steady_clock;

// Criterion 1
constexpr std::size_t kSuffixStoryLength = 1000;
constexpr double kSuffixBudgetSeconds = 60.0;
// Criterion 2
constexpr int kTriples = 200;
constexpr std::size_t kChunk = 20;
// Criterion 3
constexpr std::size_t kRepeatSteps = 500;
constexpr std::size_t kWarmup = 20;
constexpr double kMinHitRate = 0.90;
constexpr double kMinSaved = 0.70;
constexpr double kRepeatBudgetSeconds = 120.0;
// Criterion 4
constexpr std::size_t kAblationSteps = 100;
// Criterion 5
constexpr std::size_t kHaystackLength = 1000;
constexpr std::size_t kHaystackSeeds = 10;
const std::vector<std::size_t> kHaystackDepths = {100, 500, 900};
// Criterion 6
constexpr int kSpanSets = 1000;
// Criterion 9
constexpr std::size_t kExpectedK = 5;
constexpr std::size_t kExpectedNear = 5;
constexpr std::size_t kExpectedWindow = 10;
constexpr std::size_t kExpectedRicl = 8;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TraceRecord to_record(const StepTrace& s) {
  TraceRecord r;
  r.index = s.index;
  r.character = s.character;
  r.method = "bookmarks";
  r.proposals = s.proposals;
  return r;
}

/// Backend that fails every request; proves a run never left the cache.
class NoNetwork : public OracleBackend {
 public:
  std::string complete(const OracleRequest& r, const std::string&) override {
    throw OracleError("network call attempted for role " + std::string(to_string(r.role)));
  }
  std::string_view kind() const override { return "none"; }
};

// 1. Every storyline read made while a bookmark synchronizes lies in (p, t].
Verdict suffix_only() {
  const auto t0 = Clock::now();
  HaystackSpec spec;
  spec.filler_count = kSuffixStoryLength;
  Storyline story = generate_haystack(spec).story;
  testing::ScriptedGateway g(true);
  OracleSession session(*g.gateway);
  MemoryBank bank;
  GroundingEngine engine(story, bank, session, {});

  bool syncing = false;
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t reads = 0;
  std::size_t violations = 0;
  engine.set_sync_hooks({[&](const Bookmark& b, std::size_t t) {
                           syncing = true;
                           lo = b.sync_point;
                           hi = t;
                         },
                         [&](const Bookmark&) { syncing = false; }});
  story.set_access_observer([&](std::size_t i) {
    if (!syncing) return;
    ++reads;
    if (i <= lo || i > hi) ++violations;
  });

  std::size_t steps = 0;
  for (const std::string& c : split_targets(story)) {
    for (std::size_t i : split_for_character(story, c).test_indices) {
      engine.step(i);
      ++steps;
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << steps << " steps, " << reads << " reads during sync, " << violations << " outside (p, t], " << secs << " s";
  return {violations == 0 && reads > 0 && secs < kSuffixBudgetSeconds, d.str()};
}

// 2. Chunked sync p -> u equals p -> t -> u for boundary-aligned t.
Verdict incremental_equals_batch() {
  const Storyline story = testing::numbered_story(1000, {"Ann", "Ben", "Cy"});
  SyncOracles oracles;
  // Concatenation is associative, so folding order cannot matter.
  oracles.transition = [](std::string_view, std::string_view answer, std::span<const Action> chunk) {
    std::string out(answer);
    for (const Action& a : chunk) out += "|" + std::to_string(a.index);
    return out;
  };
  SyncSettings settings;
  settings.chunk_size = kChunk;
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < kTriples; ++trial) {
    const std::size_t p = rng() % 500;
    const std::size_t t = p + kChunk * (rng() % 12);
    const std::size_t u = t + rng() % (story.size() - t + 1);
    Bookmark start = create_bookmark("Where is Ann?", BookmarkKind::kState);
    start.answer = "seed";
    start.sync_point = p;
    start.aux = StateAux{p};

    Bookmark direct = start;
    synchronize(direct, story, u, settings, oracles);
    Bookmark staged = start;
    synchronize(staged, story, t, settings, oracles);
    synchronize(staged, story, u, settings, oracles);
    if (direct.answer != staged.answer || direct.sync_point != staged.sync_point) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kTriples) + " triples, " + std::to_string(mismatches) + " mismatches"};
}

const char* kRepeatQueries =
    "1. STATE | Where is Rin right now?\n"
    "2. BEHAVIORAL | How does Rin speak?\n"
    "3. STATE | What is Rin holding?\n"
    "4. CONCEPT | What is \"Lantern\"?\n"
    "5. BEHAVIORAL | How does Rin respond to Taro?\n";

std::vector<TraceRecord> repeat_query_run(std::size_t steps, Ablation ablation, std::size_t* bank_size,
                                          std::size_t* judge_calls) {
  HaystackSpec spec;
  spec.filler_count = steps + 1;
  spec.depth = 1;
  const Storyline story = generate_haystack(spec).story;
  testing::ScriptedGateway g(true);
  g.backend->add_rule(OracleRole::kProposer,
                      [](const OracleRequest&) { return std::optional<std::string>(kRepeatQueries); });
  OracleSession session(*g.gateway);
  MemoryBank bank;
  EngineConfig cfg;
  cfg.ablation = ablation;
  GroundingEngine engine(story, bank, session, cfg);
  std::vector<TraceRecord> traces;
  for (std::size_t i = 2; i <= steps + 1; ++i) traces.push_back(to_record(engine.step(i)));
  if (bank_size) *bank_size = bank.size();
  if (judge_calls) {
    const auto it = session.counts().find(OracleRole::kRelationJudge);
    *judge_calls = it == session.counts().end() ? 0 : it->second;
  }
  return traces;
}

// 3. Repeating the same five queries makes nearly every proposal a hit.
Verdict efficiency_shape() {
  const auto t0 = Clock::now();
  const auto traces = repeat_query_run(kRepeatSteps, {}, nullptr, nullptr);
  const std::vector<TraceRecord> after(traces.begin() + kWarmup, traces.end());
  const Efficiency e = compute_efficiency(after);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << traces.size() << " steps, after " << kWarmup << " warm-up: hit_rate " << e.hit_rate << " (>= " << kMinHitRate
    << "), saved_fraction " << e.saved_fraction << " (>= " << kMinSaved << "), " << secs << " s";
  return {traces.size() == kRepeatSteps && e.hit_rate >= kMinHitRate && e.saved_fraction >= kMinSaved &&
              secs < kRepeatBudgetSeconds,
          d.str()};
}

// 4. With reuse and derive off every proposal creates a bookmark.
Verdict ablation_flags() {
  Ablation a;
  a.derive_off = true;
  a.reuse_off = true;
  std::size_t bank_size = 0;
  std::size_t judge_calls = 0;
  const auto traces = repeat_query_run(kAblationSteps, a, &bank_size, &judge_calls);
  std::size_t proposals = 0;
  for (const auto& t : traces) proposals += t.proposals.size();
  const Efficiency e = compute_efficiency(traces);
  std::ostringstream d;
  d << "bank " << bank_size << " / proposals " << proposals << ", saved_fraction " << e.saved_fraction
    << ", relation calls " << judge_calls;
  return {bank_size == proposals && proposals > 0 && e.saved_fraction == 0.0 && e.proposals == proposals, d.str()};
}

// 5. Planted facts are recovered; controls stay Unknown.
Verdict haystack() {
  testing::ScriptedGateway g(true);
  std::size_t concept_ok = 0;
  std::size_t state_ok = 0;
  std::size_t control_ok = 0;
  std::size_t total = 0;
  for (std::size_t seed = 1; seed <= kHaystackSeeds; ++seed) {
    for (std::size_t depth : kHaystackDepths) {
      ++total;
      HaystackSpec spec;
      spec.filler_count = kHaystackLength;
      spec.depth = depth;
      spec.seed = seed;
      spec.kind = NeedleKind::kConcept;
      concept_ok += run_haystack(spec, Method::kBookmarks, *g.gateway).success;
      spec.kind = NeedleKind::kState;
      state_ok += run_haystack(spec, Method::kBookmarks, *g.gateway).success;
      spec.kind = NeedleKind::kConcept;
      spec.control = true;
      const HaystackResult c = run_haystack(spec, Method::kBookmarks, *g.gateway);
      control_ok += c.success && c.answer == kUnknownAnswer;
    }
  }
  std::ostringstream d;
  d << "concept " << concept_ok << "/" << total << ", state " << state_ok << "/" << total << ", control "
    << control_ok << "/" << total;
  return {total == 30 && concept_ok == total && state_ok == total && control_ok == total, d.str()};
}

// 6. Span merge equals re-segmenting the union of covered indexes.
Verdict span_merge() {
  std::mt19937 rng(99);
  int mismatches = 0;
  for (int trial = 0; trial < kSpanSets; ++trial) {
    std::vector<Span> spans;
    std::set<std::size_t> covered;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) {
      const std::size_t a = 1 + rng() % 80;
      const std::size_t b = a + rng() % 6;
      spans.push_back({a, b});
      for (std::size_t i = a; i <= b; ++i) covered.insert(i);
    }
    std::vector<Span> expected;
    for (std::size_t i : covered) {
      if (!expected.empty() && expected.back().end + 1 == i) {
        expected.back().end = i;
      } else {
        expected.push_back({i, i});
      }
    }
    if (merge_spans(spans) != expected) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kSpanSets) + " sets, " + std::to_string(mismatches) + " mismatches"};
}

// 7. Warm-cache replays are byte-identical and never reach a backend.
Verdict determinism() {
  testing::TempDir dir("acceptance-cache");
  const FlatConfig cfg = FlatConfig::load(testing::fixture("scripted.cfg"));
  const RunConfig run = run_config_from(cfg);
  GatewayConfig gc = parse_gateway_config(cfg);
  gc.cache_path = dir / "cache.jsonl";
  {
    auto cold = configure_gateway(gc);
    replay(run, *cold, dir / "cold");
  }
  std::uint64_t backend_calls = 0;
  for (const char* name : {"warm1", "warm2"}) {
    OracleGateway warm(std::make_unique<NoNetwork>(), gc);
    replay(run, warm, dir / name);
    backend_calls += warm.backend_calls();
  }
  const bool same = testing::slurp(dir / "warm1" / "traces.jsonl") == testing::slurp(dir / "warm2" / "traces.jsonl") &&
                    testing::slurp(dir / "warm1" / "report.json") == testing::slurp(dir / "warm2" / "report.json") &&
                    testing::slurp(dir / "warm1" / "report.json") == testing::slurp(dir / "cold" / "report.json");
  std::size_t step_errors = 0;
  for (const auto& t : read_traces(dir / "warm2" / "traces.jsonl")) step_errors += t.error.has_value();
  std::ostringstream d;
  d << "traces and report " << (same ? "identical" : "differ") << ", " << backend_calls << " backend calls, "
    << step_errors << " step errors";
  return {same && backend_calls == 0 && step_errors == 0, d.str()};
}

// 8. No prompt quotes an action at or after the step being predicted.
Verdict no_leakage() {
  const FlatConfig cfg = FlatConfig::load(testing::fixture("scripted.cfg"));
  RunConfig run = run_config_from(cfg);
  const Storyline story = load_storyline(run.storyline);
  LeakageScanner scanner(story);
  ReplayOptions options;
  options.prompt_observer = [&](std::size_t i, OracleRole role, const std::string& p) { scanner.scan(i, role, p); };
  std::size_t runs = 0;
  for (Method m : {Method::kBookmarks, Method::kVanilla, Method::kRicl, Method::kEta}) {
    for (bool ibu : {false, true}) {
      if (ibu && m != Method::kBookmarks) continue;
      run.method = m;
      run.engine.ablation = {};
      run.engine.ablation.ibu = ibu;
      testing::TempDir dir("acceptance-leak");
      auto gw = configure_gateway(parse_gateway_config(cfg));
      replay(run, *gw, dir.path(), options);
      ++runs;
    }
  }
  // The scanner itself must notice a planted leak.
  LeakageScanner probe(story);
  probe.scan(9, OracleRole::kActor, story.actions()[8].text);
  std::ostringstream d;
  d << runs << " replays, " << scanner.prompts_scanned() << " prompts, " << scanner.findings().size()
    << " findings (planted leak detected: " << (probe.findings().size() == 1 ? "yes" : "no") << ")";
  return {scanner.findings().empty() && scanner.prompts_scanned() > 0 && probe.findings().size() == 1, d.str()};
}

// 9. Defaults match the published constants.
Verdict constants() {
  const EngineConfig e;
  testing::TempDir dir("acceptance-constants");
  testing::spit(dir / "s.jsonl", "{\"character\":\"A\",\"text\":\"x\"}\n");
  const RunConfig rc = run_config_from(FlatConfig::parse("run.storyline = " + (dir / "s.jsonl").string() + "\n"));
  std::ostringstream d;
  d << "K=" << rc.engine.proposals << " d=" << rc.engine.near_distance << " W=" << rc.engine.scene_window
    << " k_ricl=" << rc.ricl_k;
  const bool pass = e.proposals == kExpectedK && e.near_distance == kExpectedNear && e.scene_window == kExpectedWindow &&
                    kDefaultRiclExemplars == kExpectedRicl && rc.engine.proposals == kExpectedK &&
                    rc.engine.near_distance == kExpectedNear && rc.engine.scene_window == kExpectedWindow &&
                    rc.ricl_k == kExpectedRicl;
  return {pass, d.str()};
}

}  // namespace
}  // namespace bookmarks

int main() {
  using namespace bookmarks;
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"suffix-only reads", suffix_only},
      {"incremental equals batch", incremental_equals_batch},
      {"efficiency shape", efficiency_shape},
      {"ablation flags", ablation_flags},
      {"haystack", haystack},
      {"span merge", span_merge},
      {"determinism and cache", determinism},
      {"no leakage", no_leakage},
      {"constants", constants},
  };
  int failed = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    Verdict v;
    try {
      v = criteria[n].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s (%s)\n", n + 1, criteria[n].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
