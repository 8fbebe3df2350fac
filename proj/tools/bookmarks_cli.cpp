// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
//
// bookmarks: command-line entry point.
//
//   bookmarks validate <storyline.jsonl>
//   bookmarks run --config run.cfg --out out/ [--method M] [--ablation a,b]
//   bookmarks haystack --spec haystack.cfg
//   bookmarks report --traces out/ --format csv
//   bookmarks cache-stats --cache cache.jsonl
//   bookmarks cache-verify --cache cache.jsonl
//
// Exit codes: 0 success, 1 failed check or runtime error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bookmarks/cache.hpp"
#include "bookmarks/error.hpp"
#include "bookmarks/harness.hpp"
#include "bookmarks/haystack.hpp"
#include "bookmarks/report.hpp"
#include "bookmarks/storyline.hpp"

namespace fs = std::filesystem;
using namespace bookmarks;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int cmd_validate(const std::string& path) {
  const Storyline story = load_storyline(path);
  std::cout << path << ": " << story.size() << " actions, " << story.characters().size()
            << " characters\n";
  for (const std::string& c : split_targets(story)) {
    const CharacterSplit s = split_for_character(story, c);
    std::cout << "  " << c << ": " << s.train_indices.size() << " train, " << s.test_indices.size()
              << " test\n";
  }
  return 0;
}

struct RunFlags {
  std::string config;
  std::string out;
  std::string method;
  std::string ablation;
  std::string characters;
  long long max_steps = -1;
  bool check_leakage = false;
};

int cmd_run(const RunFlags& f) {
  FlatConfig cfg = FlatConfig::load(f.config);
  if (!f.method.empty()) cfg.set("run.method", f.method);
  if (!f.ablation.empty()) cfg.set("run.ablation", f.ablation);
  if (!f.characters.empty()) cfg.set("run.characters", f.characters);
  if (f.max_steps >= 0) cfg.set("run.max_steps", std::to_string(f.max_steps));

  const RunConfig run = run_config_from(cfg);
  auto gateway = configure_gateway(parse_gateway_config(cfg));

  std::unique_ptr<LeakageScanner> scanner;
  ReplayOptions options;
  if (f.check_leakage) {
    scanner = std::make_unique<LeakageScanner>(load_storyline(run.storyline));
    options.prompt_observer = [&](std::size_t index, OracleRole role, const std::string& prompt) {
      scanner->scan(index, role, prompt);
    };
  }

  const ReplayResult result = replay(run, *gateway, f.out, options);
  std::cout << "config " << run.hash() << ", engine " << kEngineVersion << ": " << result.executed
            << " steps run, " << result.resumed << " resumed, " << gateway->backend_calls()
            << " backend calls, " << gateway->cache_hits() << " cache hits\n";
  const Efficiency& e = result.report.aggregate.efficiency;
  std::cout << "em_rate " << result.report.aggregate.em_rate << " hit_rate " << e.hit_rate
            << " saved_fraction " << e.saved_fraction << "\n";

  int status = 0;
  for (const std::string& v : check_invariants(result.report, result.traces)) {
    std::cerr << "invariant violated: " << v << "\n";
    status = kExitFailure;
  }
  if (scanner) {
    for (const auto& finding : scanner->findings()) {
      std::cerr << "leakage: step " << finding.step_index << " " << to_string(finding.role)
                << " prompt quotes action " << finding.leaked_index << "\n";
      status = kExitFailure;
    }
    std::cout << "leakage scan: " << scanner->prompts_scanned() << " prompts, "
              << scanner->findings().size() << " findings\n";
  }
  return status;
}

int cmd_haystack(const std::string& spec_path, const std::string& method_flag) {
  const FlatConfig cfg = FlatConfig::load(spec_path);
  const HaystackSpec base = haystack_spec_from(cfg);
  const Method method = parse_method(method_flag.empty() ? cfg.get_or("haystack.method", "bookmarks")
                                                         : method_flag);
  auto gateway = configure_gateway(parse_gateway_config(cfg));

  // Optional suite: every depth in haystack.depths for haystack.instances seeds.
  std::vector<std::size_t> depths;
  for (const std::string& d : split_list(cfg.get_or("haystack.depths", ""))) {
    depths.push_back(static_cast<std::size_t>(std::stoull(d)));
  }
  if (depths.empty()) depths.push_back(base.depth);
  const long long instances = cfg.get_int("haystack.instances", 1);
  if (instances < 1) throw ConfigError("haystack.instances must be at least 1");

  nlohmann::ordered_json out;
  out["kind"] = to_string(base.kind);
  out["method"] = to_string(method);
  out["control"] = base.control;
  out["results"] = nlohmann::ordered_json::array();
  std::size_t recovered = 0;
  std::size_t total = 0;
  for (long long n = 0; n < instances; ++n) {
    for (std::size_t depth : depths) {
      HaystackSpec spec = base;
      spec.depth = depth;
      spec.seed = base.seed + static_cast<std::uint64_t>(n);
      const HaystackResult r = run_haystack(spec, method, *gateway);
      recovered += r.success ? 1 : 0;
      ++total;
      out["results"].push_back({{"seed", spec.seed},
                                {"depth", depth},
                                {"needle_index", r.needle_index},
                                {"success", r.success},
                                {"processed", r.processed},
                                {"oracle_calls", r.oracle_calls},
                                {"answer", r.answer}});
    }
  }
  out["recovered"] = recovered;
  out["total"] = total;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::string& traces, const std::string& format, const std::string& artifact,
               const std::string& out_path) {
  fs::path path = traces;
  std::string name = artifact;
  if (fs::is_directory(path)) {
    // A run directory names its artifact in the report it wrote.
    if (name.empty() && fs::exists(path / "report.json")) {
      std::ifstream in(path / "report.json", std::ios::binary);
      const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
      name = report_from_json(text).artifact;
    }
    path /= "traces.jsonl";
  }
  const auto records = read_traces(path);
  const RunReport report = build_report(records, name);
  const ReportFormat fmt = format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson;
  if (out_path.empty()) {
    std::cout << (fmt == ReportFormat::kCsv ? report_to_csv(report) : report_to_json(report));
  } else {
    write_report(report, out_path, fmt);
  }
  int status = 0;
  for (const std::string& v : check_invariants(report, records)) {
    std::cerr << "invariant violated: " << v << "\n";
    status = kExitFailure;
  }
  return status;
}

int cmd_cache(const std::string& path, bool verify) {
  const CacheStats stats = inspect_cache(path);
  if (verify) {
    std::cout << path << ": " << stats.records << " records, " << stats.corrupt << " corrupt, "
              << stats.duplicates << " duplicate keys\n";
    return stats.corrupt == 0 ? 0 : kExitFailure;
  }
  nlohmann::ordered_json j;
  j["path"] = path;
  j["records"] = stats.records;
  j["corrupt"] = stats.corrupt;
  j["duplicates"] = stats.duplicates;
  j["by_role"] = stats.by_role;
  j["by_model"] = stats.by_model;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bookmark memory for role-playing agents: replay, evaluation and cache tools"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a storyline file");
  validate->add_option("storyline", validate_path, "JSON Lines storyline")->required();

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Replay test splits under one method");
  run->add_option("--config", run_flags.config, "Flat key=value run and oracle config")->required();
  run->add_option("--out", run_flags.out, "Output directory (resumed if it holds traces)")->required();
  run->add_option("--method", run_flags.method, "bookmarks, vanilla, ricl or eta (overrides run.method)");
  run->add_option("--ablation", run_flags.ablation,
                  "Comma list of derive_off, reuse_off, near_off, ibu (overrides run.ablation)");
  run->add_option("--characters", run_flags.characters, "Comma list of characters (overrides run.characters)");
  run->add_option("--max-steps", run_flags.max_steps, "Stop after this many planned steps");
  run->add_flag("--check-leakage", run_flags.check_leakage,
                "Scan every oracle prompt for actions at or after the current step");

  std::string spec_path;
  std::string haystack_method;
  auto* haystack = app.add_subcommand("haystack", "Run the planted-fact evaluation");
  haystack->add_option("--spec", spec_path, "Flat config with haystack.* and oracle keys")->required();
  haystack->add_option("--method", haystack_method, "bookmarks, vanilla, ricl or eta (overrides haystack.method)");

  std::string traces_path;
  std::string format = "json";
  std::string artifact;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Rebuild a report from traces");
  report->add_option("--traces", traces_path, "Run directory or traces.jsonl")->required();
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("--artifact", artifact, "Artifact name recorded in the report");
  report->add_option("--out", report_out, "Write to this file instead of stdout");

  std::string cache_path;
  auto* cache_stats = app.add_subcommand("cache-stats", "Summarize an oracle response cache");
  cache_stats->add_option("--cache", cache_path, "Cache file")->required();
  auto* cache_verify = app.add_subcommand("cache-verify", "Check cache record checksums");
  cache_verify->add_option("--cache", cache_path, "Cache file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*run) return cmd_run(run_flags);
    if (*haystack) return cmd_haystack(spec_path, haystack_method);
    if (*report) return cmd_report(traces_path, format, artifact, report_out);
    if (*cache_stats) return cmd_cache(cache_path, false);
    if (*cache_verify) return cmd_cache(cache_path, true);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
