// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include <json.hpp>

#include "bookmarks/report.hpp"
#include "support.hpp"

namespace bookmarks {
namespace {

using testing::fixture;
using testing::slurp;
using testing::TempDir;

struct Outcome {
  int code = -1;
  std::string output;
};

/// Runs the CLI with `args`, capturing stdout and stderr.
Outcome cli(const std::string& args) {
  const std::string command = std::string(BOOKMARKS_CLI) + " --log-level off " + args + " 2>&1";
  Outcome out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return out;
  char buffer[4096];
  while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe)) out.output.append(buffer, n);
  const int status = ::pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

TEST(Cli, ValidateFixture) {
  const Outcome o = cli("validate " + q(fixture("popipa.jsonl")));
  EXPECT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("6 actions"), std::string::npos);
}

TEST(Cli, ValidateReportsBadLine) {
  TempDir dir("cli-bad");
  testing::spit(dir / "bad.jsonl", "{\"character\":\"Tae\",\"text\":\"hi\"}\n{\"character\":\"Rimi\",\"text\":\"\"}\n");
  const Outcome o = cli("validate " + q(dir / "bad.jsonl"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.output.find("line 2"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("run --bogus").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
}

TEST(Cli, HelpDocumentsEveryRunFlag) {
  const Outcome o = cli("run --help");
  EXPECT_EQ(o.code, 0);
  for (const char* flag : {"--config", "--out", "--method", "--ablation", "--characters", "--max-steps",
                           "--check-leakage"}) {
    EXPECT_NE(o.output.find(flag), std::string::npos) << flag;
  }
  const Outcome top = cli("--help");
  for (const char* sub : {"validate", "run", "haystack", "report", "cache-stats", "cache-verify"}) {
    EXPECT_NE(top.output.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, RunProducesGoldenReportWithProvenance) {
  TempDir out("cli-run");
  const Outcome o = cli("run --config " + q(fixture("scripted.cfg")) + " --method bookmarks --check-leakage --out " +
                        q(out.path()));
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(slurp(out / "report.json"), slurp(fixture("golden/six_step_report.json")));
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["engine_version"], std::string(kEngineVersion));
  EXPECT_EQ(report["config_hash"].get<std::string>().size(), 16u);
  EXPECT_NE(o.output.find(report["config_hash"].get<std::string>()), std::string::npos);

  const Outcome csv = cli("report --traces " + q(out.path()) + " --format csv");
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.output, slurp(fixture("golden/six_step_report.csv")));
}

TEST(Cli, AblationFlagsRemoveReuseAndDerive) {
  TempDir out("cli-ablation");
  const Outcome o = cli("run --config " + q(fixture("scripted.cfg")) + " --ablation derive_off,reuse_off --out " +
                        q(out.path()));
  ASSERT_EQ(o.code, 0) << o.output;
  for (const TraceRecord& t : read_traces(out / "traces.jsonl")) {
    EXPECT_EQ(t.ablation, "derive_off,reuse_off");
    for (const auto& p : t.proposals) EXPECT_EQ(p.outcome, "create");
  }
  EXPECT_EQ(cli("run --config " + q(fixture("scripted.cfg")) + " --method vanilla --ablation ibu --out " +
                q(out / "x"))
                .code,
            2);
}

TEST(Cli, CacheUtilities) {
  TempDir dir("cli-cache");
  testing::spit(dir / "run.cfg", slurp(fixture("scripted.cfg")) + "run.storyline = " + fixture("six_step.jsonl").string() +
                                     "\ncache.path = " + (dir / "cache.jsonl").string() + "\n");
  ASSERT_EQ(cli("run --config " + q(dir / "run.cfg") + " --out " + q(dir / "a")).code, 0);
  const Outcome warm = cli("run --config " + q(dir / "run.cfg") + " --out " + q(dir / "b"));
  ASSERT_EQ(warm.code, 0);
  EXPECT_NE(warm.output.find(" 0 backend calls"), std::string::npos) << warm.output;
  EXPECT_EQ(slurp(dir / "a" / "traces.jsonl"), slurp(dir / "b" / "traces.jsonl"));

  EXPECT_EQ(cli("cache-verify --cache " + q(dir / "cache.jsonl")).code, 0);
  const Outcome stats = cli("cache-stats --cache " + q(dir / "cache.jsonl"));
  EXPECT_EQ(stats.code, 0);
  EXPECT_NE(stats.output.find("Actor"), std::string::npos);

  std::string text = slurp(dir / "cache.jsonl");
  text.replace(text.find("\"response\":\"") + 12, 1, "#");
  testing::spit(dir / "cache.jsonl", text);
  EXPECT_EQ(cli("cache-verify --cache " + q(dir / "cache.jsonl")).code, 1);
}

TEST(Cli, HaystackSuite) {
  TempDir dir("cli-haystack");
  testing::spit(dir / "spec.cfg",
                "backend.kind = scripted\nhaystack.kind = concept\nhaystack.filler_count = 200\n"
                "haystack.depths = 20, 180\nhaystack.instances = 2\n");
  const Outcome o = cli("haystack --spec " + q(dir / "spec.cfg"));
  ASSERT_EQ(o.code, 0) << o.output;
  const auto j = nlohmann::json::parse(o.output.substr(o.output.find('{')));
  EXPECT_EQ(j["total"], 4);
  EXPECT_EQ(j["recovered"], 4);
}

}  // namespace
}  // namespace bookmarks
