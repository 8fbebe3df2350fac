// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bookmarks/oracle.hpp"
#include "bookmarks/scripted.hpp"
#include "bookmarks/storyline.hpp"

namespace bookmarks::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(BOOKMARKS_FIXTURE_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bookmarks-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Storyline of `n` actions where action i is spoken by speakers[i % size]
/// and reads "<prefix> <i>".
inline Storyline numbered_story(std::size_t n, const std::vector<std::string>& speakers = {"Ann", "Ben"},
                                const std::string& prefix = "line") {
  std::vector<Action> actions;
  for (std::size_t i = 1; i <= n; ++i) {
    actions.push_back({0, speakers[i % speakers.size()], prefix + " " + std::to_string(i), {}});
  }
  return Storyline::from_actions(std::move(actions));
}

/// Gateway over a caller-configured scripted backend, no cache.
struct ScriptedGateway {
  ScriptedBackend* backend = nullptr;
  std::unique_ptr<OracleGateway> gateway;

  explicit ScriptedGateway(bool builtin = true, std::optional<std::filesystem::path> cache = std::nullopt) {
    auto b = std::make_unique<ScriptedBackend>();
    b->use_builtin_rules(builtin);
    backend = b.get();
    GatewayConfig cfg;
    cfg.cache_path = std::move(cache);
    gateway = std::make_unique<OracleGateway>(std::move(b), cfg);
  }
};

}  // namespace bookmarks::testing
