// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bookmarks {

/// Flat `key = value` file. '#' starts a comment line; blank lines ignored.
/// Later assignments override earlier ones.
class FlatConfig {
 public:
  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool has(std::string_view key) const { return values_.contains(std::string(key)); }

  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Sorted `key=value` lines, the canonical form hashed for provenance.
  std::string canonical() const;

  /// Directory of the loaded file, for resolving relative paths.
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  std::filesystem::path resolve_path(std::string_view value) const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

/// Splits on commas and trims; empty items dropped.
std::vector<std::string> split_list(std::string_view text);

}  // namespace bookmarks
