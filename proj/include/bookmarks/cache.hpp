// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace bookmarks {

struct CacheRecord {
  std::string key;
  std::string role;
  std::string model;
  std::string response;
  std::string timestamp;
};

/// Checksum stored with each record: 16 hex digits of SHA-256(key '\n' response).
std::string record_checksum(std::string_view key, std::string_view response);

struct CacheStats {
  std::size_t records = 0;
  std::size_t corrupt = 0;
  std::size_t duplicates = 0;
  std::map<std::string, std::size_t> by_role;
  std::map<std::string, std::size_t> by_model;
};

/// Scans a cache file without opening it for writing.
CacheStats inspect_cache(const std::filesystem::path& path);

/// Append-only JSON Lines response cache. Records with a bad checksum or
/// unparseable JSON are skipped on load. Lookups take a shared lock; appends
/// are serialized through one writer.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  void append(const CacheRecord& record);

  std::size_t size() const;
  std::size_t corrupt_records() const noexcept { return corrupt_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, std::string> index_;
  mutable std::shared_mutex index_mutex_;
  std::mutex write_mutex_;
  std::ofstream out_;
  std::size_t corrupt_ = 0;
};

}  // namespace bookmarks
