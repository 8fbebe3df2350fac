// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/cache.hpp"

#include <set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bookmarks/error.hpp"
#include "bookmarks/hashing.hpp"

namespace bookmarks {
namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<CacheRecord> parse_record(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
    CacheRecord r;
    r.key = j.at("key").get<std::string>();
    r.role = j.at("role").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.timestamp = j.value("timestamp", "");
    if (j.at("checksum").get<std::string>() != record_checksum(r.key, r.response)) {
      return std::nullopt;
    }
    return r;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string record_checksum(std::string_view key, std::string_view response) {
  std::string material(key);
  material += '\n';
  material.append(response);
  return sha256_hex(material).substr(0, 16);
}

CacheStats inspect_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read cache " + path.string());
  CacheStats stats;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto record = parse_record(line);
    if (!record) {
      ++stats.corrupt;
      continue;
    }
    ++stats.records;
    if (!seen.insert(record->key).second) ++stats.duplicates;
    ++stats.by_role[record->role];
    ++stats.by_model[record->model];
  }
  return stats;
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto record = parse_record(line);
      if (!record) {
        ++corrupt_;
        spdlog::warn("oracle cache {}: skipping corrupt record on line {}", path_.string(), line_no);
        continue;
      }
      index_.emplace(record->key, std::move(record->response));
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open cache for append: " + path_.string());
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(index_mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(const CacheRecord& record) {
  std::lock_guard write_lock(write_mutex_);
  {
    std::unique_lock lock(index_mutex_);
    if (!index_.emplace(record.key, record.response).second) return;
  }
  ordered_json j;
  j["key"] = record.key;
  j["role"] = record.role;
  j["model"] = record.model;
  j["response"] = record.response;
  j["timestamp"] = record.timestamp;
  j["checksum"] = record_checksum(record.key, record.response);
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("cache append failed: " + path_.string());
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(index_mutex_);
  return index_.size();
}

}  // namespace bookmarks
