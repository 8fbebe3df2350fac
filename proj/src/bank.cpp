// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/bank.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bookmarks/error.hpp"

namespace bookmarks {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(BookmarkKind kind) {
  switch (kind) {
    case BookmarkKind::kConcept: return "concept";
    case BookmarkKind::kState: return "state";
    case BookmarkKind::kBehavioral: return "behavioral";
  }
  return "state";
}

std::optional<BookmarkKind> try_parse_kind(std::string_view text) {
  const std::string lowered = to_lower(trim(text));
  if (lowered == "concept") return BookmarkKind::kConcept;
  if (lowered == "state") return BookmarkKind::kState;
  if (lowered == "behavioral" || lowered == "behavioural" || lowered == "behavior")
    return BookmarkKind::kBehavioral;
  return std::nullopt;
}

BookmarkKind parse_kind(std::string_view text) {
  if (auto kind = try_parse_kind(text)) return *kind;
  throw FormatError("unknown bookmark kind '" + std::string(text) + "'");
}

AuxMemory empty_aux(BookmarkKind kind) {
  switch (kind) {
    case BookmarkKind::kConcept: return ConceptAux{};
    case BookmarkKind::kState: return StateAux{};
    case BookmarkKind::kBehavioral: return BehavioralAux{};
  }
  return StateAux{};
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kReuse: return "reuse";
    case Relation::kDerive: return "derive";
    case Relation::kNone: return "none";
  }
  return "none";
}

std::string_view outcome_name(const MatchOutcome& outcome) {
  if (std::holds_alternative<Reuse>(outcome)) return "reuse";
  if (std::holds_alternative<Derive>(outcome)) return "derive";
  return "create";
}

// ---------------------------------------------------------------------------
// MemoryBank

BookmarkId MemoryBank::insert(Bookmark b) {
  if (b.kind == BookmarkKind::kBehavioral && !b.subject) {
    throw Error("behavioral bookmark requires a subject");
  }
  b.id = next_id_++;
  const BookmarkId id = b.id;
  tokens_[id] = normalize_tokens(b.question);
  by_kind_[b.kind].push_back(id);
  bookmarks_.emplace(id, std::move(b));
  return id;
}

void MemoryBank::update(const Bookmark& b) {
  auto it = bookmarks_.find(b.id);
  if (it == bookmarks_.end()) throw Error("update of unknown bookmark " + std::to_string(b.id));
  if (it->second.kind != b.kind || it->second.question != b.question) {
    throw Error("bookmark " + std::to_string(b.id) + " question and kind are immutable");
  }
  it->second = b;
}

const Bookmark& MemoryBank::get(BookmarkId id) const {
  auto it = bookmarks_.find(id);
  if (it == bookmarks_.end()) throw Error("unknown bookmark " + std::to_string(id));
  return it->second;
}

Bookmark& MemoryBank::get(BookmarkId id) {
  auto it = bookmarks_.find(id);
  if (it == bookmarks_.end()) throw Error("unknown bookmark " + std::to_string(id));
  return it->second;
}

const Bookmark* MemoryBank::find(BookmarkId id) const {
  auto it = bookmarks_.find(id);
  return it == bookmarks_.end() ? nullptr : &it->second;
}

const std::vector<BookmarkId>& MemoryBank::ids_of(BookmarkKind kind) const {
  static const std::vector<BookmarkId> kNone;
  auto it = by_kind_.find(kind);
  return it == by_kind_.end() ? kNone : it->second;
}

const TokenSet& MemoryBank::question_tokens(BookmarkId id) const {
  auto it = tokens_.find(id);
  if (it == tokens_.end()) throw Error("unknown bookmark " + std::to_string(id));
  return it->second;
}

// ---------------------------------------------------------------------------
// Matching

std::vector<Candidate> prefilter(const MemoryBank& bank, std::string_view query,
                                 BookmarkKind kind, std::size_t k_prime) {
  if (k_prime == 0) throw Error("prefilter size must be at least 1");
  const TokenSet query_tokens = normalize_tokens(query);
  std::vector<Candidate> scored;
  for (BookmarkId id : bank.ids_of(kind)) {
    const double score = overlap_score(query_tokens, bank.question_tokens(id));
    if (score > 0.0) scored.push_back({id, score});
  }
  std::sort(scored.begin(), scored.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    const std::size_t pa = bank.get(a.id).sync_point;
    const std::size_t pb = bank.get(b.id).sync_point;
    if (pa != pb) return pa > pb;
    return a.id < b.id;
  });
  if (scored.size() > k_prime) scored.resize(k_prime);
  return scored;
}

MatchOutcome match(std::string_view query, const MemoryBank& bank,
                   const std::vector<Candidate>& candidates, const RelationJudge& judge,
                   MatchPolicy policy) {
  if (!policy.reuse_enabled) return CreateNew{};
  std::optional<BookmarkId> first_derive;
  for (const Candidate& c : candidates) {
    const Relation r = judge(query, bank.get(c.id));
    if (r == Relation::kReuse) return Reuse{c.id};
    if (r == Relation::kDerive && !first_derive) first_derive = c.id;
  }
  if (first_derive && policy.derive_enabled) return Derive{*first_derive};
  return CreateNew{};
}

Bookmark create_bookmark(std::string question, BookmarkKind kind,
                         std::optional<std::string> subject) {
  if (kind == BookmarkKind::kBehavioral && (!subject || subject->empty())) {
    throw Error("behavioral bookmark requires a subject");
  }
  Bookmark b;
  b.question = std::move(question);
  b.kind = kind;
  b.answer = std::string(kUnknownAnswer);
  b.sync_point = 0;
  b.aux = empty_aux(kind);
  if (kind == BookmarkKind::kConcept) {
    std::get<ConceptAux>(b.aux).keywords = concept_keywords(b.question);
  }
  b.subject = std::move(subject);
  return b;
}

Bookmark derive_bookmark(const Bookmark& parent, std::string question, BookmarkKind kind,
                         std::optional<std::string> subject, const DeriveInitializer& init) {
  Bookmark child = create_bookmark(std::move(question), kind, std::move(subject));
  child.sync_point = parent.sync_point;
  child.parent = parent.id;
  if (auto* state = std::get_if<StateAux>(&child.aux)) state->last_boundary = parent.sync_point;
  if (!parent.unknown()) {
    std::string answer = trim(init(parent, child.question));
    child.answer = answer.empty() ? std::string(kUnknownAnswer) : std::move(answer);
  }
  return child;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

ordered_json aux_to_json(const AuxMemory& aux) {
  ordered_json j = ordered_json::object();
  if (const auto* s = std::get_if<StateAux>(&aux)) {
    j["last_boundary"] = s->last_boundary;
  } else if (const auto* b = std::get_if<BehavioralAux>(&aux)) {
    j["evidence"] = ordered_json::array();
    for (const Evidence& e : b->evidence) j["evidence"].push_back({e.index, e.snippet});
  } else if (const auto* c = std::get_if<ConceptAux>(&aux)) {
    j["spans"] = ordered_json::array();
    for (const Span& s : c->spans) j["spans"].push_back({s.start, s.end});
    j["keywords"] = c->keywords;
  }
  return j;
}

AuxMemory aux_from_json(BookmarkKind kind, const ordered_json& j) {
  switch (kind) {
    case BookmarkKind::kState:
      return StateAux{j.at("last_boundary").get<std::size_t>()};
    case BookmarkKind::kBehavioral: {
      BehavioralAux aux;
      for (const auto& e : j.at("evidence")) {
        aux.evidence.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::string>()});
      }
      return aux;
    }
    case BookmarkKind::kConcept: {
      ConceptAux aux;
      for (const auto& s : j.at("spans")) {
        aux.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      }
      aux.keywords = j.at("keywords").get<std::vector<std::string>>();
      return aux;
    }
  }
  return StateAux{};
}

}  // namespace

std::string bank_to_json_text(const MemoryBank& bank) {
  ordered_json doc;
  doc["schema_version"] = kBankSchemaVersion;
  doc["next_id"] = bank.next_id();
  doc["bookmarks"] = ordered_json::array();
  for (const auto& [id, b] : bank.all()) {
    ordered_json j;
    j["id"] = b.id;
    j["question"] = b.question;
    j["answer"] = b.answer;
    j["kind"] = to_string(b.kind);
    j["sync_point"] = b.sync_point;
    j["subject"] = b.subject ? ordered_json(*b.subject) : ordered_json(nullptr);
    j["parent"] = b.parent ? ordered_json(*b.parent) : ordered_json(nullptr);
    j["aux"] = aux_to_json(b.aux);
    doc["bookmarks"].push_back(std::move(j));
  }
  return doc.dump(1) + "\n";
}

MemoryBank bank_from_json_text(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bank file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw FormatError("bank file lacks schema_version");
  }
  if (doc["schema_version"] != kBankSchemaVersion) {
    throw FormatError("bank schema version " + doc["schema_version"].dump() +
                      " is not supported (expected " + std::to_string(kBankSchemaVersion) + ")");
  }
  MemoryBank bank;
  try {
    for (const auto& j : doc.at("bookmarks")) {
      Bookmark b;
      b.id = j.at("id").get<BookmarkId>();
      b.question = j.at("question").get<std::string>();
      b.answer = j.at("answer").get<std::string>();
      b.kind = parse_kind(j.at("kind").get<std::string>());
      b.sync_point = j.at("sync_point").get<std::size_t>();
      if (!j.at("subject").is_null()) b.subject = j["subject"].get<std::string>();
      if (!j.at("parent").is_null()) b.parent = j["parent"].get<BookmarkId>();
      b.aux = aux_from_json(b.kind, j.at("aux"));
      if (b.answer.empty()) throw FormatError("bookmark " + std::to_string(b.id) + " has empty answer");
      if (b.kind == BookmarkKind::kBehavioral && !b.subject) {
        throw FormatError("behavioral bookmark " + std::to_string(b.id) + " lacks a subject");
      }
      if (bank.bookmarks_.contains(b.id)) {
        throw FormatError("duplicate bookmark id " + std::to_string(b.id));
      }
      const BookmarkId id = b.id;
      bank.tokens_[id] = normalize_tokens(b.question);
      bank.by_kind_[b.kind].push_back(id);
      bank.bookmarks_.emplace(id, std::move(b));
    }
    bank.next_id_ = doc.at("next_id").get<BookmarkId>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bank file schema error: ") + e.what());
  }
  for (auto& [kind, ids] : bank.by_kind_) std::sort(ids.begin(), ids.end());
  if (!bank.bookmarks_.empty() && bank.next_id_ <= bank.bookmarks_.rbegin()->first) {
    throw FormatError("bank next_id does not exceed stored ids");
  }
  return bank;
}

void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write bank " + tmp.string());
    out << bank_to_json_text(bank);
    if (!out) throw Error("write failed for bank " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MemoryBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read bank " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return bank_from_json_text(buffer.str());
}

}  // namespace bookmarks
