// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bookmarks/error.hpp"

namespace bookmarks {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

std::optional<std::string> read_optional_string(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void fill_rates(Efficiency& e) {
  e.hit_rate = ratio(e.reuse + e.derive, e.proposals);
  e.reuse_rate = ratio(e.reuse, e.proposals);
  e.derive_rate = ratio(e.derive, e.proposals);
  e.create_rate = ratio(e.create, e.proposals);
  e.saved_fraction = e.from_scratch == 0
                         ? 0.0
                         : 1.0 - static_cast<double>(e.processed) / static_cast<double>(e.from_scratch);
}

ordered_json efficiency_json(const Efficiency& e) {
  ordered_json j;
  j["proposals"] = e.proposals;
  j["reuse"] = e.reuse;
  j["derive"] = e.derive;
  j["create"] = e.create;
  j["processed"] = e.processed;
  j["from_scratch"] = e.from_scratch;
  j["hit_rate"] = e.hit_rate;
  j["reuse_rate"] = e.reuse_rate;
  j["derive_rate"] = e.derive_rate;
  j["create_rate"] = e.create_rate;
  j["saved_fraction"] = e.saved_fraction;
  return j;
}

Efficiency efficiency_from(const ordered_json& j) {
  Efficiency e;
  e.proposals = j.at("proposals");
  e.reuse = j.at("reuse");
  e.derive = j.at("derive");
  e.create = j.at("create");
  e.processed = j.at("processed");
  e.from_scratch = j.at("from_scratch");
  e.hit_rate = j.at("hit_rate");
  e.reuse_rate = j.at("reuse_rate");
  e.derive_rate = j.at("derive_rate");
  e.create_rate = j.at("create_rate");
  e.saved_fraction = j.at("saved_fraction");
  return e;
}

ordered_json character_json(const CharacterReport& c) {
  ordered_json j;
  j["character"] = c.character;
  j["steps"] = c.steps;
  j["n_judged"] = c.n_judged;
  j["n_excluded"] = c.n_excluded;
  j["em_hits"] = c.em_hits;
  j["em_rate"] = c.em_rate;
  j["efficiency"] = efficiency_json(c.efficiency);
  j["oracle_calls_total"] = c.oracle_calls_total;
  j["oracle_calls"] = c.oracle_calls;
  return j;
}

CharacterReport character_from(const ordered_json& j) {
  CharacterReport c;
  c.character = j.at("character");
  c.steps = j.at("steps");
  c.n_judged = j.at("n_judged");
  c.n_excluded = j.at("n_excluded");
  c.em_hits = j.at("em_hits");
  c.em_rate = j.at("em_rate");
  c.efficiency = efficiency_from(j.at("efficiency"));
  c.oracle_calls_total = j.at("oracle_calls_total");
  c.oracle_calls = j.at("oracle_calls").get<std::map<std::string, std::size_t>>();
  return c;
}

void accumulate(CharacterReport& c, const TraceRecord& t) {
  ++c.steps;
  if (t.em) {
    ++c.n_judged;
    if (*t.em) ++c.em_hits;
  } else {
    ++c.n_excluded;
  }
  for (const auto& [role, n] : t.oracle_calls) {
    c.oracle_calls[role] += n;
    c.oracle_calls_total += n;
  }
}

}  // namespace

std::string trace_to_json_line(const TraceRecord& r) {
  ordered_json j;
  j["schema"] = kTraceSchemaVersion;
  j["step"] = r.step;
  j["index"] = r.index;
  j["character"] = r.character;
  j["method"] = r.method;
  j["ablation"] = r.ablation;
  j["config_hash"] = r.config_hash;
  j["proposals"] = ordered_json::array();
  for (const ProposalTrace& p : r.proposals) {
    ordered_json pj;
    pj["q"] = p.question;
    pj["kind"] = to_string(p.kind);
    pj["outcome"] = p.outcome;
    pj["processed"] = p.processed;
    pj["from"] = p.from_point;
    pj["bookmark"] = p.bookmark ? ordered_json(*p.bookmark) : ordered_json(nullptr);
    pj["error"] = optional_string(p.error);
    j["proposals"].push_back(std::move(pj));
  }
  j["near_count"] = r.near_count;
  j["oracle_calls"] = r.oracle_calls;
  j["predicted"] = r.predicted;
  j["reference"] = r.reference;
  j["em"] = r.em ? ordered_json(*r.em) : ordered_json(nullptr);
  j["fallback"] = r.fallback;
  j["error"] = optional_string(r.error);
  return j.dump();
}

TraceRecord trace_from_json_line(std::string_view line) {
  try {
    const ordered_json j = ordered_json::parse(line);
    if (j.at("schema").get<int>() != kTraceSchemaVersion) {
      throw FormatError("trace schema " + j.at("schema").dump() + " is not supported");
    }
    TraceRecord r;
    r.step = j.at("step");
    r.index = j.at("index");
    r.character = j.at("character");
    r.method = j.at("method");
    r.ablation = j.at("ablation");
    r.config_hash = j.at("config_hash");
    for (const auto& pj : j.at("proposals")) {
      ProposalTrace p;
      p.question = pj.at("q");
      p.kind = parse_kind(pj.at("kind").get<std::string>());
      p.outcome = pj.at("outcome");
      p.processed = pj.at("processed");
      p.from_point = pj.at("from");
      if (!pj.at("bookmark").is_null()) p.bookmark = pj["bookmark"].get<BookmarkId>();
      p.error = read_optional_string(pj, "error");
      r.proposals.push_back(std::move(p));
    }
    r.near_count = j.at("near_count");
    r.oracle_calls = j.at("oracle_calls").get<std::map<std::string, std::size_t>>();
    r.predicted = j.at("predicted");
    r.reference = j.at("reference");
    if (!j.at("em").is_null()) r.em = j["em"].get<bool>();
    r.fallback = j.at("fallback");
    r.error = read_optional_string(j, "error");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trace record: ") + e.what());
  }
}

std::vector<TraceRecord> read_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read traces " + path.string());
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trace_from_json_line(line));
    } catch (const FormatError& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  return out;
}

Efficiency compute_efficiency(const std::vector<TraceRecord>& traces) {
  Efficiency e;
  for (const TraceRecord& t : traces) {
    for (const ProposalTrace& p : t.proposals) {
      if (p.outcome == "reuse") {
        ++e.reuse;
      } else if (p.outcome == "derive") {
        ++e.derive;
      } else if (p.outcome == "create") {
        ++e.create;
      } else {
        continue;
      }
      ++e.proposals;
      e.processed += p.processed;
      e.from_scratch += t.index - 1;
    }
  }
  fill_rates(e);
  return e;
}

RunReport build_report(const std::vector<TraceRecord>& traces, std::string artifact) {
  RunReport report;
  report.artifact = std::move(artifact);
  report.aggregate.character = "*";
  std::map<std::string, std::vector<TraceRecord>> per_character;
  std::vector<std::string> order;
  for (const TraceRecord& t : traces) {
    if (report.method.empty()) {
      report.method = t.method;
      report.ablation = t.ablation;
      report.config_hash = t.config_hash;
    }
    if (!per_character.contains(t.character)) order.push_back(t.character);
    per_character[t.character].push_back(t);
    accumulate(report.aggregate, t);
    if (t.error && !t.fallback) ++report.step_errors;
  }
  for (const std::string& name : order) {
    CharacterReport c;
    c.character = name;
    for (const TraceRecord& t : per_character[name]) accumulate(c, t);
    c.em_rate = ratio(c.em_hits, c.n_judged);
    c.efficiency = compute_efficiency(per_character[name]);
    report.characters.push_back(std::move(c));
  }
  report.aggregate.em_rate = ratio(report.aggregate.em_hits, report.aggregate.n_judged);
  report.aggregate.efficiency = compute_efficiency(traces);
  return report;
}

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["engine_version"] = report.engine_version;
  j["config_hash"] = report.config_hash;
  j["method"] = report.method;
  j["ablation"] = report.ablation;
  j["artifact"] = report.artifact;
  j["step_errors"] = report.step_errors;
  j["characters"] = ordered_json::array();
  for (const CharacterReport& c : report.characters) j["characters"].push_back(character_json(c));
  j["aggregate"] = character_json(report.aggregate);
  return j.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    RunReport r;
    r.engine_version = j.at("engine_version");
    r.config_hash = j.at("config_hash");
    r.method = j.at("method");
    r.ablation = j.at("ablation");
    r.artifact = j.at("artifact");
    r.step_errors = j.at("step_errors");
    for (const auto& c : j.at("characters")) r.characters.push_back(character_from(c));
    r.aggregate = character_from(j.at("aggregate"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad report: ") + e.what());
  }
}

std::string report_to_csv(const RunReport& report) {
  std::string out =
      "method,artifact,character,em_rate,n_judged,n_excluded,hit_rate,reuse_rate,derive_rate,"
      "saved_fraction,oracle_calls_total\n";
  if (report.characters.empty()) return out;
  std::string method = report.method;
  if (!report.ablation.empty()) method += "+" + report.ablation;
  auto row = [&](const CharacterReport& c) {
    out += csv_field(method) + "," + csv_field(report.artifact) + "," + csv_field(c.character) + "," +
           fixed6(c.em_rate) + "," + std::to_string(c.n_judged) + "," + std::to_string(c.n_excluded) +
           "," + fixed6(c.efficiency.hit_rate) + "," + fixed6(c.efficiency.reuse_rate) + "," +
           fixed6(c.efficiency.derive_rate) + "," + fixed6(c.efficiency.saved_fraction) + "," +
           std::to_string(c.oracle_calls_total) + "\n";
  };
  for (const CharacterReport& c : report.characters) row(c);
  row(report.aggregate);
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report " + path.string());
  out << (format == ReportFormat::kJson ? report_to_json(report) : report_to_csv(report));
  if (!out) throw Error("write failed for report " + path.string());
}

}  // namespace bookmarks
