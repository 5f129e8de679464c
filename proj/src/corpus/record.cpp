// SPDX-License-Identifier: Apache-2.0
#include "trajsql/corpus/record.h"

#include <fstream>
#include <set>
#include <sstream>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/mask.h"

namespace trajsql {

std::string_view corpus_target_name(CorpusTarget t) {
  switch (t) {
    case CorpusTarget::Bam: return "BAM";
    case CorpusTarget::SamPhase1: return "SAM-phase1";
    case CorpusTarget::SamPhase2: return "SAM-phase2";
    case CorpusTarget::Lom: return "LOM";
  }
  return "BAM";
}

std::optional<CorpusTarget> corpus_target_from_name(std::string_view name) {
  for (auto t : {CorpusTarget::Bam, CorpusTarget::SamPhase1, CorpusTarget::SamPhase2, CorpusTarget::Lom}) {
    if (corpus_target_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string CorpusRecord::input_text() const {
  std::string out;
  for (const auto& [key, value] : input.items()) {
    if (!out.empty()) out += '\n';
    out += value.is_string() ? value.get<std::string>() : value.dump();
  }
  return out;
}

std::size_t CorpusStats::total() const {
  std::size_t n = 0;
  for (const auto& [_, t] : targets) n += t.count;
  return n;
}

std::size_t whitespace_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

CorpusStats compute_stats(const std::vector<CorpusRecord>& records, const std::vector<Rejection>& rejected) {
  CorpusStats s;
  std::map<std::string, std::pair<std::size_t, std::size_t>> tokens;
  std::set<std::string> seeds;
  for (const auto& r : records) {
    const std::string name(corpus_target_name(r.target));
    auto& t = s.targets[name];
    ++t.count;
    tokens[name].first += whitespace_tokens(r.input_text());
    tokens[name].second += whitespace_tokens(r.output);
    seeds.insert(r.seed);
  }
  for (auto& [name, t] : s.targets) {
    t.mean_input_tokens = static_cast<double>(tokens[name].first) / static_cast<double>(t.count);
    t.mean_output_tokens = static_cast<double>(tokens[name].second) / static_cast<double>(t.count);
  }
  // A seed counts as a round-trip failure only through a non-Pass rejection;
  // Pass rejections are later-stage skips (e.g. undecomposable initial SQL).
  std::set<std::string> failed;
  for (const auto& r : rejected) {
    seeds.insert(r.seed);
    if (r.verdict != "Pass") failed.insert(r.seed);
  }
  s.round_trip_attempted = seeds.size();
  s.round_trip_passed = seeds.size() - failed.size();
  s.round_trip_pass_rate = s.round_trip_attempted
                               ? static_cast<double>(s.round_trip_passed) / static_cast<double>(s.round_trip_attempted)
                               : 0.0;
  return s;
}

ordered_json stats_json(const CorpusStats& s) {
  ordered_json j;
  j["targets"] = ordered_json::object();
  for (const auto& [name, t] : s.targets) {
    j["targets"][name] = {{"count", t.count},
                          {"mean_input_tokens", t.mean_input_tokens},
                          {"mean_output_tokens", t.mean_output_tokens}};
  }
  j["round_trip"] = {{"passed", s.round_trip_passed},
                     {"attempted", s.round_trip_attempted},
                     {"pass_rate", s.round_trip_pass_rate}};
  return j;
}

CorpusStats stats_from_json(const ordered_json& j) {
  CorpusStats s;
  for (const auto& [name, t] : j.at("targets").items()) {
    s.targets[name] = {t.at("count").get<std::size_t>(), t.at("mean_input_tokens").get<double>(),
                       t.at("mean_output_tokens").get<double>()};
  }
  const auto& rt = j.at("round_trip");
  s.round_trip_passed = rt.at("passed").get<std::size_t>();
  s.round_trip_attempted = rt.at("attempted").get<std::size_t>();
  s.round_trip_pass_rate = rt.at("pass_rate").get<double>();
  return s;
}

namespace {

constexpr std::string_view kHeader = "#corpus v1 ";
constexpr std::string_view kRejected = "#rejected ";
constexpr std::string_view kStats = "#stats ";

ordered_json record_json(const CorpusRecord& r) {
  ordered_json j;
  j["target"] = corpus_target_name(r.target);
  j["seed"] = r.seed;
  j["schema_ref"] = r.schema_ref;
  j["input"] = r.input;
  j["output"] = r.output;
  j["provenance"] = r.provenance;
  return j;
}

void check_output(const CorpusRecord& r) {
  if (r.target == CorpusTarget::SamPhase1) {
    parse_masked_template(r.output);
  } else {
    parse_trajectory(r.output);
  }
}

CorpusRecord record_from_json(const ordered_json& j, std::size_t lineno) {
  CorpusRecord r;
  const auto target = corpus_target_from_name(j.at("target").get<std::string>());
  if (!target) throw FormatError(lineno, "unknown target `" + j.at("target").get<std::string>() + "`");
  r.target = *target;
  r.seed = j.at("seed").get<std::string>();
  r.schema_ref = j.at("schema_ref").get<std::string>();
  r.input = j.at("input");
  r.output = j.at("output").get<std::string>();
  r.provenance = j.at("provenance");
  if (!r.input.is_object() || !r.provenance.is_object()) throw FormatError(lineno, "input and provenance must be objects");
  if (r.provenance.empty()) throw FormatError(lineno, "empty provenance");
  return r;
}

}  // namespace

std::string serialize_corpus(const Corpus& c) {
  std::string out(kHeader);
  out += c.kind + "\n";
  for (const auto& r : c.records) out += record_json(r).dump() + "\n";
  for (const auto& r : c.rejected) {
    out += std::string(kRejected) + ordered_json{{"seed", r.seed}, {"verdict", r.verdict}, {"reason", r.reason}}.dump() + "\n";
  }
  out += std::string(kStats) + stats_json(c.stats).dump() + "\n";
  return out;
}

Corpus parse_corpus(std::string_view text) {
  Corpus c;
  // A final line without its newline is incomplete and is not parsed.
  const bool partial = !text.empty() && text.back() != '\n';
  const std::string_view body = partial ? text.substr(0, text.rfind('\n') + 1) : text;
  std::istringstream in{std::string(body)};
  std::string line;
  std::size_t lineno = 0;
  bool saw_stats = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (saw_stats) throw FormatError(lineno, "content after the #stats trailer");
    if (lineno == 1) {
      if (line.rfind(kHeader, 0) != 0) throw FormatError(1, "missing `#corpus v1 <target>` header");
      c.kind = line.substr(kHeader.size());
      if (c.kind != "bam" && c.kind != "sam" && c.kind != "lom" && c.kind != "all") {
        throw FormatError(1, "unknown corpus kind `" + c.kind + "`");
      }
      continue;
    }
    try {
      if (line.rfind(kStats, 0) == 0) {
        c.stats = stats_from_json(ordered_json::parse(line.substr(kStats.size())));
        saw_stats = true;
      } else if (line.rfind(kRejected, 0) == 0) {
        const auto j = ordered_json::parse(line.substr(kRejected.size()));
        c.rejected.push_back({j.at("seed").get<std::string>(), j.at("verdict").get<std::string>(),
                              j.at("reason").get<std::string>()});
      } else {
        if (!c.rejected.empty()) throw FormatError(lineno, "record after #rejected lines");
        CorpusRecord r = record_from_json(ordered_json::parse(line), lineno);
        try {
          check_output(r);
        } catch (const Error& e) {
          throw FormatError(lineno, "output does not parse: " + std::string(e.what()));
        }
        c.records.push_back(std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(lineno, std::string("malformed line: ") + e.what());
    }
  }
  if (lineno == 0 && !partial) throw FormatError(0, "empty corpus file");
  if (!saw_stats || partial) {
    throw FormatError(lineno, "truncated: last complete line is " + std::to_string(lineno));
  }
  return c;
}

void write_corpus(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_corpus(c);
  if (!out) throw IoError("write failed: " + path.string());
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_corpus(text.str());
}

}  // namespace trajsql
