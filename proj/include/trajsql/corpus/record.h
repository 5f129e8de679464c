// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace trajsql {

using ordered_json = nlohmann::ordered_json;

enum class CorpusTarget { Bam, SamPhase1, SamPhase2, Lom };

std::string_view corpus_target_name(CorpusTarget t);  // BAM, SAM-phase1, SAM-phase2, LOM
std::optional<CorpusTarget> corpus_target_from_name(std::string_view name);

struct CorpusRecord {
  CorpusTarget target = CorpusTarget::Bam;
  std::string seed;
  std::string schema_ref;
  /// Target-specific fields, all string-valued, in a fixed key order.
  ordered_json input = ordered_json::object();
  std::string output;
  ordered_json provenance = ordered_json::object();

  /// Input field values joined by newlines.
  std::string input_text() const;
  bool operator==(const CorpusRecord&) const = default;
};

/// A seed dropped by the round-trip filter.
struct Rejection {
  std::string seed;
  std::string verdict;
  std::string reason;
  bool operator==(const Rejection&) const = default;
};

struct TargetStats {
  std::size_t count = 0;
  double mean_input_tokens = 0;
  double mean_output_tokens = 0;
  bool operator==(const TargetStats&) const = default;
};

struct CorpusStats {
  std::map<std::string, TargetStats> targets;
  /// Distinct seeds seen (records or rejections), and those not rejected
  /// with a non-Pass verdict.
  std::size_t round_trip_passed = 0;
  std::size_t round_trip_attempted = 0;
  double round_trip_pass_rate = 0;

  std::size_t total() const;
  bool operator==(const CorpusStats&) const = default;
};

std::size_t whitespace_tokens(std::string_view text);

CorpusStats compute_stats(const std::vector<CorpusRecord>& records, const std::vector<Rejection>& rejected);

ordered_json stats_json(const CorpusStats& s);
CorpusStats stats_from_json(const ordered_json& j);

/// `bam`, `sam`, `lom` or `all`.
struct Corpus {
  std::string kind;
  std::vector<CorpusRecord> records;
  std::vector<Rejection> rejected;
  /// As stored in the file (read) or computed (built).
  CorpusStats stats;
};

std::string serialize_corpus(const Corpus& c);
/// Throws FormatError with the offending line, or naming the last complete
/// line when the stats trailer is missing.
Corpus parse_corpus(std::string_view text);
void write_corpus(const Corpus& c, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

}  // namespace trajsql
