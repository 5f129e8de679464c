// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajsql/action/trajectory.h"
#include "trajsql/corpus/seed.h"
#include "trajsql/eval/engine.h"
#include "trajsql/orchestrator/batch.h"

namespace trajsql {

enum class ErrorClass { Schema, Logic };
enum class ErrorSubtype { AttributeOveranalysis, SchemaContradiction, ClauseAbuse, MathematicalDelusion, Other };

std::string_view error_class_name(ErrorClass c);      // schema, logic
std::string_view error_subtype_name(ErrorSubtype s);  // AttributeOveranalysis, ...
/// Schema for the first two subtypes, logic otherwise.
ErrorClass error_class_of(ErrorSubtype s);

struct ErrorTag {
  ErrorClass coarse = ErrorClass::Logic;
  ErrorSubtype subtype = ErrorSubtype::Other;

  static ErrorTag of(ErrorSubtype s) { return {error_class_of(s), s}; }
  std::string str() const;  // `schema/SchemaContradiction`
  bool operator==(const ErrorTag&) const = default;
};

/// nullopt when the trajectories render identically. Otherwise the first
/// rule that applies: a column absent from `d`, extra selected columns
/// covering gold's, differing action kinds, differing columns, differing
/// arithmetic, else Other.
std::optional<ErrorTag> tag_error(const Trajectory& pred, const Trajectory& gold, const DatabaseInput& d);

struct InstanceVerdict {
  std::string seed;
  std::optional<std::string> difficulty;
  /// regenerated, reverted, or initial: where `final_sql` came from.
  std::string final_source;
  std::string final_sql;
  bool initial_ex = false;
  bool final_ex = false;
  bool overcorrection = false;
  bool round_trip_pass = false;
  std::optional<ErrorTag> tag;
  std::size_t schema_tp = 0;
  std::size_t schema_fp = 0;
  std::size_t schema_fn = 0;

  bool operator==(const InstanceVerdict&) const = default;
};

struct GroupScore {
  std::size_t n = 0;
  std::size_t correct = 0;
  double ex = 0.0;
  bool operator==(const GroupScore&) const = default;
};

struct EvalReport {
  std::vector<InstanceVerdict> instances;
  std::size_t n = 0;
  double ex = 0.0;
  double baseline_ex = 0.0;
  /// Initially EX-correct, finally EX-wrong, over all instances.
  double overcorrection = 0.0;
  std::size_t overcorrected = 0;
  double round_trip_pass = 0.0;
  double schema_precision = 0.0;
  double schema_recall = 0.0;
  std::map<std::string, GroupScore> by_difficulty;
  std::map<std::string, std::size_t> tags;

  bool operator==(const EvalReport&) const = default;
};

/// Fills every aggregate from `instances`.
EvalReport summarize(std::vector<InstanceVerdict> instances);

/// The final SQL of a result is the regenerated SQL, else the feedback's
/// reverted SQL, else the initial SQL. Results and golds must cover the
/// same seed ids (AlignmentError). Throws GoldExecutionFailed.
EvalReport evaluate_correction(const std::vector<CorrectionResult>& results, const std::vector<SeedExample>& golds,
                               DatabaseDirectory& dbs, const SchemaCatalog& schemas);

nlohmann::ordered_json report_json(const EvalReport& r);
std::string render_report(const EvalReport& r);

}  // namespace trajsql
