// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trajsql/action/trajectory.h"
#include "trajsql/schema/database.h"

namespace trajsql {

enum class FindingKind {
  UnknownTable,
  UnknownColumn,
  NestedAggregate,
  MisplacedStar,
  ChainOrder,
};

enum class Severity { Error, Warning };

struct Finding {
  std::size_t step = 0;  // 0-based step index
  FindingKind kind = FindingKind::UnknownColumn;
  Severity severity = Severity::Error;
  std::string message;
  std::optional<QualifiedColumn> column;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  bool has_errors() const;
  std::size_t count(FindingKind kind) const;
};

std::string_view finding_kind_name(FindingKind kind);

/// Schema findings are reported once per distinct table/column, at the
/// first step that mentions it. A missing table suppresses findings for its
/// columns.
ValidationReport validate_trajectory(const Trajectory& t, const DatabaseInput& d);

}  // namespace trajsql
