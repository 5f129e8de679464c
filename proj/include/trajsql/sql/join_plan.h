// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

#include "trajsql/schema/database.h"

namespace trajsql::sql {

/// One foreign-key equality: `fk` references `pk`.
struct JoinEdge {
  QualifiedColumn fk;
  QualifiedColumn pk;
  bool operator==(const JoinEdge&) const = default;
  auto operator<=>(const JoinEdge&) const = default;
};

/// `tables[0]` then each later table joined to an earlier one through
/// `edges[i - 1]`.
struct JoinPlan {
  std::vector<std::string> tables;
  std::vector<JoinEdge> edges;
};

/// Connects `tables` along shortest FK paths, growing a tree from the
/// alphabetically first table and attaching the nearest remaining table
/// each round. Intermediate tables on a path join the plan. Throws
/// SchemaMismatch for unknown tables and JoinPathNotFound when a table is
/// unreachable or its shortest path is not unique.
JoinPlan plan_joins(const std::set<std::string>& tables, const DatabaseInput& d);

}  // namespace trajsql::sql
