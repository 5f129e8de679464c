// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trajsql/action/action.h"

namespace trajsql {

inline constexpr std::string_view kSourceFrame = "df";
inline constexpr std::string_view kResultBinding = "res";

/// `binding = receiver.action(...).action(...)`
struct TrajectoryStep {
  std::string binding;
  std::string receiver;
  std::vector<Action> chain;
  bool operator==(const TrajectoryStep&) const = default;
};

/// Ordered binding steps; the last one binds `res`. Values are only
/// produced through `Trajectory::make` (or the parser), which enforces the
/// binding discipline.
class Trajectory {
 public:
  Trajectory() = default;

  /// Validates binding discipline and derives source tables. Throws
  /// BindingError.
  static Trajectory make(std::vector<TrajectoryStep> steps);

  const std::vector<TrajectoryStep>& steps() const { return steps_; }
  /// Tables the implicit `df` frame spans (every table named by a column).
  const std::set<std::string>& source_tables() const { return source_tables_; }
  std::size_t action_count() const;
  const TrajectoryStep* find(std::string_view binding) const;

  bool operator==(const Trajectory& other) const { return steps_ == other.steps_; }

 private:
  std::vector<TrajectoryStep> steps_;
  std::set<std::string> source_tables_;
};

/// Renames non-result bindings to df1..dfN in step order, rewriting every
/// reference. Result is a valid trajectory.
Trajectory renumber_bindings(const Trajectory& t);

/// Every column referenced anywhere in the trajectory, in render order.
std::vector<QualifiedColumn> referenced_columns(const Trajectory& t);

}  // namespace trajsql
