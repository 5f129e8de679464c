// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "trajsql/action/trajectory.h"

namespace trajsql {

/// Parses trajectory source text (one step per line). Throws SyntaxError,
/// UnknownAction or BindingError.
Trajectory parse_trajectory(std::string_view text);

/// Parses a single top-level expression such as `count(t.a)`.
Expression parse_expression(std::string_view text);

/// Parses `table.column` (backticks allowed around either part).
QualifiedColumn parse_qualified_column(std::string_view text);

struct RenderOptions {
  /// When set, replaces the printed form of every column occurrence.
  std::function<std::string(const QualifiedColumn&)> column_hook;
};

/// Canonical text: one step per line, LF-terminated lines, single spaces
/// around `=`, lowercase action names.
std::string render_trajectory(const Trajectory& t, const RenderOptions& options = {});
std::string render_step(const TrajectoryStep& step, const RenderOptions& options = {});
std::string render_action(const Action& action, const RenderOptions& options = {});
std::string render_expression(const Expression& e, const RenderOptions& options = {});
std::string render_column(const QualifiedColumn& c);
/// Text of the filter mini-grammar for a predicate (`between 1 and 2`,
/// `"x"`, `is null`, ...), unquoted.
std::string render_filter_text(const FilterCondition& f, const RenderOptions& options = {});

}  // namespace trajsql
