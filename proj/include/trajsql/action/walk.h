// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "trajsql/action/action.h"
#include "trajsql/action/trajectory.h"

namespace trajsql {

// Traversal helpers. All visit in render order, so the k-th column seen is
// the k-th column printed.

void visit_subexpressions(const Expression& e, const std::function<void(const Expression&)>& fn);
void visit_subexpressions(Expression& e, const std::function<void(Expression&)>& fn);

void visit_conditions(const Condition& c, const std::function<void(const Condition&)>& fn);

/// Top-level expressions of one action.
void visit_action_expressions(const Action& a, const std::function<void(const Expression&)>& fn);
void visit_action_expressions(Action& a, const std::function<void(Expression&)>& fn);

/// Every expression node (pre-order) in a step sequence.
void visit_all_expressions(const std::vector<TrajectoryStep>& steps,
                           const std::function<void(const Expression&)>& fn);
void visit_all_expressions(std::vector<TrajectoryStep>& steps,
                           const std::function<void(Expression&)>& fn);

}  // namespace trajsql
