// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/trajectory.h"

#include <map>

#include "trajsql/action/walk.h"
#include "trajsql/core/error.h"

namespace trajsql {

namespace {

// Bindings a step reads besides its receiver: set-op operands and
// subquery references inside expressions.
std::vector<std::string> extra_references(const TrajectoryStep& step) {
  std::vector<std::string> refs;
  for (const auto& action : step.chain) {
    if (const auto* set_op = action.as<SetOpAction>()) refs.push_back(set_op->other);
    visit_action_expressions(action, [&](const Expression& top) {
      visit_subexpressions(top, [&](const Expression& e) {
        if (const auto* sub = e.as<SubqueryExpr>()) refs.push_back(sub->binding);
      });
    });
  }
  return refs;
}

}  // namespace

Trajectory Trajectory::make(std::vector<TrajectoryStep> steps) {
  if (steps.empty()) throw BindingError("trajectory has no steps");
  std::set<std::string> bound;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    const std::string where = "step " + std::to_string(i + 1) + " (`" + step.binding + "`)";
    if (!is_simple_identifier(step.binding) || step.binding == kSourceFrame) {
      throw BindingError(where + ": invalid binding name");
    }
    if (step.chain.empty()) throw BindingError(where + ": empty action chain");
    if (bound.count(step.binding)) throw BindingError(where + ": binding defined twice");
    if (step.receiver != kSourceFrame && !bound.count(step.receiver)) {
      throw BindingError(where + ": receiver `" + step.receiver +
                         "` is not defined by an earlier step");
    }
    for (const auto& ref : extra_references(step)) {
      if (!bound.count(ref)) {
        throw BindingError(where + ": reference to `" + ref + "` before it is defined");
      }
    }
    const bool is_res = step.binding == kResultBinding;
    if (is_res && i + 1 != steps.size()) {
      throw BindingError(where + ": `res` must be bound by the last step");
    }
    if (!is_res && i + 1 == steps.size()) {
      throw BindingError("missing `res` binding: last step binds `" + step.binding + "`");
    }
    bound.insert(step.binding);
  }

  Trajectory t;
  t.steps_ = std::move(steps);
  for (const auto& c : referenced_columns(t)) t.source_tables_.insert(c.table);
  return t;
}

std::size_t Trajectory::action_count() const {
  std::size_t n = 0;
  for (const auto& step : steps_) n += step.chain.size();
  return n;
}

const TrajectoryStep* Trajectory::find(std::string_view binding) const {
  for (const auto& step : steps_) {
    if (step.binding == binding) return &step;
  }
  return nullptr;
}

Trajectory renumber_bindings(const Trajectory& t) {
  std::map<std::string, std::string> rename;
  std::size_t next = 1;
  for (const auto& step : t.steps()) {
    if (step.binding == kResultBinding) continue;
    rename[step.binding] = "df" + std::to_string(next++);
  }
  auto mapped = [&](const std::string& name) {
    auto it = rename.find(name);
    return it == rename.end() ? name : it->second;
  };
  std::vector<TrajectoryStep> steps = t.steps();
  for (auto& step : steps) {
    step.binding = mapped(step.binding);
    step.receiver = mapped(step.receiver);
    for (auto& action : step.chain) {
      if (auto* set_op = action.as<SetOpAction>()) set_op->other = mapped(set_op->other);
    }
  }
  visit_all_expressions(steps, [&](Expression& e) {
    if (auto* sub = e.as<SubqueryExpr>()) sub->binding = mapped(sub->binding);
  });
  return Trajectory::make(std::move(steps));
}

std::vector<QualifiedColumn> referenced_columns(const Trajectory& t) {
  std::vector<QualifiedColumn> out;
  visit_all_expressions(t.steps(), [&](const Expression& e) {
    if (const auto* c = e.as<ColumnExpr>()) out.push_back(c->ref);
  });
  return out;
}

}  // namespace trajsql
