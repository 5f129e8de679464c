// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/validate.h"

#include <algorithm>
#include <set>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/action/walk.h"

namespace trajsql {

bool ValidationReport::has_errors() const {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::Error; });
}

std::size_t ValidationReport::count(FindingKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [&](const Finding& f) { return f.kind == kind; }));
}

std::string_view finding_kind_name(FindingKind kind) {
  switch (kind) {
    case FindingKind::UnknownTable: return "unknown-table";
    case FindingKind::UnknownColumn: return "unknown-column";
    case FindingKind::NestedAggregate: return "nested-aggregate";
    case FindingKind::MisplacedStar: return "misplaced-star";
    case FindingKind::ChainOrder: return "chain-order";
  }
  return "unknown";
}

namespace {

bool contains_aggregate(const Expression& e) {
  bool found = false;
  visit_subexpressions(e, [&](const Expression& sub) {
    if (sub.as<AggregateExpr>()) found = true;
  });
  return found;
}

class Checker {
 public:
  Checker(const DatabaseInput& d, ValidationReport& report) : d_(d), report_(report) {}

  void columns(std::size_t step, const Expression& e) {
    visit_subexpressions(e, [&](const Expression& sub) {
      if (const auto* c = sub.as<ColumnExpr>()) column(step, c->ref);
    });
  }

  void column(std::size_t step, const QualifiedColumn& ref) {
    const TableDef* table = d_.find_table(ref.table);
    if (!table) {
      if (missing_tables_.insert(ref.table).second) {
        add(step, FindingKind::UnknownTable, Severity::Error, "table `" + ref.table + "` is not in the schema", ref);
      }
      return;
    }
    if (!table->find_column(ref.column) && missing_columns_.insert(ref).second) {
      add(step, FindingKind::UnknownColumn, Severity::Error,
          "column `" + render_column(ref) + "` is not in table `" + table->name + "`", ref);
    }
  }

  // Aggregates may not nest; `*` only as a count argument or select element.
  void shape(std::size_t step, const Expression& e, bool star_ok) {
    if (e.as<StarExpr>()) {
      if (!star_ok) add(step, FindingKind::MisplacedStar, Severity::Error, "`*` outside count() or select", {});
      return;
    }
    if (const auto* agg = e.as<AggregateExpr>()) {
      if (contains_aggregate(*agg->arg)) {
        add(step, FindingKind::NestedAggregate, Severity::Error, "nested aggregate in " + render_expression(e), {});
      }
      shape(step, *agg->arg, agg->kind == AggregateKind::Count);
      return;
    }
    std::visit(Overloaded{
                   [&](const CastExpr& c) { shape(step, *c.arg, false); },
                   [&](const ArithmeticExpr& a) {
                     shape(step, *a.lhs, false);
                     shape(step, *a.rhs, false);
                   },
                   [&](const SubstrExpr& s) { shape(step, *s.arg, false); },
                   [&](const FunctionExpr& f) {
                     for (const auto& arg : f.args) shape(step, arg, false);
                   },
                   [](const auto&) {},
               },
               e.node);
  }

  void nested(std::size_t step, const std::string& where) {
    add(step, FindingKind::NestedAggregate, Severity::Error, "nested aggregate in " + where, {});
  }

  void warn(std::size_t step, const std::string& message) {
    add(step, FindingKind::ChainOrder, Severity::Warning, message, {});
  }

 private:
  void add(std::size_t step, FindingKind kind, Severity severity, std::string message,
           std::optional<QualifiedColumn> column) {
    report_.findings.push_back({step, kind, severity, std::move(message), std::move(column)});
  }

  const DatabaseInput& d_;
  ValidationReport& report_;
  std::set<std::string> missing_tables_;
  std::set<QualifiedColumn> missing_columns_;
};

}  // namespace

ValidationReport validate_trajectory(const Trajectory& t, const DatabaseInput& d) {
  ValidationReport report;
  Checker check(d, report);
  const auto& steps = t.steps();

  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& action : steps[i].chain) {
      visit_action_expressions(action, [&](const Expression& e) { check.columns(i, e); });
    }
  }

  // Groupby reachable along each binding's receiver lineage.
  std::vector<bool> grouped(steps.size(), false);
  auto lineage_grouped = [&](const std::string& receiver) -> bool {
    for (std::size_t k = 0; k < steps.size(); ++k) {
      if (steps[k].binding == receiver) return grouped[k];
    }
    return false;
  };

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    bool has_group = lineage_grouped(step.receiver);
    bool limited = false;
    for (const auto& action : step.chain) {
      bool star_ok = action.kind() == ActionKind::Select;
      if (const auto* chained = action.as<AggregateChainAction>()) {
        star_ok = chained->kind == AggregateKind::Count;
        if (contains_aggregate(chained->arg)) {
          check.nested(i, render_action(action));
        }
      }
      visit_action_expressions(action, [&](const Expression& e) { check.shape(i, e, star_ok); });
      switch (action.kind()) {
        case ActionKind::GroupBy:
          has_group = true;
          break;
        case ActionKind::Having:
          if (!has_group) check.warn(i, "having without a preceding groupby");
          break;
        case ActionKind::AggregateChain:
          if (!has_group) check.warn(i, "aggregate chained without a preceding groupby");
          break;
        case ActionKind::OrderBy:
          if (limited) check.warn(i, "orderby after limit");
          break;
        case ActionKind::Limit:
          limited = true;
          break;
        default:
          break;
      }
    }
    grouped[i] = has_group;
  }

  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& a, const Finding& b) { return a.step < b.step; });
  return report;
}

}  // namespace trajsql
