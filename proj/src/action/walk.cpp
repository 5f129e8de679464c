// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/walk.h"

#include <type_traits>

namespace trajsql {

void visit_subexpressions(const Expression& e, const std::function<void(const Expression&)>& fn) {
  fn(e);
  std::visit(Overloaded{
                 [&](const AggregateExpr& a) { visit_subexpressions(*a.arg, fn); },
                 [&](const CastExpr& c) { visit_subexpressions(*c.arg, fn); },
                 [&](const ArithmeticExpr& a) {
                   visit_subexpressions(*a.lhs, fn);
                   visit_subexpressions(*a.rhs, fn);
                 },
                 [&](const SubstrExpr& s) { visit_subexpressions(*s.arg, fn); },
                 [&](const FunctionExpr& f) {
                   for (const auto& arg : f.args) visit_subexpressions(arg, fn);
                 },
                 [](const auto&) {},
             },
             e.node);
}

void visit_subexpressions(Expression& e, const std::function<void(Expression&)>& fn) {
  fn(e);
  std::visit(Overloaded{
                 [&](AggregateExpr& a) { visit_subexpressions(*a.arg, fn); },
                 [&](CastExpr& c) { visit_subexpressions(*c.arg, fn); },
                 [&](ArithmeticExpr& a) {
                   visit_subexpressions(*a.lhs, fn);
                   visit_subexpressions(*a.rhs, fn);
                 },
                 [&](SubstrExpr& s) { visit_subexpressions(*s.arg, fn); },
                 [&](FunctionExpr& f) {
                   for (auto& arg : f.args) visit_subexpressions(arg, fn);
                 },
                 [](auto&) {},
             },
             e.node);
}

void visit_conditions(const Condition& c, const std::function<void(const Condition&)>& fn) {
  fn(c);
  for (const auto& term : c.terms) visit_conditions(term, fn);
}

namespace {

template <class C, class Fn>
void condition_expressions(C& c, const Fn& fn) {
  if (c.kind == Condition::Kind::Predicate) {
    fn(c.element);
    for (auto& op : c.filter.operands) fn(op);
    return;
  }
  for (auto& term : c.terms) condition_expressions(term, fn);
}

template <class A, class Fn>
void action_expressions(A& a, const Fn& fn) {
  std::visit(Overloaded{
                 [&](auto& x) {
                   using T = std::decay_t<decltype(x)>;
                   if constexpr (std::is_same_v<T, SelectAction> ||
                                 std::is_same_v<T, GroupByAction> ||
                                 std::is_same_v<T, DistinctAction>) {
                     for (auto& e : x.elements) fn(e);
                   } else if constexpr (std::is_same_v<T, WhereAction> ||
                                        std::is_same_v<T, HavingAction>) {
                     condition_expressions(x.condition, fn);
                   } else if constexpr (std::is_same_v<T, OrderByAction>) {
                     fn(x.by);
                   } else if constexpr (std::is_same_v<T, AggregateChainAction>) {
                     fn(x.arg);
                   } else if constexpr (std::is_same_v<T, CastAction> ||
                                        std::is_same_v<T, SubstrAction>) {
                     fn(x.element);
                   }
                 },
             },
             a.payload);
}

}  // namespace

void visit_action_expressions(const Action& a, const std::function<void(const Expression&)>& fn) {
  action_expressions(a, fn);
}

void visit_action_expressions(Action& a, const std::function<void(Expression&)>& fn) {
  action_expressions(a, fn);
}

void visit_all_expressions(const std::vector<TrajectoryStep>& steps,
                           const std::function<void(const Expression&)>& fn) {
  for (const auto& step : steps) {
    for (const auto& action : step.chain) {
      visit_action_expressions(action, [&](const Expression& e) { visit_subexpressions(e, fn); });
    }
  }
}

void visit_all_expressions(std::vector<TrajectoryStep>& steps,
                           const std::function<void(Expression&)>& fn) {
  for (auto& step : steps) {
    for (auto& action : step.chain) {
      visit_action_expressions(action, [&](Expression& e) { visit_subexpressions(e, fn); });
    }
  }
}

}  // namespace trajsql
