// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/expression.h"

#include <cctype>
#include <stdexcept>

#include "trajsql/action/action.h"

namespace trajsql {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool is_valid_identifier(std::string_view name) {
  name = trim(name);
  if (name.empty() || !ident_start(name.front())) return false;
  for (char c : name) {
    if (!ident_char(c) && c != ' ') return false;
  }
  return true;
}

bool is_simple_identifier(std::string_view name) {
  if (name.empty() || !ident_start(name.front())) return false;
  for (char c : name) {
    if (!ident_char(c)) return false;
  }
  return true;
}

bool looks_like_date(std::string_view s) {
  if (s.size() != 10) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == 4 || i == 7) {
      if (s[i] != '-') return false;
    } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

Literal Literal::string(std::string s) {
  const LiteralKind kind = looks_like_date(s) ? LiteralKind::Date : LiteralKind::String;
  return {kind, std::move(s)};
}

Literal Literal::number(std::string spelling) {
  const bool real = spelling.find_first_of(".eE") != std::string::npos;
  return {real ? LiteralKind::Real : LiteralKind::Integer, std::move(spelling)};
}

std::string_view aggregate_name(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::Sum: return "sum";
    case AggregateKind::Avg: return "average";
    case AggregateKind::Count: return "count";
    case AggregateKind::Min: return "min";
    case AggregateKind::Max: return "max";
  }
  return "count";
}

std::string_view aggregate_sql_name(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::Sum: return "SUM";
    case AggregateKind::Avg: return "AVG";
    case AggregateKind::Count: return "COUNT";
    case AggregateKind::Min: return "MIN";
    case AggregateKind::Max: return "MAX";
  }
  return "COUNT";
}

std::optional<AggregateKind> aggregate_from_name(std::string_view name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "sum") return AggregateKind::Sum;
  if (lower == "average" || lower == "avg") return AggregateKind::Avg;
  if (lower == "count") return AggregateKind::Count;
  if (lower == "min") return AggregateKind::Min;
  if (lower == "max") return AggregateKind::Max;
  return std::nullopt;
}

char arith_symbol(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return '+';
    case ArithOp::Sub: return '-';
    case ArithOp::Mul: return '*';
    case ArithOp::Div: return '/';
  }
  return '+';
}

std::string_view comparator_sql(Comparator c) {
  switch (c) {
    case Comparator::Eq: return "=";
    case Comparator::Ne: return "!=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Like: return "LIKE";
    case Comparator::In: return "IN";
    case Comparator::NotIn: return "NOT IN";
    case Comparator::Between: return "BETWEEN";
    case Comparator::IsNull: return "IS NULL";
    case Comparator::IsNotNull: return "IS NOT NULL";
  }
  return "=";
}

void check_filter(const FilterCondition& filter) {
  const std::size_t n = filter.operands.size();
  switch (filter.comparator) {
    case Comparator::IsNull:
    case Comparator::IsNotNull:
      if (n != 0) throw std::invalid_argument("null check takes no operand");
      break;
    case Comparator::Between: {
      if (n != 2) throw std::invalid_argument("between needs exactly two bounds");
      const auto* lo = filter.operands[0].as<Literal>();
      const auto* hi = filter.operands[1].as<Literal>();
      if (lo && hi && lo->kind != hi->kind) {
        throw std::invalid_argument("between bounds have different scalar kinds");
      }
      break;
    }
    case Comparator::In:
    case Comparator::NotIn:
      if (n == 0) throw std::invalid_argument("in-list is empty");
      break;
    default:
      if (n != 1) throw std::invalid_argument("comparison takes exactly one operand");
  }
}

ActionKind Action::kind() const {
  return std::visit(
      Overloaded{
          [](const SelectAction&) { return ActionKind::Select; },
          [](const WhereAction&) { return ActionKind::Where; },
          [](const GroupByAction&) { return ActionKind::GroupBy; },
          [](const HavingAction&) { return ActionKind::Having; },
          [](const OrderByAction&) { return ActionKind::OrderBy; },
          [](const LimitAction&) { return ActionKind::Limit; },
          [](const DistinctAction&) { return ActionKind::Distinct; },
          [](const SetOpAction& s) {
            switch (s.op) {
              case SetOpKind::Union: return ActionKind::Union;
              case SetOpKind::Intersect: return ActionKind::Intersect;
              case SetOpKind::Except: return ActionKind::Except;
            }
            return ActionKind::Union;
          },
          [](const AggregateChainAction&) { return ActionKind::AggregateChain; },
          [](const CastAction&) { return ActionKind::Cast; },
          [](const SubstrAction&) { return ActionKind::Substr; },
      },
      payload);
}

std::string_view action_kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::Select: return "select";
    case ActionKind::Where: return "where";
    case ActionKind::GroupBy: return "groupby";
    case ActionKind::Having: return "having";
    case ActionKind::OrderBy: return "orderby";
    case ActionKind::Limit: return "limit";
    case ActionKind::Distinct: return "distinct";
    case ActionKind::Union: return "union";
    case ActionKind::Intersect: return "intersect";
    case ActionKind::Except: return "except";
    case ActionKind::AggregateChain: return "aggregate";
    case ActionKind::Cast: return "cast";
    case ActionKind::Substr: return "substr";
    case ActionKind::Calculation: return "calculation";
  }
  return "select";
}

ActionCategory action_category(ActionKind kind) {
  switch (kind) {
    case ActionKind::Select:
    case ActionKind::Where:
    case ActionKind::GroupBy:
    case ActionKind::Having:
    case ActionKind::OrderBy:
    case ActionKind::Limit:
    case ActionKind::Distinct:
      return ActionCategory::Clause;
    case ActionKind::Union:
    case ActionKind::Intersect:
    case ActionKind::Except:
      return ActionCategory::Dataframe;
    case ActionKind::AggregateChain:
      return ActionCategory::Aggregation;
    case ActionKind::Cast:
    case ActionKind::Substr:
    case ActionKind::Calculation:
      return ActionCategory::Operator;
  }
  return ActionCategory::Clause;
}

std::string_view category_name(ActionCategory c) {
  switch (c) {
    case ActionCategory::Clause: return "clause";
    case ActionCategory::Dataframe: return "dataframe";
    case ActionCategory::Aggregation: return "aggregation";
    case ActionCategory::Operator: return "operator";
  }
  return "clause";
}

}  // namespace trajsql
