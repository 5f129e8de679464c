// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trajsql/action/expression.h"

namespace trajsql {

enum class ActionKind {
  Select,
  Where,
  GroupBy,
  Having,
  OrderBy,
  Limit,
  Distinct,
  Union,
  Intersect,
  Except,
  AggregateChain,
  Cast,
  Substr,
  /// `+ - * /` inside expressions; never a chain action.
  Calculation,
};

enum class ActionCategory { Clause, Dataframe, Aggregation, Operator };
enum class SortOrder { Asc, Desc };
enum class SetOpKind { Union, Intersect, Except };

struct SelectAction {
  std::vector<Expression> elements;
  bool operator==(const SelectAction&) const = default;
};
struct WhereAction {
  Condition condition;
  bool operator==(const WhereAction&) const = default;
};
struct GroupByAction {
  std::vector<Expression> elements;
  bool operator==(const GroupByAction&) const = default;
};
struct HavingAction {
  Condition condition;
  bool operator==(const HavingAction&) const = default;
};
struct OrderByAction {
  Expression by;
  SortOrder order = SortOrder::Asc;
  bool operator==(const OrderByAction&) const = default;
};
/// `limit(n)` or `limit(offset, n)`.
struct LimitAction {
  std::int64_t count = 1;
  std::optional<std::int64_t> offset;
  bool operator==(const LimitAction&) const = default;
};
struct DistinctAction {
  std::vector<Expression> elements;
  bool operator==(const DistinctAction&) const = default;
};
struct SetOpAction {
  SetOpKind op = SetOpKind::Union;
  std::string other;
  bool operator==(const SetOpAction&) const = default;
};
/// Aggregate chained after a groupby, e.g. `groupby(t.a).count(t.b)`.
struct AggregateChainAction {
  AggregateKind kind = AggregateKind::Count;
  bool distinct = false;
  Expression arg{StarExpr{}};
  bool operator==(const AggregateChainAction&) const = default;
};
struct CastAction {
  Expression element{StarExpr{}};
  std::string type;
  bool operator==(const CastAction&) const = default;
};
struct SubstrAction {
  Expression element{StarExpr{}};
  std::int64_t start = 1;
  std::optional<std::int64_t> length;
  bool operator==(const SubstrAction&) const = default;
};

struct Action {
  using Payload = std::variant<SelectAction, WhereAction, GroupByAction, HavingAction,
                               OrderByAction, LimitAction, DistinctAction, SetOpAction,
                               AggregateChainAction, CastAction, SubstrAction>;
  Payload payload;

  ActionKind kind() const;
  template <class T>
  const T* as() const {
    return std::get_if<T>(&payload);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&payload);
  }
  bool operator==(const Action&) const = default;
};

std::string_view action_kind_name(ActionKind kind);
ActionCategory action_category(ActionKind kind);
std::string_view category_name(ActionCategory c);

}  // namespace trajsql
