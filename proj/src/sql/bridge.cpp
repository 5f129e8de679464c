// SPDX-License-Identifier: Apache-2.0
#include "trajsql/sql/bridge.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "trajsql/action/walk.h"
#include "trajsql/core/error.h"
#include "trajsql/sql/join_plan.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace trajsql::sql {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::CanonicalMismatch: return "CanonicalMismatch";
    case Verdict::Unsupported: return "Unsupported";
  }
  return "Unsupported";
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// ---------------------------------------------------------------------------
// SQL -> trajectory

struct ScopeTable {
  const TableDef* def;
  std::string alias;
};

struct Scope {
  std::vector<ScopeTable> tables;
  const Scope* parent = nullptr;

  const ScopeTable* qualifier(const std::string& q) const {
    for (const auto& t : tables) {
      if (!t.alias.empty() && iequals(t.alias, q)) return &t;
    }
    for (const auto& t : tables) {
      if (iequals(t.def->name, q)) return &t;
    }
    return nullptr;
  }
};

std::optional<Comparator> comparator_of(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq: return Comparator::Eq;
    case BinaryOp::Ne: return Comparator::Ne;
    case BinaryOp::Lt: return Comparator::Lt;
    case BinaryOp::Le: return Comparator::Le;
    case BinaryOp::Gt: return Comparator::Gt;
    case BinaryOp::Ge: return Comparator::Ge;
    case BinaryOp::Like: return Comparator::Like;
    default: return std::nullopt;
  }
}

Comparator flipped(Comparator c) {
  switch (c) {
    case Comparator::Lt: return Comparator::Gt;
    case Comparator::Le: return Comparator::Ge;
    case Comparator::Gt: return Comparator::Lt;
    case Comparator::Ge: return Comparator::Le;
    default: return c;
  }
}

void flatten(const SqlExpr& e, BinaryOp op, std::vector<const SqlExpr*>& out) {
  if (const auto* b = e.as<SqlBinary>(); b && b->op == op) {
    flatten(*b->lhs, op, out);
    flatten(*b->rhs, op, out);
    return;
  }
  out.push_back(&e);
}

class Decomposer {
 public:
  Decomposer(const DatabaseInput& d, DecomposeOptions options) : d_(d), options_(options) {}

  Trajectory run(const Select& s) {
    block(s, nullptr, true);
    return Trajectory::make(std::move(steps_));
  }

 private:
  std::string fresh() { return "df" + std::to_string(++counter_); }

  std::string emit(std::string binding, std::string receiver, std::vector<Action> chain) {
    steps_.push_back({binding, std::move(receiver), std::move(chain)});
    return binding;
  }

  std::string block(const Select& s, const Scope* parent, bool root) {
    if (s.compounds.empty()) return core_block(s.core, s, parent, root);
    if (!s.order_by.empty() || s.limit) {
      throw UnsupportedSql("ORDER BY or LIMIT applied to a compound select");
    }
    const Select plain{};
    std::string left = core_block(s.core, plain, parent, false);
    for (std::size_t i = 0; i < s.compounds.size(); ++i) {
      const auto& c = s.compounds[i];
      SetOpKind op = SetOpKind::Union;
      switch (c.op) {
        case SetOp::Union: op = SetOpKind::Union; break;
        case SetOp::Intersect: op = SetOpKind::Intersect; break;
        case SetOp::Except: op = SetOpKind::Except; break;
        case SetOp::UnionAll: throw UnsupportedSql("UNION ALL has no set action");
      }
      const std::string right = core_block(c.core, plain, parent, false);
      const bool last = i + 1 == s.compounds.size();
      left = emit(root && last ? std::string(kResultBinding) : fresh(), left, {Action{SetOpAction{op, right}}});
    }
    return left;
  }

  Scope scope_for(const SelectCore& c, const Scope* parent) const {
    Scope scope;
    scope.parent = parent;
    auto add = [&](const TableRef& t) {
      const TableDef* def = d_.find_table(t.name);
      if (!def) throw SchemaMismatch("table `" + t.name + "` is not in database `" + d_.name + "`");
      for (const auto& existing : scope.tables) {
        if (existing.def == def) throw UnsupportedSql("self-join on `" + def->name + "`");
      }
      scope.tables.push_back({def, t.alias});
    };
    if (!c.from) throw UnsupportedSql("SELECT without FROM");
    add(*c.from);
    for (const auto& j : c.joins) {
      switch (j.type) {
        case JoinType::Inner: break;
        case JoinType::Comma: throw UnsupportedSql("comma-separated FROM lists; use JOIN ... ON");
        case JoinType::Cross: throw UnsupportedSql("CROSS JOIN");
        case JoinType::Left:
        case JoinType::Right:
        case JoinType::Full: throw UnsupportedSql("outer joins");
      }
      add(j.table);
    }
    return scope;
  }

  bool resolves(const Scope& scope, const std::string& column) const {
    return std::any_of(scope.tables.begin(), scope.tables.end(),
                       [&](const ScopeTable& t) { return t.def->find_column(column) != nullptr; });
  }

  // Column or string literal (SQLite double-quoted fallback).
  Expression column(const SqlColumn& col, const Scope& scope) {
    if (!col.table.empty()) {
      const ScopeTable* t = scope.qualifier(col.table);
      if (!t) {
        for (const Scope* s = scope.parent; s; s = s->parent) {
          if (s->qualifier(col.table)) throw UnsupportedSql("correlated subquery references `" + col.table + "`");
        }
        throw SchemaMismatch("unknown table or alias `" + col.table + "`");
      }
      return qualified(*t->def, col.column);
    }
    std::vector<const ScopeTable*> hits;
    for (const auto& t : scope.tables) {
      if (t.def->find_column(col.column)) hits.push_back(&t);
    }
    if (hits.size() > 1) throw UnsupportedSql("ambiguous column `" + col.column + "`");
    if (hits.size() == 1) return qualified(*hits[0]->def, col.column);
    for (const Scope* s = scope.parent; s; s = s->parent) {
      if (resolves(*s, col.column)) throw UnsupportedSql("correlated subquery references `" + col.column + "`");
    }
    if (col.double_quoted) return Expression::literal(Literal::string(col.column));
    if (!options_.lenient) throw SchemaMismatch("column `" + col.column + "` is not in any FROM table");
    return Expression::column(scope.tables[0].def->name, col.column);
  }

  Expression qualified(const TableDef& t, const std::string& name) const {
    if (const ColumnDef* c = t.find_column(name)) return Expression::column(t.name, c->name);
    if (!options_.lenient) throw SchemaMismatch("column `" + t.name + "." + name + "` is not in the schema");
    if (!is_valid_identifier(name)) throw UnsupportedSql("column name `" + name + "`");
    return Expression::column(t.name, name);
  }

  struct Ctx {
    const Scope* scope;
    std::optional<Expression> count_target;  // COUNT(*) rewrite
  };

  Expression expr(const SqlExpr& e, const Ctx& ctx, bool star_ok = false) {
    return std::visit(
        Overloaded{
            [&](const SqlColumn& c) { return column(c, *ctx.scope); },
            [&](const SqlLiteral& l) { return Expression::literal(l.value); },
            [&](const SqlNull&) -> Expression { throw UnsupportedSql("NULL outside IS [NOT] NULL"); },
            [&](const SqlStar& s) -> Expression {
              if (!star_ok || !s.table.empty()) throw UnsupportedSql("`*` in this position");
              return Expression::star();
            },
            [&](const SqlCall& c) { return call(c, ctx); },
            [&](const SqlCast& c) -> Expression {
              if (!is_simple_identifier(c.type)) throw UnsupportedSql("cast type `" + c.type + "`");
              return Expression{CastExpr{expr(*c.arg, ctx), c.type}};
            },
            [&](const SqlBinary& b) -> Expression {
              ArithOp op;
              switch (b.op) {
                case BinaryOp::Add: op = ArithOp::Add; break;
                case BinaryOp::Sub: op = ArithOp::Sub; break;
                case BinaryOp::Mul: op = ArithOp::Mul; break;
                case BinaryOp::Div: op = ArithOp::Div; break;
                default:
                  throw UnsupportedSql("operator " + std::string(binary_op_sql(b.op)) + " in expression position");
              }
              Expression lhs = expr(*b.lhs, ctx);
              Expression rhs = expr(*b.rhs, ctx);
              return Expression{ArithmeticExpr{op, std::move(lhs), std::move(rhs)}};
            },
            [&](const SqlSubquery& s) -> Expression { return Expression{SubqueryExpr{block(*s.query, ctx.scope, false)}}; },
            [&](const auto&) -> Expression { throw UnsupportedSql("expression form not covered by the action space"); },
        },
        e.node);
  }

  Expression call(const SqlCall& c, const Ctx& ctx) {
    const std::string name = lower(c.name);
    const auto agg = aggregate_from_name(name);
    if (agg && c.args.size() == 1 && name != "average") {
      if (c.args[0].as<SqlStar>()) {
        if (*agg != AggregateKind::Count || c.distinct || !c.args[0].as<SqlStar>()->table.empty()) {
          throw UnsupportedSql(c.name + "(*)");
        }
        return Expression::aggregate(AggregateKind::Count,
                                     ctx.count_target ? *ctx.count_target : Expression::star());
      }
      return Expression::aggregate(*agg, expr(c.args[0], ctx), c.distinct);
    }
    if (c.distinct) throw UnsupportedSql("DISTINCT inside " + c.name + "()");
    if (agg && !((*agg == AggregateKind::Min || *agg == AggregateKind::Max) && c.args.size() > 1)) {
      throw UnsupportedSql(c.name + " with " + std::to_string(c.args.size()) + " arguments");
    }
    if (name == "substr" || name == "substring") {
      auto position = [&](const SqlExpr& arg) -> std::int64_t {
        const auto* lit = arg.as<SqlLiteral>();
        if (!lit || lit->value.kind != LiteralKind::Integer || std::stoll(lit->value.text) < 1) {
          throw UnsupportedSql("substr positions must be integer literals >= 1");
        }
        return std::stoll(lit->value.text);
      };
      if (c.args.size() < 2 || c.args.size() > 3) throw UnsupportedSql("substr arity");
      SubstrExpr s{expr(c.args[0], ctx), position(c.args[1]), std::nullopt};
      if (c.args.size() == 3) s.length = position(c.args[2]);
      return Expression{std::move(s)};
    }
    if (name == "cast" || !is_simple_identifier(name)) throw UnsupportedSql("function `" + c.name + "`");
    FunctionExpr f{name, {}};
    for (const auto& a : c.args) {
      if (a.as<SqlStar>()) throw UnsupportedSql("`*` argument to " + c.name);
      f.args.push_back(expr(a, ctx));
    }
    return Expression{std::move(f)};
  }

  static bool is_constant(const Expression& e) { return e.as<Literal>() != nullptr; }

  Condition atom(const SqlExpr& e, const Ctx& ctx) {
    auto build = [&](Expression element, FilterCondition f) {
      if (element.as<SubqueryExpr>()) throw UnsupportedSql("subquery as the filtered element");
      try {
        check_filter(f);
      } catch (const std::invalid_argument& err) {
        throw UnsupportedSql(std::string("filter: ") + err.what());
      }
      return Condition::predicate(std::move(element), std::move(f));
    };
    if (const auto* b = e.as<SqlBinary>()) {
      const auto cmp = comparator_of(b->op);
      if (!cmp) throw UnsupportedSql("predicate form `" + render_sql_expression(e) + "`");
      if (b->lhs->as<SqlNull>() || b->rhs->as<SqlNull>()) throw UnsupportedSql("comparison with NULL");
      Expression lhs = expr(*b->lhs, ctx);
      Expression rhs = expr(*b->rhs, ctx);
      Comparator c = *cmp;
      if (c != Comparator::Like && ((is_constant(lhs) && !is_constant(rhs)) || lhs.as<SubqueryExpr>())) {
        std::swap(lhs, rhs);
        c = flipped(c);
      }
      return build(std::move(lhs), {c, {std::move(rhs)}});
    }
    if (const auto* b = e.as<SqlBetween>()) {
      if (b->negated) throw UnsupportedSql("NOT BETWEEN");
      Expression arg = expr(*b->arg, ctx);
      Expression lo = expr(*b->low, ctx);
      Expression hi = expr(*b->high, ctx);
      return build(std::move(arg), {Comparator::Between, {std::move(lo), std::move(hi)}});
    }
    if (const auto* in = e.as<SqlIn>()) {
      Expression arg = expr(*in->arg, ctx);
      FilterCondition f{in->negated ? Comparator::NotIn : Comparator::In, {}};
      if (in->subquery) {
        f.operands.push_back(Expression{SubqueryExpr{block(**in->subquery, ctx.scope, false)}});
      } else {
        for (const auto& item : in->list) f.operands.push_back(expr(item, ctx));
      }
      return build(std::move(arg), std::move(f));
    }
    if (const auto* n = e.as<SqlIsNull>()) {
      return build(expr(*n->arg, ctx), {n->negated ? Comparator::IsNotNull : Comparator::IsNull, {}});
    }
    if (e.as<SqlNotLike>()) throw UnsupportedSql("NOT LIKE");
    throw UnsupportedSql("predicate form `" + render_sql_expression(e) + "`");
  }

  Condition condition(const SqlExpr& e, const Ctx& ctx) {
    const auto* b = e.as<SqlBinary>();
    if (!b || (b->op != BinaryOp::Or && b->op != BinaryOp::And)) return atom(e, ctx);
    std::vector<const SqlExpr*> parts;
    flatten(e, b->op, parts);
    Condition out;
    out.kind = b->op == BinaryOp::Or ? Condition::Kind::Or : Condition::Kind::And;
    for (const SqlExpr* p : parts) out.terms.push_back(condition(*p, ctx));
    return out;
  }

  // Select-alias references become the aliased expression.
  SqlExpr substitute(const SqlExpr& e, const SelectCore& c, const Scope& scope, bool prefer_alias) const {
    const auto* col = e.as<SqlColumn>();
    if (!col || !col->table.empty()) return e;
    for (const auto& item : c.items) {
      if (item.alias.empty() || !iequals(item.alias, col->column)) continue;
      if (!prefer_alias && resolves(scope, col->column)) continue;
      return item.expr;
    }
    return e;
  }

  SqlExpr substitute_deep(SqlExpr e, const SelectCore& c, const Scope& scope, bool prefer_alias) const {
    if (e.as<SqlColumn>()) return substitute(e, c, scope, prefer_alias);
    std::visit(Overloaded{
                   [&](SqlCall& x) {
                     for (auto& a : x.args) a = substitute_deep(a, c, scope, prefer_alias);
                   },
                   [&](SqlCast& x) { *x.arg = substitute_deep(*x.arg, c, scope, prefer_alias); },
                   [&](SqlBinary& x) {
                     *x.lhs = substitute_deep(*x.lhs, c, scope, prefer_alias);
                     *x.rhs = substitute_deep(*x.rhs, c, scope, prefer_alias);
                   },
                   [&](SqlBetween& x) {
                     *x.arg = substitute_deep(*x.arg, c, scope, prefer_alias);
                     *x.low = substitute_deep(*x.low, c, scope, prefer_alias);
                     *x.high = substitute_deep(*x.high, c, scope, prefer_alias);
                   },
                   [&](SqlIn& x) {
                     *x.arg = substitute_deep(*x.arg, c, scope, prefer_alias);
                     for (auto& a : x.list) a = substitute_deep(a, c, scope, prefer_alias);
                   },
                   [&](SqlIsNull& x) { *x.arg = substitute_deep(*x.arg, c, scope, prefer_alias); },
                   [&](SqlUnary& x) { *x.arg = substitute_deep(*x.arg, c, scope, prefer_alias); },
                   [](auto&) {},
               },
               e.node);
    return e;
  }

  void check_joins(const SelectCore& c, const Scope& scope, const std::set<std::string>& referenced) {
    if (referenced.empty()) throw UnsupportedSql("the query references no table column");
    std::set<std::string> sql_tables;
    for (const auto& t : scope.tables) sql_tables.insert(t.def->name);
    std::set<JoinEdge> sql_edges;
    const Ctx ctx{&scope, std::nullopt};
    for (const auto& j : c.joins) {
      if (!j.on) throw UnsupportedSql("JOIN without ON");
      std::vector<const SqlExpr*> parts;
      flatten(*j.on, BinaryOp::And, parts);
      for (const SqlExpr* p : parts) {
        const auto* b = p->as<SqlBinary>();
        if (!b || b->op != BinaryOp::Eq || !b->lhs->as<SqlColumn>() || !b->rhs->as<SqlColumn>()) {
          throw UnsupportedSql("join condition is not a column equality");
        }
        const Expression l = column(*b->lhs->as<SqlColumn>(), scope);
        const Expression r = column(*b->rhs->as<SqlColumn>(), scope);
        const auto* lc = l.as<ColumnExpr>();
        const auto* rc = r.as<ColumnExpr>();
        if (!lc || !rc) throw UnsupportedSql("join condition is not a column equality");
        bool matched = false;
        for (const auto& t : d_.tables) {
          for (const auto& fk : t.foreign_keys) {
            const JoinEdge edge{{t.name, fk.from_column}, {fk.to_table, fk.to_column}};
            if ((edge.fk == lc->ref && edge.pk == rc->ref) || (edge.fk == rc->ref && edge.pk == lc->ref)) {
              sql_edges.insert(edge);
              matched = true;
            }
          }
        }
        if (!matched) throw UnsupportedSql("join condition " + lc->ref.str() + " = " + rc->ref.str() + " is not a foreign key");
      }
    }
    (void)ctx;
    JoinPlan plan;
    try {
      plan = plan_joins(referenced, d_);
    } catch (const JoinPathNotFound& e) {
      throw UnsupportedSql(std::string("implicit join: ") + e.what());
    }
    const std::set<std::string> plan_tables(plan.tables.begin(), plan.tables.end());
    const std::set<JoinEdge> plan_edges(plan.edges.begin(), plan.edges.end());
    if (plan_tables != sql_tables || plan_edges != sql_edges) {
      throw UnsupportedSql("FROM clause is not the foreign-key join of the referenced tables");
    }
  }

  static void collect_tables(const Expression& e, std::set<std::string>& out) {
    visit_subexpressions(e, [&](const Expression& sub) {
      if (const auto* c = sub.as<ColumnExpr>()) out.insert(c->ref.table);
    });
  }

  static void collect_aggregates(const Expression& e, std::vector<Expression>& out) {
    if (const auto* a = e.as<AggregateExpr>()) {
      if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
      (void)a;
      return;
    }
    std::visit(Overloaded{
                   [&](const CastExpr& c) { collect_aggregates(*c.arg, out); },
                   [&](const ArithmeticExpr& x) {
                     collect_aggregates(*x.lhs, out);
                     collect_aggregates(*x.rhs, out);
                   },
                   [&](const SubstrExpr& s) { collect_aggregates(*s.arg, out); },
                   [&](const FunctionExpr& f) {
                     for (const auto& a : f.args) collect_aggregates(a, out);
                   },
                   [](const auto&) {},
               },
               e.node);
  }

  static void condition_expressions(const Condition& c, const std::function<void(const Expression&)>& fn) {
    if (!c.compound()) {
      fn(c.element);
      for (const auto& op : c.filter.operands) fn(op);
      return;
    }
    for (const auto& t : c.terms) condition_expressions(t, fn);
  }

  // `modifiers` supplies ORDER BY / LIMIT for simple selects.
  std::string core_block(const SelectCore& c, const Select& modifiers, const Scope* parent, bool root) {
    const Scope scope = scope_for(c, parent);
    Ctx ctx{&scope, std::nullopt};

    std::vector<Expression> groups;
    for (const auto& g : c.group_by) groups.push_back(expr(substitute(g, c, scope, false), ctx));
    if (!groups.empty()) {
      ctx.count_target = groups[0];
    } else if (const ColumnDef* pk = scope.tables[0].def->primary_key()) {
      ctx.count_target = Expression::column(scope.tables[0].def->name, pk->name);
    }

    std::vector<Condition> wheres;
    if (c.where) {
      std::vector<const SqlExpr*> parts;
      flatten(*c.where, BinaryOp::And, parts);
      for (const SqlExpr* p : parts) wheres.push_back(condition(substitute_deep(*p, c, scope, false), ctx));
    }
    std::vector<Condition> havings;
    if (c.having) {
      std::vector<const SqlExpr*> parts;
      flatten(*c.having, BinaryOp::And, parts);
      for (const SqlExpr* p : parts) havings.push_back(condition(substitute_deep(*p, c, scope, false), ctx));
    }
    std::vector<Expression> items;
    for (const auto& item : c.items) items.push_back(expr(item.expr, ctx, true));

    std::vector<OrderByAction> orders;
    for (const auto& o : modifiers.order_by) {
      SqlExpr target = o.expr;
      if (const auto* lit = target.as<SqlLiteral>(); lit && lit->value.kind == LiteralKind::Integer) {
        const auto k = std::stoll(lit->value.text);
        if (k < 1 || static_cast<std::size_t>(k) > c.items.size()) throw UnsupportedSql("ORDER BY position out of range");
        target = c.items[k - 1].expr;
      }
      target = substitute_deep(target, c, scope, true);
      orders.push_back({expr(target, ctx), o.desc ? SortOrder::Desc : SortOrder::Asc});
    }
    std::optional<LimitAction> limit;
    if (modifiers.limit) {
      if (*modifiers.limit < 1) throw UnsupportedSql("LIMIT below 1");
      limit = LimitAction{*modifiers.limit, modifiers.offset};
    } else if (modifiers.offset) {
      throw UnsupportedSql("OFFSET without LIMIT");
    }

    std::set<std::string> tables;
    for (const auto& g : groups) collect_tables(g, tables);
    for (const auto& w : wheres) condition_expressions(w, [&](const Expression& e) { collect_tables(e, tables); });
    for (const auto& h : havings) condition_expressions(h, [&](const Expression& e) { collect_tables(e, tables); });
    for (const auto& i : items) collect_tables(i, tables);
    for (const auto& o : orders) collect_tables(o.by, tables);
    check_joins(c, scope, tables);

    std::string prev(kSourceFrame);
    for (auto& w : wheres) prev = emit(fresh(), prev, {Action{WhereAction{std::move(w)}}});
    if (!groups.empty()) {
      std::vector<Expression> aggregates;
      for (const auto& i : items) collect_aggregates(i, aggregates);
      for (const auto& h : havings) condition_expressions(h, [&](const Expression& e) { collect_aggregates(e, aggregates); });
      for (const auto& o : orders) collect_aggregates(o.by, aggregates);
      std::vector<Action> chain{Action{GroupByAction{groups}}};
      for (const auto& a : aggregates) {
        const auto& agg = *a.as<AggregateExpr>();
        chain.push_back(Action{AggregateChainAction{agg.kind, agg.distinct, *agg.arg}});
      }
      prev = emit(fresh(), prev, std::move(chain));
    }
    for (auto& h : havings) prev = emit(fresh(), prev, {Action{HavingAction{std::move(h)}}});
    if (c.distinct) prev = emit(fresh(), prev, {Action{DistinctAction{items}}});
    if (!orders.empty() || limit) {
      std::vector<Action> chain;
      for (auto& o : orders) chain.push_back(Action{std::move(o)});
      if (limit) chain.push_back(Action{*limit});
      prev = emit(fresh(), prev, std::move(chain));
    }
    return emit(root ? std::string(kResultBinding) : fresh(), prev, {Action{SelectAction{std::move(items)}}});
  }

  const DatabaseInput& d_;
  DecomposeOptions options_;
  std::vector<TrajectoryStep> steps_;
  int counter_ = 0;
};

// ---------------------------------------------------------------------------
// trajectory -> SQL

class Reverter {
 public:
  Reverter(const Trajectory& t, const DatabaseInput& d) : t_(t), d_(d) {}

  Select binding(const std::string& name) {
    const TrajectoryStep* step = t_.find(name);
    if (!step) throw InvalidChain("unknown binding `" + name + "`");
    if (const auto* op = step->chain.front().as<SetOpAction>()) {
      if (step->chain.size() != 1) throw InvalidChain("`" + name + "`: a set operation must be alone in its step");
      if (step->receiver == kSourceFrame) throw InvalidChain("`" + name + "`: set operation on the source frame");
      Select left = binding(step->receiver);
      if (!left.order_by.empty() || left.limit) throw InvalidChain("`" + name + "`: ordered or limited set-operation branch");
      Select right = binding(op->other);
      if (!right.compounds.empty() || !right.order_by.empty() || right.limit) {
        throw InvalidChain("`" + name + "`: right branch must be a plain select");
      }
      SetOp sop = SetOp::Union;
      if (op->op == SetOpKind::Intersect) sop = SetOp::Intersect;
      if (op->op == SetOpKind::Except) sop = SetOp::Except;
      left.compounds.push_back({sop, std::move(right.core)});
      return left;
    }
    return lineage(*step);
  }

 private:
  Select lineage(const TrajectoryStep& last) {
    std::vector<const TrajectoryStep*> chain{&last};
    while (chain.back()->receiver != kSourceFrame) {
      const TrajectoryStep* prev = t_.find(chain.back()->receiver);
      if (!prev) throw InvalidChain("unknown binding `" + chain.back()->receiver + "`");
      for (const auto& a : prev->chain) {
        if (a.kind() == ActionKind::Select) throw InvalidChain("`" + prev->binding + "` is already selected and cannot be refined");
        if (a.as<SetOpAction>()) throw InvalidChain("`" + prev->binding + "`: set-operation result used as a frame");
      }
      chain.push_back(prev);
    }
    std::reverse(chain.begin(), chain.end());

    Select s;
    SelectCore& core = s.core;
    std::vector<SqlExpr> wheres;
    std::vector<SqlExpr> havings;
    bool grouped = false;
    bool selected = false;
    std::set<std::string> tables;
    auto note = [&](const Expression& e) {
      visit_subexpressions(e, [&](const Expression& sub) {
        if (const auto* c = sub.as<ColumnExpr>()) tables.insert(c->ref.table);
      });
    };

    for (const TrajectoryStep* step : chain) {
      for (std::size_t i = 0; i < step->chain.size(); ++i) {
        const Action& a = step->chain[i];
        if (selected) throw InvalidChain("`" + step->binding + "`: actions after select");
        visit_action_expressions(a, note);
        std::visit(
            Overloaded{
                [&](const SelectAction& x) {
                  if (step != chain.back() || i + 1 != step->chain.size()) {
                    throw InvalidChain("`" + step->binding + "`: select must end the frame");
                  }
                  for (const auto& e : x.elements) core.items.push_back({expr(e), ""});
                  selected = true;
                },
                [&](const WhereAction& x) { wheres.push_back(condition(x.condition)); },
                [&](const GroupByAction& x) {
                  for (const auto& e : x.elements) core.group_by.push_back(expr(e));
                  grouped = true;
                },
                [&](const HavingAction& x) {
                  if (!grouped) throw InvalidChain("`" + step->binding + "`: having without a preceding groupby");
                  havings.push_back(condition(x.condition));
                },
                [&](const OrderByAction& x) { s.order_by.push_back({expr(x.by), x.order == SortOrder::Desc}); },
                [&](const LimitAction& x) {
                  s.limit = x.count;
                  s.offset = x.offset;
                },
                [&](const DistinctAction&) { core.distinct = true; },
                [&](const SetOpAction&) { throw InvalidChain("`" + step->binding + "`: set operation inside a chain"); },
                [&](const AggregateChainAction&) {},
                [&](const CastAction&) { throw InvalidChain("`" + step->binding + "`: cast has no clause position"); },
                [&](const SubstrAction&) { throw InvalidChain("`" + step->binding + "`: substr has no clause position"); },
            },
            a.payload);
      }
    }
    if (!selected) throw InvalidChain("`" + last.binding + "` does not end with select");
    if (tables.empty()) throw InvalidChain("`" + last.binding + "` references no table");

    const JoinPlan plan = plan_joins(tables, d_);
    core.from = TableRef{plan.tables[0], ""};
    for (std::size_t i = 0; i < plan.edges.size(); ++i) {
      const auto& e = plan.edges[i];
      core.joins.push_back({JoinType::Inner, TableRef{plan.tables[i + 1], ""},
                            make_binary(BinaryOp::Eq, make_column(e.fk.table, e.fk.column),
                                        make_column(e.pk.table, e.pk.column))});
    }
    core.where = conjoin(std::move(wheres), BinaryOp::And);
    core.having = conjoin(std::move(havings), BinaryOp::And);
    return s;
  }

  static std::optional<SqlExpr> conjoin(std::vector<SqlExpr> terms, BinaryOp op) {
    if (terms.empty()) return std::nullopt;
    SqlExpr acc = std::move(terms[0]);
    for (std::size_t i = 1; i < terms.size(); ++i) acc = make_binary(op, std::move(acc), std::move(terms[i]));
    return acc;
  }

  SqlExpr expr(const Expression& e) {
    return std::visit(
        Overloaded{
            [&](const ColumnExpr& c) { return make_column(c.ref.table, c.ref.column); },
            [&](const Literal& l) { return make_literal(l); },
            [&](const StarExpr&) { return SqlExpr{SqlStar{}}; },
            [&](const AggregateExpr& a) {
              return SqlExpr{SqlCall{std::string(aggregate_sql_name(a.kind)), a.distinct, {expr(*a.arg)}}};
            },
            [&](const CastExpr& c) { return SqlExpr{SqlCast{expr(*c.arg), upper(c.type)}}; },
            [&](const ArithmeticExpr& a) {
              BinaryOp op = BinaryOp::Add;
              switch (a.op) {
                case ArithOp::Add: op = BinaryOp::Add; break;
                case ArithOp::Sub: op = BinaryOp::Sub; break;
                case ArithOp::Mul: op = BinaryOp::Mul; break;
                case ArithOp::Div: op = BinaryOp::Div; break;
              }
              SqlExpr lhs = expr(*a.lhs);
              return make_binary(op, std::move(lhs), expr(*a.rhs));
            },
            [&](const SubstrExpr& s) {
              SqlCall call{"SUBSTR", false, {expr(*s.arg), make_literal(Literal::integer(s.start))}};
              if (s.length) call.args.push_back(make_literal(Literal::integer(*s.length)));
              return SqlExpr{std::move(call)};
            },
            [&](const FunctionExpr& f) {
              SqlCall call{upper(f.name), false, {}};
              for (const auto& a : f.args) call.args.push_back(expr(a));
              return SqlExpr{std::move(call)};
            },
            [&](const SubqueryExpr& s) { return SqlExpr{SqlSubquery{binding(s.binding)}}; },
        },
        e.node);
  }

  SqlExpr condition(const Condition& c) {
    if (c.compound()) {
      std::vector<SqlExpr> terms;
      for (const auto& t : c.terms) terms.push_back(condition(t));
      return *conjoin(std::move(terms), c.kind == Condition::Kind::Or ? BinaryOp::Or : BinaryOp::And);
    }
    SqlExpr element = expr(c.element);
    const auto& f = c.filter;
    auto binary = [&](BinaryOp op) { return make_binary(op, std::move(element), expr(f.operands.at(0))); };
    switch (f.comparator) {
      case Comparator::Eq: return binary(BinaryOp::Eq);
      case Comparator::Ne: return binary(BinaryOp::Ne);
      case Comparator::Lt: return binary(BinaryOp::Lt);
      case Comparator::Le: return binary(BinaryOp::Le);
      case Comparator::Gt: return binary(BinaryOp::Gt);
      case Comparator::Ge: return binary(BinaryOp::Ge);
      case Comparator::Like: return binary(BinaryOp::Like);
      case Comparator::Between: {
        SqlExpr lo = expr(f.operands.at(0));
        SqlExpr hi = expr(f.operands.at(1));
        return SqlExpr{SqlBetween{std::move(element), std::move(lo), std::move(hi), false}};
      }
      case Comparator::In:
      case Comparator::NotIn: {
        SqlIn in{std::move(element), {}, std::nullopt, f.comparator == Comparator::NotIn};
        if (f.operands.size() == 1 && f.operands[0].as<SubqueryExpr>()) {
          in.subquery = Box<Select>(binding(f.operands[0].as<SubqueryExpr>()->binding));
        } else {
          for (const auto& op : f.operands) in.list.push_back(expr(op));
        }
        return SqlExpr{std::move(in)};
      }
      case Comparator::IsNull: return SqlExpr{SqlIsNull{std::move(element), false}};
      case Comparator::IsNotNull: return SqlExpr{SqlIsNull{std::move(element), true}};
    }
    throw InvalidChain("unknown comparator");
  }

  const Trajectory& t_;
  const DatabaseInput& d_;
};

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Trajectory decompose(const SqlQuery& s, const DatabaseInput& d, DecomposeOptions options) {
  return Decomposer(d, options).run(s.ast);
}

SqlQuery revert(const Trajectory& t, const DatabaseInput& d, Dialect dialect) {
  if (t.steps().empty()) throw InvalidChain("empty trajectory");
  Reverter r(t, d);
  SqlQuery q;
  q.ast = r.binding(std::string(kResultBinding));
  q.dialect = dialect;
  q.text = render_sql(q.ast, dialect);
  return q;
}

std::string token_diff(const std::string& a, const std::string& b) {
  const auto x = tokens(a);
  const auto y = tokens(b);
  std::vector<std::vector<int>> lcs(x.size() + 1, std::vector<int>(y.size() + 1, 0));
  for (std::size_t i = x.size(); i-- > 0;) {
    for (std::size_t j = y.size(); j-- > 0;) {
      lcs[i][j] = x[i] == y[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::string out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() || j < y.size()) {
    if (i < x.size() && j < y.size() && x[i] == y[j]) {
      out += "  " + x[i] + "\n";
      ++i;
      ++j;
    } else if (j < y.size() && (i == x.size() || lcs[i][j + 1] >= lcs[i + 1][j])) {
      out += "+ " + y[j++] + "\n";
    } else {
      out += "- " + x[i++] + "\n";
    }
  }
  return out;
}

RoundTripReport round_trip(const SqlQuery& s, const DatabaseInput& d) {
  RoundTripReport report;
  report.original = s;
  try {
    report.trajectory = decompose(s, d);
  } catch (const UnsupportedSql& e) {
    report.reason = e.what();
    return report;
  } catch (const SchemaMismatch& e) {
    report.reason = std::string("schema mismatch: ") + e.what();
    return report;
  }
  report.canonical_original = canonicalize(s, &d);
  try {
    report.reverted = revert(*report.trajectory, d, s.dialect);
  } catch (const Error& e) {
    report.verdict = Verdict::CanonicalMismatch;
    report.reason = e.code() + ": " + e.what();
    return report;
  }
  report.canonical_reverted = canonicalize(*report.reverted, &d);
  if (report.canonical_original == report.canonical_reverted) {
    report.verdict = Verdict::Pass;
  } else {
    report.verdict = Verdict::CanonicalMismatch;
    report.diff = token_diff(report.canonical_original, report.canonical_reverted);
  }
  return report;
}

RoundTripReport round_trip(std::string_view sql, const DatabaseInput& d, Dialect dialect) {
  try {
    return round_trip(parse_sql(sql, dialect), d);
  } catch (const SyntaxError& e) {
    RoundTripReport report;
    report.original.text = std::string(sql);
    report.original.dialect = dialect;
    report.reason = std::string("syntax error: ") + e.what();
    return report;
  } catch (const UnsupportedSql& e) {
    RoundTripReport report;
    report.original.text = std::string(sql);
    report.original.dialect = dialect;
    report.reason = e.what();
    return report;
  }
}

}  // namespace trajsql::sql
