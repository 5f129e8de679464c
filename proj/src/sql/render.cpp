// SPDX-License-Identifier: Apache-2.0
#include "trajsql/sql/render.h"

#include <algorithm>
#include <functional>
#include <map>

#include "trajsql/sql/parser.h"

namespace trajsql::sql {

namespace {

// ---------------------------------------------------------------------------
// Rendering

int precedence(const SqlExpr& e) {
  if (const auto* b = e.as<SqlBinary>()) {
    switch (b->op) {
      case BinaryOp::Or: return 1;
      case BinaryOp::And: return 2;
      case BinaryOp::Eq:
      case BinaryOp::Ne:
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
      case BinaryOp::Like: return 4;
      case BinaryOp::Add:
      case BinaryOp::Sub: return 5;
      case BinaryOp::Mul:
      case BinaryOp::Div:
      case BinaryOp::Mod: return 6;
      case BinaryOp::Concat: return 7;
    }
  }
  if (const auto* u = e.as<SqlUnary>()) return u->op == UnaryOp::Not ? 3 : 8;
  if (e.as<SqlBetween>() || e.as<SqlIn>() || e.as<SqlIsNull>() || e.as<SqlNotLike>()) return 4;
  return 9;
}

std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

class Writer {
 public:
  explicit Writer(Dialect dialect) : dialect_(dialect) {}

  std::string ident(const std::string& name) const {
    if (is_simple_identifier(name) && !is_sql_keyword(name)) return name;
    const char q = dialect_ == Dialect::PostgreSQL ? '"' : '`';
    std::string out(1, q);
    for (char c : name) {
      out += c;
      if (c == q) out += q;
    }
    return out + q;
  }

  std::string wrap(const SqlExpr& e, bool parens) const {
    const std::string s = expr(e);
    return parens ? "(" + s + ")" : s;
  }

  std::string expr(const SqlExpr& e) const {
    return std::visit(
        Overloaded{
            [&](const SqlColumn& c) {
              std::string col;
              if (c.double_quoted && dialect_ != Dialect::MySQL) {
                col = "\"" + c.column + "\"";
              } else {
                col = ident(c.column);
              }
              return c.table.empty() ? col : ident(c.table) + "." + col;
            },
            [&](const SqlLiteral& l) {
              return l.value.is_numeric() ? l.value.text : quote_string(l.value.text);
            },
            [](const SqlNull&) { return std::string("NULL"); },
            [&](const SqlStar& s) { return s.table.empty() ? std::string("*") : ident(s.table) + ".*"; },
            [&](const SqlCall& c) {
              std::string out = c.name + "(";
              if (c.distinct) out += "DISTINCT ";
              for (std::size_t i = 0; i < c.args.size(); ++i) {
                if (i) out += ", ";
                out += expr(c.args[i]);
              }
              return out + ")";
            },
            [&](const SqlCast& c) { return "CAST(" + expr(*c.arg) + " AS " + c.type + ")"; },
            [&](const SqlBinary& b) {
              const int p = precedence(e);
              return wrap(*b.lhs, precedence(*b.lhs) < p) + " " + std::string(binary_op_sql(b.op)) +
                     " " + wrap(*b.rhs, precedence(*b.rhs) <= p);
            },
            [&](const SqlUnary& u) {
              if (u.op == UnaryOp::Not) {
                return "NOT " + wrap(*u.arg, precedence(*u.arg) < 3 || u.arg->as<SqlExists>());
              }
              const bool parens = precedence(*u.arg) < 8 || u.arg->as<SqlLiteral>() || u.arg->as<SqlUnary>();
              return "-" + wrap(*u.arg, parens);
            },
            [&](const SqlBetween& b) {
              return wrap(*b.arg, precedence(*b.arg) < 5) + (b.negated ? " NOT BETWEEN " : " BETWEEN ") +
                     wrap(*b.low, precedence(*b.low) < 5) + " AND " + wrap(*b.high, precedence(*b.high) < 5);
            },
            [&](const SqlIn& in) {
              std::string out = wrap(*in.arg, precedence(*in.arg) < 5) + (in.negated ? " NOT IN (" : " IN (");
              if (in.subquery) {
                out += select(**in.subquery);
              } else {
                for (std::size_t i = 0; i < in.list.size(); ++i) {
                  if (i) out += ", ";
                  out += expr(in.list[i]);
                }
              }
              return out + ")";
            },
            [&](const SqlIsNull& n) {
              return wrap(*n.arg, precedence(*n.arg) < 5) + (n.negated ? " IS NOT NULL" : " IS NULL");
            },
            [&](const SqlNotLike& n) {
              return wrap(*n.arg, precedence(*n.arg) < 5) + " NOT LIKE " + wrap(*n.pattern, precedence(*n.pattern) < 5);
            },
            [&](const SqlSubquery& s) { return "(" + select(*s.query) + ")"; },
            [&](const SqlExists& x) { return std::string(x.negated ? "NOT EXISTS (" : "EXISTS (") + select(*x.query) + ")"; },
            [&](const SqlCase& c) {
              std::string out = "CASE";
              if (c.operand) out += " " + expr(**c.operand);
              for (const auto& w : c.whens) out += " WHEN " + expr(w.condition) + " THEN " + expr(w.result);
              if (c.otherwise) out += " ELSE " + expr(**c.otherwise);
              return out + " END";
            },
        },
        e.node);
  }

  std::string table(const TableRef& t) const {
    std::string out = ident(t.name);
    if (!t.alias.empty()) out += " AS " + ident(t.alias);
    return out;
  }

  std::string core(const SelectCore& c) const {
    std::string out = "SELECT ";
    if (c.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < c.items.size(); ++i) {
      if (i) out += ", ";
      out += expr(c.items[i].expr);
      if (!c.items[i].alias.empty()) out += " AS " + ident(c.items[i].alias);
    }
    if (c.from) {
      out += " FROM " + table(*c.from);
      for (const auto& j : c.joins) {
        switch (j.type) {
          case JoinType::Comma: out += ", "; break;
          case JoinType::Inner: out += " INNER JOIN "; break;
          case JoinType::Left: out += " LEFT JOIN "; break;
          case JoinType::Right: out += " RIGHT JOIN "; break;
          case JoinType::Full: out += " FULL JOIN "; break;
          case JoinType::Cross: out += " CROSS JOIN "; break;
        }
        out += table(j.table);
        if (j.on) out += " ON " + expr(*j.on);
      }
    }
    if (c.where) out += " WHERE " + expr(*c.where);
    if (!c.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < c.group_by.size(); ++i) {
        if (i) out += ", ";
        out += expr(c.group_by[i]);
      }
    }
    if (c.having) out += " HAVING " + expr(*c.having);
    return out;
  }

  std::string select(const Select& s) const {
    std::string out = core(s.core);
    for (const auto& c : s.compounds) out += " " + std::string(set_op_sql(c.op)) + " " + core(c.core);
    if (!s.order_by.empty()) {
      out += " ORDER BY ";
      for (std::size_t i = 0; i < s.order_by.size(); ++i) {
        if (i) out += ", ";
        out += expr(s.order_by[i].expr);
        if (s.order_by[i].desc) out += " DESC";
      }
    }
    if (s.limit) {
      if (dialect_ == Dialect::MySQL && s.offset) {
        out += " LIMIT " + std::to_string(*s.offset) + ", " + std::to_string(*s.limit);
      } else {
        out += " LIMIT " + std::to_string(*s.limit);
        if (s.offset) out += " OFFSET " + std::to_string(*s.offset);
      }
    }
    return out;
  }

 private:
  Dialect dialect_;
};

// ---------------------------------------------------------------------------
// Canonical form

bool is_constant(const SqlExpr& e) { return e.as<SqlLiteral>() || e.as<SqlNull>(); }

BinaryOp flip(BinaryOp op) {
  switch (op) {
    case BinaryOp::Lt: return BinaryOp::Gt;
    case BinaryOp::Le: return BinaryOp::Ge;
    case BinaryOp::Gt: return BinaryOp::Lt;
    case BinaryOp::Ge: return BinaryOp::Le;
    default: return op;
  }
}

bool is_comparison(BinaryOp op) {
  return op == BinaryOp::Eq || op == BinaryOp::Ne || op == BinaryOp::Lt || op == BinaryOp::Le ||
         op == BinaryOp::Gt || op == BinaryOp::Ge;
}

std::string text_of(const SqlExpr& e) { return Writer(Dialect::SQLite).expr(e); }

void flatten(const SqlExpr& e, BinaryOp op, std::vector<SqlExpr>& out) {
  if (const auto* b = e.as<SqlBinary>(); b && b->op == op) {
    flatten(*b->lhs, op, out);
    flatten(*b->rhs, op, out);
    return;
  }
  out.push_back(e);
}

std::optional<SqlExpr> chain(std::vector<SqlExpr> terms, BinaryOp op) {
  if (terms.empty()) return std::nullopt;
  SqlExpr acc = std::move(terms[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = make_binary(op, std::move(acc), std::move(terms[i]));
  return acc;
}

struct ScopeTable {
  std::string name;   // resolved spelling
  std::string alias;  // as written
};

struct Scope {
  std::vector<ScopeTable> tables;
  const Scope* parent = nullptr;
  bool keep_aliases = false;  // self-joins need their aliases
};

class Canonicalizer {
 public:
  explicit Canonicalizer(const DatabaseInput* d) : d_(d) {}

  Select select(const Select& in, const Scope* parent) {
    Select s = in;
    const Scope main = scope_for(s.core, parent);
    // ORDER BY binds to the first core's select list.
    if (s.compounds.empty()) {
      for (auto& item : s.order_by) {
        if (const auto* lit = item.expr.as<SqlLiteral>(); lit && lit->value.kind == LiteralKind::Integer) {
          const auto k = std::stoll(lit->value.text);
          if (k >= 1 && static_cast<std::size_t>(k) <= s.core.items.size()) item.expr = s.core.items[k - 1].expr;
        }
        substitute_aliases(item.expr, s.core, main, /*prefer_alias=*/true);
      }
    }
    for (auto& item : s.order_by) {
      resolve(item.expr, main);
      if (s.compounds.empty()) count_star(item.expr, s.core, main);
      normalize(item.expr);
    }
    s.core = core(s.core, main);
    for (auto& c : s.compounds) c.core = core(c.core, scope_for(c.core, parent));
    return s;
  }

 private:
  Scope scope_for(const SelectCore& c, const Scope* parent) const {
    Scope scope;
    scope.parent = parent;
    auto add = [&](const TableRef& t) {
      std::string name = t.name;
      if (d_) {
        if (const TableDef* def = d_->find_table(t.name)) name = def->name;
      }
      for (const auto& existing : scope.tables) {
        if (iequals(existing.name, name)) scope.keep_aliases = true;
      }
      scope.tables.push_back({name, t.alias});
    };
    if (c.from) add(*c.from);
    for (const auto& j : c.joins) add(j.table);
    return scope;
  }

  SelectCore core(SelectCore c, const Scope& scope) {
    if (c.having) substitute_aliases(*c.having, c, scope, d_ == nullptr);
    if (d_) {
      if (c.where) substitute_aliases(*c.where, c, scope, false);
      for (auto& g : c.group_by) substitute_aliases(g, c, scope, false);
    }
    for (auto& item : c.items) {
      resolve(item.expr, scope);
      item.alias.clear();
    }
    if (c.where) resolve(*c.where, scope);
    for (auto& g : c.group_by) resolve(g, scope);
    if (c.having) resolve(*c.having, scope);
    for (auto& j : c.joins) {
      if (j.on) resolve(*j.on, scope);
    }

    for (auto& g : c.group_by) normalize(g);
    for (auto& item : c.items) {
      count_star(item.expr, c, scope);
      normalize(item.expr);
    }
    if (c.having) {
      count_star(*c.having, c, scope);
    }

    const bool inner_only = std::all_of(c.joins.begin(), c.joins.end(), [](const Join& j) {
      return j.type == JoinType::Inner || j.type == JoinType::Comma || j.type == JoinType::Cross;
    });
    std::vector<SqlExpr> conjuncts;
    if (c.where) flatten(*c.where, BinaryOp::And, conjuncts);
    if (c.from) {
      if (!scope.keep_aliases) {
        c.from->name = scope.tables[0].name;
        c.from->alias.clear();
        for (std::size_t i = 0; i < c.joins.size(); ++i) {
          c.joins[i].table.name = scope.tables[i + 1].name;
          c.joins[i].table.alias.clear();
        }
      }
      if (inner_only && !scope.keep_aliases) {
        std::vector<TableRef> tables{*c.from};
        for (auto& j : c.joins) {
          tables.push_back(j.table);
          if (j.on) flatten(*j.on, BinaryOp::And, conjuncts);
        }
        std::sort(tables.begin(), tables.end(),
                  [](const TableRef& a, const TableRef& b) { return a.name < b.name; });
        c.from = tables[0];
        c.joins.clear();
        for (std::size_t i = 1; i < tables.size(); ++i) c.joins.push_back({JoinType::Comma, tables[i], std::nullopt});
      } else {
        for (auto& j : c.joins) {
          if (j.on) j.on = sorted_chain(*j.on);
        }
      }
    }
    c.where = sorted(std::move(conjuncts));
    if (c.having) c.having = sorted_chain(*c.having);
    return c;
  }

  std::optional<SqlExpr> sorted(std::vector<SqlExpr> terms) {
    for (auto& t : terms) normalize(t);
    std::stable_sort(terms.begin(), terms.end(),
                     [](const SqlExpr& a, const SqlExpr& b) { return text_of(a) < text_of(b); });
    return chain(std::move(terms), BinaryOp::And);
  }

  SqlExpr sorted_chain(const SqlExpr& e) {
    std::vector<SqlExpr> terms;
    flatten(e, BinaryOp::And, terms);
    return *sorted(std::move(terms));
  }

  // Orients comparisons, sorts OR terms, canonical function spellings.
  void normalize(SqlExpr& e) {
    visit_children(e, [&](SqlExpr& child) { normalize(child); });
    if (auto* call = e.as<SqlCall>()) {
      if (call->name == "SUBSTRING") call->name = "SUBSTR";
      return;
    }
    auto* b = e.as<SqlBinary>();
    if (!b) return;
    if (b->op == BinaryOp::Or || b->op == BinaryOp::And) {
      std::vector<SqlExpr> terms;
      const BinaryOp op = b->op;
      flatten(e, op, terms);
      std::stable_sort(terms.begin(), terms.end(),
                       [](const SqlExpr& x, const SqlExpr& y) { return text_of(x) < text_of(y); });
      e = *chain(std::move(terms), op);
      return;
    }
    if (!is_comparison(b->op)) return;
    const bool lhs_const = is_constant(*b->lhs);
    const bool rhs_const = is_constant(*b->rhs);
    bool swap = false;
    if (lhs_const && !rhs_const) {
      swap = true;
    } else if (lhs_const == rhs_const && text_of(*b->lhs) > text_of(*b->rhs)) {
      swap = true;
    }
    if (swap) {
      std::swap(b->lhs, b->rhs);
      b->op = flip(b->op);
    }
  }

  static void visit_children(SqlExpr& e, const std::function<void(SqlExpr&)>& fn) {
    std::visit(Overloaded{
                   [&](SqlCall& c) {
                     for (auto& a : c.args) fn(a);
                   },
                   [&](SqlCast& c) { fn(*c.arg); },
                   [&](SqlBinary& b) {
                     fn(*b.lhs);
                     fn(*b.rhs);
                   },
                   [&](SqlUnary& u) { fn(*u.arg); },
                   [&](SqlBetween& b) {
                     fn(*b.arg);
                     fn(*b.low);
                     fn(*b.high);
                   },
                   [&](SqlIn& in) {
                     fn(*in.arg);
                     for (auto& x : in.list) fn(x);
                   },
                   [&](SqlIsNull& n) { fn(*n.arg); },
                   [&](SqlNotLike& n) {
                     fn(*n.arg);
                     fn(*n.pattern);
                   },
                   [&](SqlCase& c) {
                     if (c.operand) fn(**c.operand);
                     for (auto& w : c.whens) {
                       fn(w.condition);
                       fn(w.result);
                     }
                     if (c.otherwise) fn(**c.otherwise);
                   },
                   [](auto&) {},
               },
               e.node);
  }

  // Unqualified names matching a select alias are replaced by the aliased
  // expression. Where a real column of that name exists the column wins
  // unless `prefer_alias`.
  void substitute_aliases(SqlExpr& e, const SelectCore& c, const Scope& scope, bool prefer_alias) {
    if (auto* col = e.as<SqlColumn>(); col && col->table.empty()) {
      for (const auto& item : c.items) {
        if (item.alias.empty() || !iequals(item.alias, col->column)) continue;
        if (!prefer_alias && resolves_in(scope, col->column)) continue;
        e = item.expr;
        return;
      }
      return;
    }
    if (e.as<SqlSubquery>() || e.as<SqlExists>()) return;
    visit_children(e, [&](SqlExpr& child) { substitute_aliases(child, c, scope, prefer_alias); });
  }

  bool resolves_in(const Scope& scope, const std::string& column) const {
    if (!d_) return false;
    for (const auto& t : scope.tables) {
      if (const TableDef* def = d_->find_table(t.name); def && def->find_column(column)) return true;
    }
    return false;
  }

  const ScopeTable* find_qualifier(const Scope& scope, const std::string& q) const {
    for (const auto& t : scope.tables) {
      if (!t.alias.empty() && iequals(t.alias, q)) return &t;
    }
    for (const auto& t : scope.tables) {
      if (t.alias.empty() && iequals(t.name, q)) return &t;
    }
    for (const auto& t : scope.tables) {
      if (iequals(t.name, q)) return &t;
    }
    return nullptr;
  }

  void resolve(SqlExpr& e, const Scope& scope) {
    if (auto* col = e.as<SqlColumn>()) {
      resolve_column(e, scope);
      (void)col;
      return;
    }
    if (auto* sub = e.as<SqlSubquery>()) {
      *sub->query = select(*sub->query, &scope);
      return;
    }
    if (auto* x = e.as<SqlExists>()) {
      *x->query = select(*x->query, &scope);
      return;
    }
    if (auto* in = e.as<SqlIn>(); in && in->subquery) {
      resolve(*in->arg, scope);
      **in->subquery = select(**in->subquery, &scope);
      return;
    }
    if (auto* s = e.as<SqlStar>(); s && !s->table.empty()) {
      if (const ScopeTable* t = find_qualifier(scope, s->table); t && !scope.keep_aliases) s->table = t->name;
      return;
    }
    visit_children(e, [&](SqlExpr& child) { resolve(child, scope); });
  }

  void resolve_column(SqlExpr& e, const Scope& scope) {
    SqlColumn& col = *e.as<SqlColumn>();
    auto spell = [&](const std::string& table) {
      if (!d_) return;
      if (const TableDef* def = d_->find_table(table)) {
        if (const ColumnDef* c = def->find_column(col.column)) col.column = c->name;
      }
    };
    if (!col.table.empty()) {
      for (const Scope* s = &scope; s; s = s->parent) {
        if (const ScopeTable* t = find_qualifier(*s, col.table)) {
          if (!s->keep_aliases) col.table = t->name;
          spell(t->name);
          col.double_quoted = false;
          return;
        }
      }
      return;
    }
    for (const Scope* s = &scope; s; s = s->parent) {
      if (d_) {
        std::vector<const ScopeTable*> hits;
        for (const auto& t : s->tables) {
          if (const TableDef* def = d_->find_table(t.name); def && def->find_column(col.column)) hits.push_back(&t);
        }
        if (hits.size() == 1) {
          col.table = s->keep_aliases && !hits[0]->alias.empty() ? hits[0]->alias : hits[0]->name;
          spell(hits[0]->name);
          col.double_quoted = false;
          return;
        }
        if (hits.size() > 1) return;
      } else if (s->tables.size() == 1 && s == &scope) {
        col.table = s->keep_aliases && !s->tables[0].alias.empty() ? s->tables[0].alias : s->tables[0].name;
        col.double_quoted = false;
        return;
      }
    }
    if (col.double_quoted && d_) {
      e = make_literal(Literal::string(col.column));
      return;
    }
    col.double_quoted = false;
  }

  // COUNT(*) counts the first group-by expression when grouped, else the
  // primary key of the first FROM table.
  void count_star(SqlExpr& e, const SelectCore& c, const Scope& scope) {
    if (auto* call = e.as<SqlCall>(); call && call->name == "COUNT" && call->args.size() == 1 &&
                                      call->args[0].as<SqlStar>() && call->args[0].as<SqlStar>()->table.empty() &&
                                      !call->distinct) {
      if (auto target = count_target(c, scope)) call->args[0] = *target;
      return;
    }
    if (e.as<SqlSubquery>() || e.as<SqlExists>()) return;
    if (auto* in = e.as<SqlIn>(); in && in->subquery) {
      count_star(*in->arg, c, scope);
      return;
    }
    visit_children(e, [&](SqlExpr& child) { count_star(child, c, scope); });
  }

  std::optional<SqlExpr> count_target(const SelectCore& c, const Scope& scope) {
    if (!c.group_by.empty()) {
      SqlExpr g = c.group_by[0];
      resolve(g, scope);
      return g;
    }
    if (!d_ || scope.tables.empty() || scope.keep_aliases) return std::nullopt;
    const TableDef* def = d_->find_table(scope.tables[0].name);
    if (!def || !def->primary_key()) return std::nullopt;
    return make_column(def->name, def->primary_key()->name);
  }

  const DatabaseInput* d_;
};

}  // namespace

std::string render_sql(const Select& s, Dialect dialect) { return Writer(dialect).select(s); }

std::string render_sql_expression(const SqlExpr& e, Dialect dialect) { return Writer(dialect).expr(e); }

Select canonical_ast(const Select& s, const DatabaseInput* d) { return Canonicalizer(d).select(s, nullptr); }

std::string canonicalize(const Select& s, const DatabaseInput* d) {
  return Writer(Dialect::SQLite).select(canonical_ast(s, d));
}

std::string canonicalize(const SqlQuery& s, const DatabaseInput* d) { return canonicalize(s.ast, d); }

}  // namespace trajsql::sql
