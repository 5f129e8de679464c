// SPDX-License-Identifier: Apache-2.0
#include "trajsql/schema/schema_list.h"

#include <algorithm>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/box.h"
#include "trajsql/core/error.h"

namespace trajsql {

bool SchemaList::has_table(std::string_view table) const {
  return std::find(tables.begin(), tables.end(), table) != tables.end();
}

bool SchemaList::has_column(const QualifiedColumn& c) const {
  return std::find(columns.begin(), columns.end(), c) != columns.end();
}

namespace {

using namespace sql;

struct Scope {
  struct Entry {
    std::string name;  // schema spelling when known
    std::string alias;
    const TableDef* def;
  };
  std::vector<Entry> tables;
  const Scope* parent = nullptr;
};

class Extractor {
 public:
  explicit Extractor(const DatabaseInput* d) : d_(d) {}

  SchemaList run(const Select& s) {
    select(s, nullptr);
    return std::move(out_);
  }

 private:
  void table(const std::string& name) {
    if (!out_.has_table(name)) out_.tables.push_back(name);
  }

  void column(const std::string& table, const std::string& name) {
    std::string spelled = name;
    if (d_ && table != kUnresolvedTable) {
      if (const TableDef* t = d_->find_table(table)) {
        if (const ColumnDef* c = t->find_column(name)) spelled = c->name;
      }
    }
    QualifiedColumn qc{table, spelled};
    if (!out_.has_column(qc)) out_.columns.push_back(std::move(qc));
  }

  Scope scope_of(const SelectCore& c, const Scope* parent) const {
    Scope scope;
    scope.parent = parent;
    auto add = [&](const TableRef& ref) {
      const TableDef* def = d_ ? d_->find_table(ref.name) : nullptr;
      scope.tables.push_back({def ? def->name : ref.name, ref.alias, def});
    };
    if (c.from) add(*c.from);
    for (const auto& j : c.joins) add(j.table);
    return scope;
  }

  static const Scope::Entry* qualifier(const Scope* scope, const std::string& q) {
    for (; scope; scope = scope->parent) {
      for (const auto& t : scope->tables) {
        if (!t.alias.empty() && iequals(t.alias, q)) return &t;
      }
      for (const auto& t : scope->tables) {
        if (iequals(t.name, q)) return &t;
      }
    }
    return nullptr;
  }

  bool in_schema(const Scope& scope, const std::string& name) const {
    for (const Scope* s = &scope; s; s = s->parent) {
      for (const auto& t : s->tables) {
        if (t.def && t.def->find_column(name)) return true;
      }
    }
    return false;
  }

  void unqualified(const SqlColumn& c, const Scope& scope) {
    if (d_) {
      for (const Scope* s = &scope; s; s = s->parent) {
        std::vector<const Scope::Entry*> hits;
        for (const auto& t : s->tables) {
          if (t.def && t.def->find_column(c.column)) hits.push_back(&t);
        }
        if (hits.size() > 1) throw AmbiguousColumn("column `" + c.column + "` exists in more than one FROM table");
        if (hits.size() == 1) {
          column(hits[0]->name, c.column);
          return;
        }
      }
      if (c.double_quoted) return;
    }
    if (scope.tables.size() == 1) {
      column(scope.tables[0].name, c.column);
    } else {
      column(std::string(kUnresolvedTable), c.column);
    }
  }

  enum class Clause { Items, Where, Group, Having, Order, On };

  bool is_alias(const SqlColumn& c, const Scope& scope, Clause clause) const {
    if (!c.table.empty() || !items_) return false;
    const bool named = std::any_of(items_->begin(), items_->end(), [&](const SelectItem& i) {
      return !i.alias.empty() && iequals(i.alias, c.column);
    });
    if (!named) return false;
    switch (clause) {
      case Clause::Order: return true;
      case Clause::Having: return !d_ || !in_schema(scope, c.column);
      case Clause::Where:
      case Clause::Group: return d_ && !in_schema(scope, c.column);
      default: return false;
    }
  }

  void expr(const SqlExpr& e, const Scope& scope, Clause clause) {
    std::visit(Overloaded{
                   [&](const SqlColumn& c) {
                     if (is_alias(c, scope, clause)) return;
                     if (c.table.empty()) {
                       unqualified(c, scope);
                     } else if (const Scope::Entry* t = qualifier(&scope, c.table)) {
                       column(t->name, c.column);
                     } else {
                       column(std::string(kUnresolvedTable), c.column);
                     }
                   },
                   [&](const SqlStar& s) {
                     if (s.table.empty()) return;
                     if (const Scope::Entry* t = qualifier(&scope, s.table)) table(t->name);
                   },
                   [&](const SqlCall& c) {
                     for (const auto& a : c.args) expr(a, scope, clause);
                   },
                   [&](const SqlCast& c) { expr(*c.arg, scope, clause); },
                   [&](const SqlBinary& b) {
                     expr(*b.lhs, scope, clause);
                     expr(*b.rhs, scope, clause);
                   },
                   [&](const SqlUnary& u) { expr(*u.arg, scope, clause); },
                   [&](const SqlBetween& b) {
                     expr(*b.arg, scope, clause);
                     expr(*b.low, scope, clause);
                     expr(*b.high, scope, clause);
                   },
                   [&](const SqlIn& in) {
                     expr(*in.arg, scope, clause);
                     for (const auto& x : in.list) expr(x, scope, clause);
                     if (in.subquery) select(**in.subquery, &scope);
                   },
                   [&](const SqlIsNull& n) { expr(*n.arg, scope, clause); },
                   [&](const SqlNotLike& n) {
                     expr(*n.arg, scope, clause);
                     expr(*n.pattern, scope, clause);
                   },
                   [&](const SqlSubquery& s) { select(*s.query, &scope); },
                   [&](const SqlExists& s) { select(*s.query, &scope); },
                   [&](const SqlCase& c) {
                     if (c.operand) expr(**c.operand, scope, clause);
                     for (const auto& w : c.whens) {
                       expr(w.condition, scope, clause);
                       expr(w.result, scope, clause);
                     }
                     if (c.otherwise) expr(**c.otherwise, scope, clause);
                   },
                   [](const auto&) {},
               },
               e.node);
  }

  void core(const SelectCore& c, const Scope* parent, const std::vector<OrderItem>* order) {
    const Scope scope = scope_of(c, parent);
    const auto* saved = items_;
    items_ = &c.items;
    for (const auto& i : c.items) expr(i.expr, scope, Clause::Items);
    for (const auto& t : scope.tables) table(t.name);
    for (const auto& j : c.joins) {
      if (j.on) expr(*j.on, scope, Clause::On);
    }
    if (c.where) expr(*c.where, scope, Clause::Where);
    for (const auto& g : c.group_by) expr(g, scope, Clause::Group);
    if (c.having) expr(*c.having, scope, Clause::Having);
    if (order) {
      for (const auto& o : *order) expr(o.expr, scope, Clause::Order);
    }
    items_ = saved;
  }

  void select(const Select& s, const Scope* parent) {
    core(s.core, parent, s.compounds.empty() ? &s.order_by : nullptr);
    for (const auto& c : s.compounds) core(c.core, parent, nullptr);
    if (!s.compounds.empty()) {
      // Compound ORDER BY names output columns of the first branch.
      const Scope scope = scope_of(s.core, parent);
      const auto* saved = items_;
      items_ = &s.core.items;
      for (const auto& o : s.order_by) expr(o.expr, scope, Clause::Order);
      items_ = saved;
    }
  }

  const DatabaseInput* d_;
  const std::vector<SelectItem>* items_ = nullptr;
  SchemaList out_;
};

}  // namespace

SchemaList extract_schema(const sql::SqlQuery& s, const DatabaseInput* d) { return Extractor(d).run(s.ast); }

std::string render_schema_list(const SchemaList& l) {
  std::string out = "tables:";
  for (std::size_t i = 0; i < l.tables.size(); ++i) out += (i ? ", " : " ") + l.tables[i];
  out += "\ncolumns:";
  for (std::size_t i = 0; i < l.columns.size(); ++i) {
    out += (i ? ", " : " ") + (l.columns[i].table == kUnresolvedTable ? "?." + l.columns[i].column
                                                                      : render_column(l.columns[i]));
  }
  return out + "\n";
}

}  // namespace trajsql
