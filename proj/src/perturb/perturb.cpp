// SPDX-License-Identifier: Apache-2.0
#include "trajsql/perturb/perturb.h"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/action/walk.h"
#include "trajsql/core/error.h"

namespace trajsql {

std::string_view perturbation_kind_name(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::Add: return "ADD";
    case PerturbationKind::Delete: return "DELETE";
    case PerturbationKind::Substitute: return "SUBSTITUTE";
  }
  return "ADD";
}

std::optional<PerturbationKind> perturbation_kind_from_name(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "ADD") return PerturbationKind::Add;
  if (upper == "DELETE") return PerturbationKind::Delete;
  if (upper == "SUBSTITUTE") return PerturbationKind::Substitute;
  return std::nullopt;
}

void PerturbationConfig::check() const {
  if (k < 0) throw std::invalid_argument("K must be nonnegative");
  if (max_attempts < 1) throw std::invalid_argument("max attempts must be at least 1");
  double sum = 0;
  for (double w : weights) {
    if (w < 0 || !std::isfinite(w)) throw std::invalid_argument("kind weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("kind weights must sum to 1");
}

std::size_t identity_count(std::size_t n, Ratio ratio) {
  if (ratio.positives == 0) return 0;
  return n * ratio.identities / ratio.positives;
}

namespace {

constexpr std::string_view kInserted = "inserted_step";

bool selects(const TrajectoryStep& s) {
  for (const auto& a : s.chain) {
    if (a.kind() == ActionKind::Select) return true;
  }
  return false;
}

bool is_set_op(const TrajectoryStep& s) { return s.chain.front().as<SetOpAction>() != nullptr; }

std::vector<QualifiedColumn> schema_columns(const Trajectory& t, const DatabaseInput& d) {
  std::vector<QualifiedColumn> out;
  for (const auto& name : t.source_tables()) {
    const TableDef* table = d.find_table(name);
    if (!table) continue;
    for (const auto& c : table->columns) out.push_back({table->name, c.name});
  }
  return out;
}

// Terminal select reached from step `i` through receiver links.
const SelectAction* lineage_select(const std::vector<TrajectoryStep>& steps, std::size_t i) {
  for (std::size_t k = i; k < steps.size();) {
    for (const auto& a : steps[k].chain) {
      if (const auto* s = a.as<SelectAction>()) return s;
    }
    std::size_t next = steps.size();
    for (std::size_t m = k + 1; m < steps.size(); ++m) {
      if (steps[m].receiver == steps[k].binding) {
        next = m;
        break;
      }
    }
    k = next;
  }
  return nullptr;
}

struct Draw {
  std::vector<TrajectoryStep> steps;
  PerturbationRecord record;
};

std::optional<Draw> draw_add(const Trajectory& t, Rng& rng, const DatabaseInput& d) {
  const auto& steps = t.steps();
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (is_set_op(steps[i])) continue;
    const TrajectoryStep* recv = t.find(steps[i].receiver);
    if (recv && selects(*recv)) continue;
    sites.push_back(i);
  }
  if (sites.empty()) return std::nullopt;
  const std::size_t site = sites[rng.below(sites.size())];
  const auto columns = schema_columns(t, d);

  std::optional<Action> action;
  std::string rule;
  switch (rng.below(4)) {
    case 0:
      if (columns.empty()) return std::nullopt;
      action = Action{GroupByAction{{Expression{ColumnExpr{columns[rng.below(columns.size())]}}}}};
      rule = "groupby";
      break;
    case 1: {
      std::vector<const WhereAction*> wheres;
      for (const auto& s : steps) {
        for (const auto& a : s.chain) {
          if (const auto* w = a.as<WhereAction>()) wheres.push_back(w);
        }
      }
      if (wheres.empty()) return std::nullopt;
      action = Action{*wheres[rng.below(wheres.size())]};
      rule = "duplicate-where";
      break;
    }
    case 2: {
      const SelectAction* sel = lineage_select(steps, site);
      if (!sel) return std::nullopt;
      std::vector<Expression> plain;
      for (const auto& e : sel->elements)
        if (!e.as<AggregateExpr>()) plain.push_back(e);
      if (plain.empty()) return std::nullopt;
      action = Action{DistinctAction{std::move(plain)}};
      rule = "distinct";
      break;
    }
    default:
      if (columns.empty()) return std::nullopt;
      action = Action{OrderByAction{Expression{ColumnExpr{columns[rng.below(columns.size())]}},
                                    rng.below(2) ? SortOrder::Desc : SortOrder::Asc}};
      rule = "orderby";
      break;
  }

  Draw out;
  out.steps = steps;
  const std::string inserted(kInserted);
  out.steps.insert(out.steps.begin() + static_cast<std::ptrdiff_t>(site),
                   TrajectoryStep{inserted, out.steps[site].receiver, {*action}});
  out.steps[site + 1].receiver = inserted;
  out.record.kind = PerturbationKind::Add;
  out.record.step = site;
  out.record.action = 0;
  out.record.after = action;
  out.record.rule = rule;
  return out;
}

void rewire(std::vector<TrajectoryStep>& steps, const std::string& from, const std::string& to) {
  for (auto& s : steps) {
    if (s.receiver == from) s.receiver = to;
    for (auto& a : s.chain) {
      if (auto* op = a.as<SetOpAction>(); op && op->other == from) op->other = to;
    }
  }
  visit_all_expressions(steps, [&](Expression& e) {
    if (auto* sub = e.as<SubqueryExpr>(); sub && sub->binding == from) sub->binding = to;
  });
}

struct Site {
  std::size_t step;
  std::size_t action;
};

std::vector<Site> delete_sites(const Trajectory& t) {
  std::vector<Site> out;
  const auto& steps = t.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (std::size_t j = 0; j < steps[i].chain.size(); ++j) {
      const Action& a = steps[i].chain[j];
      if (a.as<SetOpAction>()) continue;
      if (steps[i].binding == kResultBinding && a.as<SelectAction>()) continue;
      out.push_back({i, j});
    }
  }
  return out;
}

Draw apply_delete(const Trajectory& t, Site site) {
  Draw out;
  out.steps = t.steps();
  auto& step = out.steps[site.step];
  out.record.kind = PerturbationKind::Delete;
  out.record.step = site.step;
  out.record.action = site.action;
  out.record.before = step.chain[site.action];
  out.record.rule = std::string(action_kind_name(step.chain[site.action].kind()));
  if (step.chain.size() > 1) {
    step.chain.erase(step.chain.begin() + static_cast<std::ptrdiff_t>(site.action));
    return out;
  }
  const std::string binding = step.binding;
  const std::string receiver = step.receiver;
  out.steps.erase(out.steps.begin() + static_cast<std::ptrdiff_t>(site.step));
  rewire(out.steps, binding, receiver);
  return out;
}

struct Mutation {
  Site site;
  std::string rule;
  std::function<std::optional<Action>(Rng&)> apply;
};

std::optional<Comparator> flip(Comparator c) {
  switch (c) {
    case Comparator::Eq: return Comparator::Ne;
    case Comparator::Ne: return Comparator::Eq;
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Ge: return Comparator::Lt;
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Le: return Comparator::Gt;
    case Comparator::In: return Comparator::NotIn;
    case Comparator::NotIn: return Comparator::In;
    case Comparator::IsNull: return Comparator::IsNotNull;
    case Comparator::IsNotNull: return Comparator::IsNull;
    default: return std::nullopt;
  }
}

AggregateKind other_aggregate(AggregateKind k, Rng& rng) {
  static constexpr AggregateKind kAll[] = {AggregateKind::Sum, AggregateKind::Avg, AggregateKind::Count,
                                           AggregateKind::Min, AggregateKind::Max};
  std::vector<AggregateKind> others;
  for (auto x : kAll) {
    if (x != k) others.push_back(x);
  }
  return others[rng.below(others.size())];
}

// The n-th node (pre-order over the action's expressions) satisfying `pred`.
template <class Pred, class Fn>
void edit_nth(Action& a, std::size_t n, Pred pred, Fn fn) {
  std::size_t seen = 0;
  bool done = false;
  visit_action_expressions(a, [&](Expression& top) {
    if (done) return;
    visit_subexpressions(top, [&](Expression& e) {
      if (done || !pred(e)) return;
      if (seen++ == n) {
        fn(e);
        done = true;
      }
    });
  });
}

template <class Pred>
const Expression* nth_node(const Action& a, std::size_t n, Pred pred) {
  const Expression* found = nullptr;
  std::size_t seen = 0;
  visit_action_expressions(a, [&](const Expression& top) {
    visit_subexpressions(top, [&](const Expression& e) {
      if (!found && pred(e) && seen++ == n) found = &e;
    });
  });
  return found;
}

template <class Pred>
std::size_t count_nodes(const Action& a, Pred pred) {
  std::size_t n = 0;
  visit_action_expressions(a, [&](const Expression& top) {
    visit_subexpressions(top, [&](const Expression& e) {
      if (pred(e)) ++n;
    });
  });
  return n;
}

std::vector<Mutation> mutations(const Trajectory& t, const DatabaseInput& d) {
  std::vector<Mutation> out;
  const auto& steps = t.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (std::size_t j = 0; j < steps[i].chain.size(); ++j) {
      const Action a = steps[i].chain[j];
      const Site site{i, j};

      if (const auto* s = a.as<SelectAction>(); s && s->elements.size() >= 2) {
        const bool all_equal = std::all_of(s->elements.begin(), s->elements.end(),
                                           [&](const Expression& e) { return e == s->elements[0]; });
        if (!all_equal) {
          out.push_back({site, "select-reorder", [a](Rng& rng) -> std::optional<Action> {
                           Action b = a;
                           auto& el = b.as<SelectAction>()->elements;
                           while (b == a) rng.shuffle(el);
                           return b;
                         }});
        }
      }
      if (const auto* w = a.as<WhereAction>()) {
        out.push_back({site, "where-to-having", [c = w->condition](Rng&) { return std::optional<Action>{Action{HavingAction{c}}}; }});
      }
      if (const auto* h = a.as<HavingAction>()) {
        out.push_back({site, "having-to-where", [c = h->condition](Rng&) { return std::optional<Action>{Action{WhereAction{c}}}; }});
      }
      if (a.as<SetOpAction>()) {
        out.push_back({site, "set-op-swap", [a](Rng& rng) -> std::optional<Action> {
                         Action b = a;
                         auto& op = b.as<SetOpAction>()->op;
                         const SetOpKind others[2] = {op == SetOpKind::Union ? SetOpKind::Intersect : SetOpKind::Union,
                                                      op == SetOpKind::Except ? SetOpKind::Intersect : SetOpKind::Except};
                         op = others[rng.below(2)];
                         return b;
                       }});
      }
      const Condition* cond = nullptr;
      if (const auto* w = a.as<WhereAction>()) cond = &w->condition;
      if (const auto* h = a.as<HavingAction>()) cond = &h->condition;
      if (cond && !cond->compound() && flip(cond->filter.comparator)) {
        out.push_back({site, "comparator-flip", [a](Rng&) -> std::optional<Action> {
                         Action b = a;
                         Condition& c = b.as<WhereAction>() ? b.as<WhereAction>()->condition : b.as<HavingAction>()->condition;
                         c.filter.comparator = *flip(c.filter.comparator);
                         return b;
                       }});
      }
      if (const auto* o = a.as<OrderByAction>()) {
        out.push_back({site, "order-flip", [o = *o](Rng&) {
                         OrderByAction b = o;
                         b.order = b.order == SortOrder::Asc ? SortOrder::Desc : SortOrder::Asc;
                         return std::optional<Action>{Action{b}};
                       }});
      }
      if (const auto* l = a.as<LimitAction>()) {
        out.push_back({site, "literal-jitter", [l = *l](Rng& rng) {
                         LimitAction b = l;
                         b.count = b.count > 1 && rng.below(2) ? b.count - 1 : b.count + 1;
                         return std::optional<Action>{Action{b}};
                       }});
      }
      if (const auto* g = a.as<AggregateChainAction>(); g && !g->arg.as<StarExpr>()) {
        out.push_back({site, "aggregate-swap", [g = *g](Rng& rng) {
                         AggregateChainAction b = g;
                         b.kind = other_aggregate(b.kind, rng);
                         return std::optional<Action>{Action{b}};
                       }});
      }

      auto is_column = [](const Expression& e) { return e.as<ColumnExpr>() != nullptr; };
      const std::size_t n_columns = count_nodes(a, is_column);
      for (std::size_t n = 0; n < n_columns; ++n) {
        const Expression* node = nth_node(a, n, is_column);
        const TableDef* table = node ? d.find_table(node->as<ColumnExpr>()->ref.table) : nullptr;
        if (!table || table->columns.size() < 2) continue;
        out.push_back({site, "column-swap", [a, n, table, is_column](Rng& rng) -> std::optional<Action> {
                         Action b = a;
                         edit_nth(b, n, is_column, [&](Expression& e) {
                           auto& r = e.as<ColumnExpr>()->ref;
                           std::vector<std::string> others;
                           for (const auto& c : table->columns) {
                             if (!iequals(c.name, r.column)) others.push_back(c.name);
                           }
                           r.column = others[rng.below(others.size())];
                         });
                         return b;
                       }});
      }

      auto is_int = [](const Expression& e) {
        const auto* l = e.as<Literal>();
        return l && l->kind == LiteralKind::Integer;
      };
      const std::size_t n_ints = count_nodes(a, is_int);
      for (std::size_t n = 0; n < n_ints; ++n) {
        out.push_back({site, "literal-jitter", [a, n, is_int](Rng& rng) -> std::optional<Action> {
                         Action b = a;
                         edit_nth(b, n, is_int, [&](Expression& e) {
                           auto& lit = *e.as<Literal>();
                           const std::int64_t v = std::stoll(lit.text);
                           const std::int64_t choices[3] = {v + 1, v - 1, v * 10};
                           std::int64_t w = choices[rng.below(v == 0 ? 2 : 3)];
                           lit.text = std::to_string(w);
                         });
                         return b;
                       }});
      }

      auto is_agg = [](const Expression& e) {
        const auto* g = e.as<AggregateExpr>();
        return g && !g->arg->as<StarExpr>();
      };
      const std::size_t n_aggs = count_nodes(a, is_agg);
      for (std::size_t n = 0; n < n_aggs; ++n) {
        out.push_back({site, "aggregate-swap", [a, n, is_agg](Rng& rng) -> std::optional<Action> {
                         Action b = a;
                         edit_nth(b, n, is_agg, [&](Expression& e) {
                           auto& g = *e.as<AggregateExpr>();
                           g.kind = other_aggregate(g.kind, rng);
                         });
                         return b;
                       }});
      }
    }
  }
  return out;
}

std::optional<Draw> draw_substitute(const Trajectory& t, Rng& rng, const DatabaseInput& d) {
  const auto pool = mutations(t, d);
  if (pool.empty()) return std::nullopt;
  const Mutation& m = pool[rng.below(pool.size())];
  const std::optional<Action> after = m.apply(rng);
  const Action& before = t.steps()[m.site.step].chain[m.site.action];
  if (!after || *after == before) return std::nullopt;
  Draw out;
  out.steps = t.steps();
  out.steps[m.site.step].chain[m.site.action] = *after;
  out.record.kind = PerturbationKind::Substitute;
  out.record.step = m.site.step;
  out.record.action = m.site.action;
  out.record.before = before;
  out.record.after = after;
  out.record.rule = m.rule;
  return out;
}

}  // namespace

Perturbed perturb_once(const Trajectory& t, PerturbationKind kind, Rng& rng, const DatabaseInput& d, int max_attempts) {
  if (kind == PerturbationKind::Delete && t.action_count() < 2) {
    throw NoViablePerturbation("DELETE needs at least two actions");
  }
  const std::string original = render_trajectory(t);
  std::vector<Site> deletable;
  if (kind == PerturbationKind::Delete) deletable = delete_sites(t);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::optional<Draw> draw;
    switch (kind) {
      case PerturbationKind::Add: draw = draw_add(t, rng, d); break;
      case PerturbationKind::Delete:
        if (!deletable.empty()) draw = apply_delete(t, deletable[rng.below(deletable.size())]);
        break;
      case PerturbationKind::Substitute: draw = draw_substitute(t, rng, d); break;
    }
    if (!draw) continue;
    try {
      Trajectory out = renumber_bindings(Trajectory::make(std::move(draw->steps)));
      if (render_trajectory(out) == original) continue;
      draw->record.seed = rng.seed();
      return {std::move(out), std::move(draw->record)};
    } catch (const BindingError&) {
      continue;
    }
  }
  throw NoViablePerturbation(std::string(perturbation_kind_name(kind)) + ": no valid edit in " +
                             std::to_string(max_attempts) + " attempts");
}

AugmentReport augment_one(const Trajectory& verified, std::uint64_t index, const PerturbationConfig& cfg,
                          const DatabaseInput& d) {
  cfg.check();
  AugmentReport report;
  Rng rng = Rng::stream(cfg.seed, index);
  const std::vector<double> weights(cfg.weights.begin(), cfg.weights.end());
  std::vector<std::string> seen{render_trajectory(verified)};
  for (int k = 0; k < cfg.k; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
      const auto kind = static_cast<PerturbationKind>(rng.weighted(weights));
      try {
        Perturbed p = perturb_once(verified, kind, rng, d, cfg.max_attempts);
        std::string text = render_trajectory(p.trajectory);
        if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
        seen.push_back(std::move(text));
        report.pairs.push_back({std::move(p.trajectory), verified, std::move(p.record)});
        placed = true;
      } catch (const NoViablePerturbation&) {
        continue;
      }
    }
    if (!placed) ++report.skipped;
  }
  return report;
}

AugmentReport augment(const std::vector<Trajectory>& verified, const PerturbationConfig& cfg, const DatabaseInput& d) {
  AugmentReport report;
  for (std::size_t i = 0; i < verified.size(); ++i) {
    AugmentReport one = augment_one(verified[i], i, cfg, d);
    for (auto& p : one.pairs) report.pairs.push_back(std::move(p));
    report.skipped += one.skipped;
  }
  return report;
}

}  // namespace trajsql
