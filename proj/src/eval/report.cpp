// SPDX-License-Identifier: Apache-2.0
#include "trajsql/eval/report.h"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/action/walk.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/schema_list.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {

std::string_view error_class_name(ErrorClass c) { return c == ErrorClass::Schema ? "schema" : "logic"; }

std::string_view error_subtype_name(ErrorSubtype s) {
  switch (s) {
    case ErrorSubtype::AttributeOveranalysis: return "AttributeOveranalysis";
    case ErrorSubtype::SchemaContradiction: return "SchemaContradiction";
    case ErrorSubtype::ClauseAbuse: return "ClauseAbuse";
    case ErrorSubtype::MathematicalDelusion: return "MathematicalDelusion";
    case ErrorSubtype::Other: return "Other";
  }
  return "?";
}

ErrorClass error_class_of(ErrorSubtype s) {
  return s == ErrorSubtype::AttributeOveranalysis || s == ErrorSubtype::SchemaContradiction ? ErrorClass::Schema
                                                                                         : ErrorClass::Logic;
}

std::string ErrorTag::str() const {
  return std::string(error_class_name(coarse)) + "/" + std::string(error_subtype_name(subtype));
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string key(const QualifiedColumn& c) { return lower(c.table) + "." + lower(c.column); }

std::set<std::string> column_set(const Trajectory& t) {
  std::set<std::string> out;
  for (const auto& c : referenced_columns(t)) out.insert(key(c));
  return out;
}

const SelectAction* final_select(const Trajectory& t) {
  if (t.steps().empty() || t.steps().back().chain.empty()) return nullptr;
  return t.steps().back().chain.back().as<SelectAction>();
}

std::set<std::string> select_columns(const SelectAction& s) {
  std::set<std::string> out;
  for (const auto& e : s.elements)
    visit_subexpressions(e, [&](const Expression& x) {
      if (const auto* c = x.as<ColumnExpr>()) out.insert(key(c->ref));
    });
  return out;
}

std::multiset<ActionKind> kinds(const Trajectory& t) {
  std::multiset<ActionKind> out;
  for (const auto& s : t.steps())
    for (const auto& a : s.chain) out.insert(a.kind());
  return out;
}

std::multiset<std::string> arithmetic(const Trajectory& t) {
  std::multiset<std::string> out;
  visit_all_expressions(t.steps(), [&](const Expression& e) {
    if (e.as<ArithmeticExpr>()) out.insert(render_expression(e));
  });
  return out;
}

}  // namespace

std::optional<ErrorTag> tag_error(const Trajectory& pred, const Trajectory& gold, const DatabaseInput& d) {
  if (render_trajectory(pred) == render_trajectory(gold)) return std::nullopt;
  for (const auto& c : referenced_columns(pred))
    if (!d.has_column(c)) return ErrorTag::of(ErrorSubtype::SchemaContradiction);
  const SelectAction* ps = final_select(pred);
  const SelectAction* gs = final_select(gold);
  if (ps && gs && ps->elements.size() > gs->elements.size()) {
    const auto pc = select_columns(*ps);
    const auto gc = select_columns(*gs);
    if (std::includes(pc.begin(), pc.end(), gc.begin(), gc.end()))
      return ErrorTag::of(ErrorSubtype::AttributeOveranalysis);
  }
  if (kinds(pred) != kinds(gold)) return ErrorTag::of(ErrorSubtype::ClauseAbuse);
  if (column_set(pred) != column_set(gold)) return ErrorTag::of(ErrorSubtype::SchemaContradiction);
  if (arithmetic(pred) != arithmetic(gold)) return ErrorTag::of(ErrorSubtype::MathematicalDelusion);
  return ErrorTag::of(ErrorSubtype::Other);
}

EvalReport summarize(std::vector<InstanceVerdict> instances) {
  EvalReport r;
  r.instances = std::move(instances);
  r.n = r.instances.size();
  std::size_t ex = 0, base = 0, rt = 0, tp = 0, fp = 0, fn = 0;
  for (const auto& v : r.instances) {
    ex += v.final_ex;
    base += v.initial_ex;
    rt += v.round_trip_pass;
    r.overcorrected += v.overcorrection;
    tp += v.schema_tp;
    fp += v.schema_fp;
    fn += v.schema_fn;
    if (v.difficulty) {
      auto& g = r.by_difficulty[*v.difficulty];
      ++g.n;
      g.correct += v.final_ex;
    }
    if (v.tag) ++r.tags[v.tag->str()];
  }
  auto frac = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  r.ex = frac(ex, r.n);
  r.baseline_ex = frac(base, r.n);
  r.overcorrection = frac(r.overcorrected, r.n);
  r.round_trip_pass = frac(rt, r.n);
  r.schema_precision = frac(tp, tp + fp);
  r.schema_recall = frac(tp, tp + fn);
  for (auto& [_, g] : r.by_difficulty) g.ex = frac(g.correct, g.n);
  return r;
}

namespace {

std::set<std::string> sql_columns(const std::string& text, const DatabaseInput& d) {
  std::set<std::string> out;
  try {
    const sql::SqlQuery q = sql::parse_sql(text);
    SchemaList l;
    try {
      l = extract_schema(q, &d);
    } catch (const AmbiguousColumn&) {
      l = extract_schema(q);
    }
    for (const auto& c : l.columns) out.insert(key(c));
  } catch (const Error&) {
  }
  return out;
}

std::optional<ErrorTag> tag_sql(const std::string& pred, const std::string& gold, const DatabaseInput& d) {
  Trajectory g;
  try {
    g = sql::decompose(sql::parse_sql(gold), d);
  } catch (const Error&) {
    return ErrorTag::of(ErrorSubtype::Other);
  }
  try {
    const auto tag = tag_error(sql::decompose(sql::parse_sql(pred), d, {true}), g, d);
    return tag ? tag : ErrorTag::of(ErrorSubtype::Other);
  } catch (const SchemaMismatch&) {
    return ErrorTag::of(ErrorSubtype::SchemaContradiction);
  } catch (const Error&) {
    return ErrorTag::of(ErrorSubtype::Other);
  }
}

}  // namespace

EvalReport evaluate_correction(const std::vector<CorrectionResult>& results, const std::vector<SeedExample>& golds,
                               DatabaseDirectory& dbs, const SchemaCatalog& schemas) {
  std::map<std::string, const SeedExample*> by_id;
  for (const auto& g : golds) by_id[g.id] = &g;
  std::set<std::string> seen;
  for (const auto& r : results) {
    if (!by_id.count(r.seed)) throw AlignmentError("result for seed '" + r.seed + "' has no gold");
    if (!seen.insert(r.seed).second) throw AlignmentError("duplicate result for seed '" + r.seed + "'");
  }
  if (seen.size() != by_id.size()) {
    for (const auto& [id, _] : by_id)
      if (!seen.count(id)) throw AlignmentError("no result for seed '" + id + "'");
  }

  std::vector<InstanceVerdict> out;
  for (const auto& r : results) {
    const SeedExample& g = *by_id.at(r.seed);
    const DatabaseInput& d = schemas.get(g.db);
    const auto db = dbs.get(g.db);
    InstanceVerdict v;
    v.seed = r.seed;
    v.difficulty = g.difficulty;
    if (r.regenerated_sql) {
      v.final_source = "regenerated";
      v.final_sql = *r.regenerated_sql;
    } else if (r.feedback && r.feedback->reverted_sql) {
      v.final_source = "reverted";
      v.final_sql = *r.feedback->reverted_sql;
    } else {
      v.final_source = "initial";
      v.final_sql = r.initial_sql;
    }
    v.initial_ex = ex_match(r.initial_sql, g.gold_sql, *db);
    v.final_ex = ex_match(v.final_sql, g.gold_sql, *db);
    v.overcorrection = v.initial_ex && !v.final_ex;
    v.round_trip_pass = r.round_trip_pass;
    if (!v.final_ex) v.tag = tag_sql(v.final_sql, g.gold_sql, d);
    const auto pc = sql_columns(v.final_sql, d);
    const auto gc = sql_columns(g.gold_sql, d);
    for (const auto& c : pc) (gc.count(c) ? v.schema_tp : v.schema_fp)++;
    for (const auto& c : gc) v.schema_fn += !pc.count(c);
    out.push_back(std::move(v));
  }
  return summarize(std::move(out));
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["ex"] = r.ex;
  j["baseline_ex"] = r.baseline_ex;
  j["overcorrection"] = r.overcorrection;
  j["overcorrected"] = r.overcorrected;
  j["round_trip_pass"] = r.round_trip_pass;
  j["schema_precision"] = r.schema_precision;
  j["schema_recall"] = r.schema_recall;
  j["by_difficulty"] = nlohmann::ordered_json::object();
  for (const auto& [k, g] : r.by_difficulty) j["by_difficulty"][k] = {{"n", g.n}, {"correct", g.correct}, {"ex", g.ex}};
  j["tags"] = nlohmann::ordered_json::object();
  for (const auto& [k, n] : r.tags) j["tags"][k] = n;
  j["instances"] = nlohmann::ordered_json::array();
  for (const auto& v : r.instances)
    j["instances"].push_back({{"seed", v.seed},
                              {"difficulty", v.difficulty ? nlohmann::ordered_json(*v.difficulty) : nlohmann::ordered_json(nullptr)},
                              {"final_source", v.final_source},
                              {"final_sql", v.final_sql},
                              {"initial_ex", v.initial_ex},
                              {"final_ex", v.final_ex},
                              {"overcorrection", v.overcorrection},
                              {"round_trip", v.round_trip_pass},
                              {"tag", v.tag ? nlohmann::ordered_json(v.tag->str()) : nlohmann::ordered_json(nullptr)},
                              {"schema", {{"tp", v.schema_tp}, {"fp", v.schema_fp}, {"fn", v.schema_fn}}}});
  return j;
}

std::string render_report(const EvalReport& r) {
  std::ostringstream os;
  auto pct = [](double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * x << "%";
    return s.str();
  };
  std::size_t w = 6;
  for (const auto& v : r.instances) w = std::max(w, v.seed.size() + 2);
  const int width = static_cast<int>(w);
  os << std::left << std::setw(width) << "seed" << std::setw(9) << "initial" << std::setw(7) << "final"
     << std::setw(6) << "over" << "tag\n";
  for (const auto& v : r.instances)
    os << std::setw(width) << v.seed << std::setw(9) << (v.initial_ex ? "ok" : "wrong") << std::setw(7)
       << (v.final_ex ? "ok" : "wrong") << std::setw(6) << (v.overcorrection ? "yes" : "") << (v.tag ? v.tag->str() : "")
       << "\n";
  os << "\nEX " << pct(r.ex) << " (baseline " << pct(r.baseline_ex) << ")\n";
  os << "overcorrection " << pct(r.overcorrection) << " (" << r.overcorrected << "/" << r.n << ")\n";
  os << "round trip " << pct(r.round_trip_pass) << "\n";
  os << "schema precision " << pct(r.schema_precision) << ", recall " << pct(r.schema_recall) << "\n";
  for (const auto& [k, g] : r.by_difficulty) os << "difficulty " << k << ": " << pct(g.ex) << " of " << g.n << "\n";
  return os.str();
}

}  // namespace trajsql
