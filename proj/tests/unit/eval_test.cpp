// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "ex_pairs.h"
#include "fixtures.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/eval/engine.h"
#include "trajsql/eval/report.h"
#include "trajsql/orchestrator/batch.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {
namespace {

using testing::catalog;
using testing::fixture;
using testing::read_text;
using testing::schema;

TEST(ExMatch, HandCheckedPairs) {
  auto dbs = testing::databases();
  const auto& pairs = testing::hand_checked_ex_pairs();
  ASSERT_EQ(pairs.size(), 20u);
  for (const auto& p : pairs) {
    EXPECT_EQ(ex_match(p.pred, p.gold, *dbs.get(p.db)), p.match) << p.pred << "\nvs\n" << p.gold;
  }
}

TEST(ExMatch, Edges) {
  auto dbs = testing::databases();
  const auto db = dbs.get("california_schools");
  EXPECT_TRUE(ex_match("SELECT 1", "SELECT 1", *db));
  EXPECT_FALSE(ex_match("SELEC County FRM schools", "SELECT County FROM schools", *db));
  EXPECT_THROW(ex_match("SELECT County FROM schools", "SELECT Nope FROM schools", *db), GoldExecutionFailed);
  EXPECT_THROW(dbs.get("nowhere"), IoError);
  EXPECT_FALSE(dbs.has("nowhere"));
}

TEST(ExMatch, ParsedQueriesAndDialects) {
  auto dbs = testing::databases();
  const auto db = dbs.get("movie_platform");
  const auto q = sql::parse_sql("SELECT title FROM movie WHERE likes > 600");
  EXPECT_TRUE(ex_match(q, q, *db));
  const auto pg = sql::parse_sql("SELECT title FROM movie", sql::Dialect::PostgreSQL);
  EXPECT_THROW(execute_sql(pg, *db), EngineUnavailable);
}

TEST(RowsEqual, ToleranceAndNulls) {
  const std::vector<Row> a{{Value{1.0000001}, Value{}}};
  const std::vector<Row> b{{Value{std::int64_t{1}}, Value{}}};
  EXPECT_TRUE(rows_equal(a, b, true));
  const std::vector<Row> c{{Value{1.1}, Value{}}};
  EXPECT_FALSE(rows_equal(a, c, false));
  const std::vector<Row> x{{Value{std::string("a")}}, {Value{std::string("b")}}};
  const std::vector<Row> y{{Value{std::string("b")}}, {Value{std::string("a")}}};
  EXPECT_TRUE(rows_equal(x, y, false));
  EXPECT_FALSE(rows_equal(x, y, true));
}

Trajectory traj(const std::string& text) { return parse_trajectory(text); }

TEST(TagError, Rules) {
  const auto& mp = schema("movie_platform");
  const auto& cs = schema("california_schools");
  EXPECT_EQ(tag_error(traj(read_text(fixture("golden/closures/bam.traj"))),
                      traj(read_text(fixture("golden/closures/gold.traj"))), cs)
                ->str(),
            "schema/SchemaContradiction");
  EXPECT_EQ(tag_error(traj("res = df.select(movie.title, movie.likes)\n"), traj("res = df.select(movie.title)\n"), mp)
                ->str(),
            "schema/AttributeOveranalysis");
  EXPECT_EQ(tag_error(traj(read_text(fixture("golden/edits/delete.before.traj"))),
                      traj(read_text(fixture("golden/edits/delete.after.traj"))), mp)
                ->str(),
            "logic/ClauseAbuse");
  EXPECT_EQ(
      tag_error(traj("res = df.select(movie.director)\n"), traj("res = df.select(movie.title)\n"), mp)->str(),
      "schema/SchemaContradiction");
  const auto times = sql::decompose(sql::parse_sql("SELECT likes * 2 FROM movie"), mp);
  const auto plus = sql::decompose(sql::parse_sql("SELECT likes + 2 FROM movie"), mp);
  EXPECT_EQ(tag_error(times, plus, mp)->str(), "logic/MathematicalDelusion");
  EXPECT_EQ(tag_error(traj("df1 = df.where(element = users.country_code, filter = 31)\nres = df1.select(users.age)\n"),
                      traj("df1 = df.where(element = users.country_code, filter = 20)\nres = df1.select(users.age)\n"),
                      mp)
                ->str(),
            "logic/Other");
  EXPECT_FALSE(tag_error(traj("res = df.select(movie.title)\n"), traj("res = df.select(movie.title)\n"), mp));
}

TEST(TagError, ClassOfEverySubtype) {
  EXPECT_EQ(error_class_of(ErrorSubtype::AttributeOveranalysis), ErrorClass::Schema);
  EXPECT_EQ(error_class_of(ErrorSubtype::SchemaContradiction), ErrorClass::Schema);
  EXPECT_EQ(error_class_of(ErrorSubtype::ClauseAbuse), ErrorClass::Logic);
  EXPECT_EQ(error_class_of(ErrorSubtype::MathematicalDelusion), ErrorClass::Logic);
  EXPECT_EQ(error_class_of(ErrorSubtype::Other), ErrorClass::Logic);
}

EvalReport run(const std::string& backends) {
  const auto seeds = testing::seeds();
  auto echo = make_echo_generator();
  const auto results =
      correct_batch(seeds, catalog(), load_backend_config(fixture("backends/" + backends + ".json")), echo.get());
  auto dbs = testing::databases();
  return evaluate_correction(results, seeds, dbs, catalog());
}

const InstanceVerdict& instance(const EvalReport& r, const std::string& seed) {
  for (const auto& i : r.instances)
    if (i.seed == seed) return i;
  throw std::runtime_error("no instance " + seed);
}

TEST(Evaluate, IdentityPipelineNeverOvercorrects) {
  const auto r = run("identity");
  EXPECT_EQ(r.n, 10u);
  EXPECT_EQ(r.overcorrected, 0u);
  EXPECT_DOUBLE_EQ(r.overcorrection, 0.0);
  EXPECT_DOUBLE_EQ(r.ex, r.baseline_ex);
  EXPECT_DOUBLE_EQ(r.baseline_ex, 0.6);
  EXPECT_EQ(instance(r, "cs-closures").tag->str(), "schema/SchemaContradiction");
}

TEST(Evaluate, ClosuresSeedFlipsUnderReplay) {
  const auto r = run("closures");
  const auto& i = instance(r, "cs-closures");
  EXPECT_FALSE(i.initial_ex);
  EXPECT_TRUE(i.final_ex);
  EXPECT_FALSE(i.tag);
  EXPECT_DOUBLE_EQ(r.ex, 0.7);
  EXPECT_EQ(r.overcorrected, 0u);
}

TEST(Evaluate, InjectedBadLomOvercorrectsOneSeed) {
  const auto r = run("bad-lom");
  EXPECT_EQ(r.overcorrected, 1u);
  EXPECT_DOUBLE_EQ(r.overcorrection, 1.0 / r.n);
  const auto& i = instance(r, "mp-top-director");
  EXPECT_TRUE(i.initial_ex);
  EXPECT_FALSE(i.final_ex);
  EXPECT_TRUE(i.overcorrection);
  EXPECT_TRUE(i.tag);
}

TEST(Evaluate, ReportFormsAgree) {
  const auto r = run("rule");
  const auto j = report_json(r);
  EXPECT_EQ(j["n"], 10);
  EXPECT_EQ(summarize(r.instances), r);
  const std::string text = render_report(r);
  EXPECT_NE(text.find("cs-closures"), std::string::npos);
  std::size_t tagged = 0;
  for (const auto& [name, count] : r.tags) tagged += count;
  std::size_t wrong = 0;
  for (const auto& i : r.instances) wrong += !i.final_ex;
  EXPECT_EQ(tagged, wrong);
}

TEST(Evaluate, AlignmentErrors) {
  const auto seeds = testing::seeds();
  auto echo = make_echo_generator();
  auto results = correct_batch(seeds, catalog(), Backends::identity(), echo.get());
  auto dbs = testing::databases();
  auto missing = results;
  missing.pop_back();
  EXPECT_THROW(evaluate_correction(missing, seeds, dbs, catalog()), AlignmentError);
  auto duplicate = results;
  duplicate.push_back(results.front());
  EXPECT_THROW(evaluate_correction(duplicate, seeds, dbs, catalog()), AlignmentError);
  auto unknown = results;
  unknown[0].seed = "who";
  EXPECT_THROW(evaluate_correction(unknown, seeds, dbs, catalog()), AlignmentError);
}

TEST(Evaluate, ByDifficulty) {
  const auto r = run("identity");
  std::size_t n = 0;
  for (const auto& [name, g] : r.by_difficulty) n += g.n;
  EXPECT_EQ(n, r.n);
  ASSERT_TRUE(r.by_difficulty.count("challenging"));
}

}  // namespace
}  // namespace trajsql
