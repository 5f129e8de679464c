// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <chrono>

#include "fixtures.h"
#include "query_gen.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace trajsql {
namespace {

using testing::fixture;
using testing::read_text;
using testing::schema;

std::string trim_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

TEST(Decompose, ClosuresGold) {
  const auto& d = schema("california_schools");
  const auto q = sql::parse_sql(read_text(fixture("golden/closures/gold.sql")));
  EXPECT_EQ(render_trajectory(sql::decompose(q, d)), read_text(fixture("golden/closures/gold.traj")));
}

TEST(Decompose, ClosuresInitialNeedsLenientMode) {
  const auto& d = schema("california_schools");
  const auto q = sql::parse_sql(read_text(fixture("golden/closures/initial.sql")));
  EXPECT_THROW(sql::decompose(q, d), SchemaMismatch);
  EXPECT_EQ(render_trajectory(sql::decompose(q, d, {.lenient = true})),
            read_text(fixture("golden/closures/bam_from_initial.traj")));
}

TEST(Revert, ClosuresLomMatchesFinalOutput) {
  const auto& d = schema("california_schools");
  const auto t = parse_trajectory(read_text(fixture("golden/closures/lom.traj")));
  const auto reverted = sql::revert(t, d);
  const auto expected = sql::parse_sql(read_text(fixture("golden/closures/final_output.sql")));
  EXPECT_EQ(sql::canonicalize(reverted.ast, &d), sql::canonicalize(expected, &d));
}

TEST(Revert, JoinUsesForeignKey) {
  const auto& d = schema("retail_complaints");
  const auto t = parse_trajectory(read_text(fixture("golden/edits/substitute.before.traj")));
  const std::string s = sql::render_sql(sql::revert(t, d).ast);
  EXPECT_NE(s.find("INNER JOIN"), std::string::npos) << s;
  EXPECT_NE(s.find("district_id"), std::string::npos) << s;
}

TEST(Revert, UnknownTableIsSchemaMismatch) {
  const auto& d = schema("california_schools");
  EXPECT_THROW(sql::revert(parse_trajectory("res = df.select(nowhere.a)\n"), d), SchemaMismatch);
}

TEST(Revert, NoJoinPath) {
  TableDef a{"a", {{"id", "integer", true, {}}}, {}};
  TableDef b{"b", {{"id", "integer", true, {}}}, {}};
  DatabaseInput d{"x", {a, b}};
  EXPECT_THROW(sql::revert(parse_trajectory("res = df.select(a.id, b.id)\n"), d), JoinPathNotFound);
}

TEST(Revert, LimitOffset) {
  const auto& d = schema("movie_platform");
  const auto t = parse_trajectory("res = df.orderby(by = movie.likes, desc).limit(3, 2).select(movie.title)\n");
  const std::string s = sql::render_sql(sql::revert(t, d).ast);
  EXPECT_NE(s.find("LIMIT 2 OFFSET 3"), std::string::npos) << s;
}

TEST(RoundTrip, ClosuresGoldPasses) {
  const auto r = sql::round_trip(read_text(fixture("golden/closures/gold.sql")), schema("california_schools"));
  EXPECT_EQ(r.verdict, sql::Verdict::Pass) << r.diff;
  EXPECT_TRUE(r.diff.empty());
}

TEST(RoundTrip, ReorderedConjunctsAreEquivalent) {
  const auto& d = schema("california_schools");
  const auto a = sql::parse_sql("SELECT County FROM schools WHERE SOC = 62 AND County = 'Fresno'");
  const auto b = sql::parse_sql("SELECT schools.County FROM schools WHERE 'Fresno' = schools.County AND schools.SOC = 62");
  EXPECT_EQ(sql::canonicalize(a, &d), sql::canonicalize(b, &d));
}

TEST(RoundTrip, UnsupportedConstructs) {
  const auto& d = schema("california_schools");
  for (const char* sql : {"SELECT 1", "WITH x AS (SELECT County FROM schools) SELECT County FROM x",
                          "SELECT County, RANK() OVER (ORDER BY SOC) FROM schools",
                          "SELECT CASE WHEN SOC = 1 THEN 'a' ELSE 'b' END FROM schools", "SELECT County FROM",
                          "SELECT Nope FROM schools"}) {
    const auto r = sql::round_trip(sql, d);
    EXPECT_EQ(r.verdict, sql::Verdict::Unsupported) << sql;
    EXPECT_FALSE(r.reason.empty()) << sql;
  }
}

TEST(RoundTrip, SubqueryComparison) {
  const auto& d = schema("movie_platform");
  const auto r = sql::round_trip("SELECT title FROM movie WHERE likes > (SELECT AVG(likes) FROM movie)", d);
  EXPECT_EQ(r.verdict, sql::Verdict::Pass) << r.reason << r.diff;
}

TEST(RoundTrip, SetOperation) {
  const auto& d = schema("movie_platform");
  const auto r = sql::round_trip("SELECT title FROM movie WHERE likes > 500 UNION SELECT title FROM movie WHERE release_year < 2000", d);
  EXPECT_EQ(r.verdict, sql::Verdict::Pass) << r.reason << r.diff;
}

TEST(RoundTrip, TokenDiff) {
  EXPECT_EQ(sql::token_diff("a b", "a b"), "  a\n  b\n");
  EXPECT_EQ(sql::token_diff("SELECT a FROM t", "SELECT b FROM t"), "  SELECT\n+ b\n- a\n  FROM\n  t\n");
}

TEST(Parser, DialectRenderRoundTrip) {
  const auto q = sql::parse_sql("SELECT `first name`, COUNT(*) FROM users WHERE age >= 30 GROUP BY 1 LIMIT 5");
  EXPECT_EQ(sql::parse_sql(sql::render_sql(q.ast)).ast, q.ast);
  const std::string pg = sql::render_sql(q.ast, sql::Dialect::PostgreSQL);
  EXPECT_NE(pg.find("\"first name\""), std::string::npos) << pg;
  for (auto dialect : {sql::Dialect::MySQL, sql::Dialect::PostgreSQL}) {
    const auto back = sql::parse_sql(sql::render_sql(q.ast, dialect), dialect);
    EXPECT_EQ(sql::parse_sql(sql::render_sql(back.ast, dialect), dialect).ast, back.ast);
  }
}

TEST(Parser, SyntaxError) { EXPECT_THROW(sql::parse_sql("SELECT FROM WHERE"), SyntaxError); }

// Generated queries over every fixture schema must survive the round trip.
TEST(RoundTripProperty, GeneratedQueriesPass) {
  const auto start = std::chrono::steady_clock::now();
  std::size_t total = 0;
  for (const auto& [name, d] : testing::catalog().all()) {
    testing::QueryGenerator gen(d, 1234);
    for (int i = 0; i < 200; ++i, ++total) {
      const std::string sql = gen.next();
      const auto r = sql::round_trip(sql, d);
      ASSERT_EQ(r.verdict, sql::Verdict::Pass) << sql << "\n" << r.reason << "\n" << r.diff;
      ASSERT_EQ(trim_newline(r.canonical_original), trim_newline(r.canonical_reverted));
    }
  }
  EXPECT_GE(total, 500u);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(RoundTripProperty, DecomposeIsDeterministic) {
  const auto& d = schema("movie_platform");
  testing::QueryGenerator gen(d, 99);
  for (int i = 0; i < 100; ++i) {
    const auto q = sql::parse_sql(gen.next());
    EXPECT_EQ(sql::decompose(q, d), sql::decompose(q, d));
    // Text form parses back to the same trajectory.
    const auto t = sql::decompose(q, d);
    EXPECT_EQ(parse_trajectory(render_trajectory(t)), t);
  }
}

}  // namespace
}  // namespace trajsql
