// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <regex>

#include "fixtures.h"
#include "query_gen.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/mask.h"
#include "trajsql/schema/schema_list.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {
namespace {

using testing::fixture;
using testing::read_text;
using testing::schema;

TEST(DatabaseInput, SchoolsFixtureHasOneTable) {
  const auto& d = schema("california_schools");
  ASSERT_EQ(d.tables.size(), 1u);
  EXPECT_EQ(d.tables[0].name, "schools");
  EXPECT_NE(d.tables[0].find_column("closeddate"), nullptr);
}

TEST(DatabaseInput, RenderParsesBack) {
  for (const auto& [name, d] : testing::catalog().all()) {
    const std::string text = render_database_input(d);
    EXPECT_EQ(render_database_input(parse_database_input(text)), text) << name;
  }
}

TEST(DatabaseInput, FormatErrorNamesLine) {
  try {
    parse_database_input("table t\n  column a integer\n  colum b text\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_database_input("column a integer\n"), FormatError);
}

TEST(DatabaseInput, ResolveIsCaseInsensitive) {
  const auto& d = schema("movie_platform");
  QualifiedColumn c{"MOVIE", "Likes"};
  ASSERT_TRUE(d.resolve(c));
  EXPECT_EQ(c, (QualifiedColumn{"movie", "likes"}));
  QualifiedColumn missing{"movie", "budget"};
  EXPECT_FALSE(d.resolve(missing));
}

TEST(Catalog, MissingSchema) { EXPECT_THROW(testing::catalog().get("nowhere"), MissingSchema); }

TEST(ExtractSchema, SingleTableResolves) {
  const auto l = extract_schema(sql::parse_sql(read_text(fixture("golden/closures/initial.sql"))));
  EXPECT_EQ(l.tables, std::vector<std::string>{"schools"});
  const std::vector<QualifiedColumn> cols{
      {"schools", "County"}, {"schools", "Year"}, {"schools", "SOC"}};
  EXPECT_EQ(l.columns, cols);
}

TEST(ExtractSchema, UnqualifiedInJoinGoesUnresolved) {
  const auto q = sql::parse_sql("SELECT a FROM t JOIN u ON t.id = u.tid");
  const auto l = extract_schema(q);
  EXPECT_EQ(l.tables, (std::vector<std::string>{"t", "u"}));
  EXPECT_TRUE(l.has_column({"?", "a"}));
  EXPECT_FALSE(l.has_table("?"));
}

TEST(ExtractSchema, AmbiguousWithDatabase) {
  const auto& d = schema("movie_platform");
  const auto q = sql::parse_sql("SELECT user_id FROM users JOIN ratings ON users.user_id = ratings.user_id");
  EXPECT_THROW(extract_schema(q, &d), AmbiguousColumn);
}

TEST(ExtractSchema, AliasesAndStarAreNotColumns) {
  const auto l = extract_schema(sql::parse_sql("SELECT COUNT(*) AS n FROM movie AS m ORDER BY n"));
  EXPECT_EQ(l.tables, std::vector<std::string>{"movie"});
  EXPECT_TRUE(l.columns.empty());
  EXPECT_EQ(render_schema_list(l), "tables: movie\ncolumns:\n");
}

TEST(Mask, ClosuresTemplate) {
  const auto t = parse_trajectory(read_text(fixture("golden/closures/bam.traj")));
  const auto m = mask_schema(t);
  EXPECT_EQ(m.template_text, read_text(fixture("golden/closures/bam.masked")));
  ASSERT_EQ(m.slots.size(), 7u);
  EXPECT_EQ(m.slots[0].original, "schools.Year");
  EXPECT_EQ(parse_masked_template(m.template_text).slots.size(), 7u);
  EXPECT_EQ(render_bare(m).find("[MASK:"), std::string::npos);
}

TEST(Mask, FillErrors) {
  const auto& d = schema("california_schools");
  const auto m = mask_schema(parse_trajectory(read_text(fixture("golden/closures/gold.traj"))));
  auto values = m.original_values();
  auto shorter = values;
  shorter.pop_back();
  EXPECT_THROW(fill_mask(m, shorter, d), ArityMismatch);
  auto table_slot = values;
  table_slot[0] = SchemaElement::parse("schools");
  EXPECT_THROW(fill_mask(m, table_slot, d), KindMismatch);
  auto unknown = values;
  unknown[1] = SchemaElement::parse("schools.Year");
  try {
    fill_mask(m, unknown, d);
    FAIL();
  } catch (const SchemaMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("Year"), std::string::npos);
  }
}

TEST(Mask, BadTemplateIndices) {
  EXPECT_THROW(parse_masked_template("res = df.select([MASK:1])\n"), SyntaxError);
  EXPECT_THROW(parse_masked_template("res = df.select([MASK:0], [MASK:0])\n"), SyntaxError);
}

// fill(mask(t), originals) == t, and templates name no schema element.
TEST(MaskProperty, FillInvertsMask) {
  std::size_t n = 0;
  for (const auto& [name, d] : testing::catalog().all()) {
    testing::QueryGenerator gen(d, 777);
    std::vector<std::string> names;
    for (const auto& t : d.tables) {
      names.push_back(t.name);
      for (const auto& c : t.columns) names.push_back(c.name);
    }
    for (int i = 0; i < 340; ++i, ++n) {
      const auto t = sql::decompose(sql::parse_sql(gen.next()), d);
      const auto m = mask_schema(t);
      ASSERT_EQ(fill_mask(m, m.original_values(), d), t) << render_trajectory(t);
      ASSERT_EQ(parse_masked_template(m.template_text).slots.size(), m.slots.size());
      const std::string& code = m.template_text;
      for (const auto& s : names) {
        const std::regex word("(^|[^A-Za-z0-9_])" + s + "([^A-Za-z0-9_]|$)", std::regex::icase);
        ASSERT_FALSE(std::regex_search(code, word)) << s << " in\n" << m.template_text;
      }
    }
  }
  EXPECT_GE(n, 1000u);
}

}  // namespace
}  // namespace trajsql
