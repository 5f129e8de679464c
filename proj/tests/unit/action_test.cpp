// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fixtures.h"
#include "trajsql/action/action_space.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/action/validate.h"
#include "trajsql/core/error.h"

namespace trajsql {
namespace {

using testing::fixture;
using testing::read_text;

TEST(TrajectoryText, GoldenFilesRenderUnchanged) {
  for (const char* name : {"closures/gold.traj", "closures/bam.traj", "closures/sam.traj", "closures/lom.traj",
                           "edits/add.before.traj", "edits/add.after.traj", "edits/substitute.after.traj"}) {
    const std::string text = read_text(fixture(std::string("golden/") + name));
    EXPECT_EQ(render_trajectory(parse_trajectory(text)), text) << name;
  }
}

TEST(TrajectoryText, AcceptsAliasesAndSpacing) {
  const auto t = parse_trajectory("df1 = df.WHERE(element=t.a, filter = 3)\nres=df1.select(avg(t.b))");
  EXPECT_EQ(render_trajectory(t), "df1 = df.where(element = t.a, filter = 3)\nres = df1.select(average(t.b))\n");
}

TEST(TrajectoryText, OrderByElementSpelling) {
  const auto a = parse_trajectory("res = df.orderby(element = t.a, desc).select(t.a)\n");
  const auto b = parse_trajectory("res = df.orderby(by = t.a, desc).select(t.a)\n");
  EXPECT_EQ(a, b);
}

TEST(TrajectoryText, LimitWithOffset) {
  const auto t = parse_trajectory("res = df.orderby(by = t.a, asc).limit(2, 9).select(t.a)\n");
  const auto* lim = t.steps()[0].chain[1].as<LimitAction>();
  ASSERT_NE(lim, nullptr);
  EXPECT_EQ(lim->count, 9);
  EXPECT_EQ(lim->offset, 2);
}

TEST(TrajectoryText, UnknownActionNamesTheAction) {
  try {
    parse_trajectory("res = df.frobnicate(t.a)\n");
    FAIL();
  } catch (const UnknownAction& e) {
    EXPECT_NE(std::string(e.what()).find("frobnicate"), std::string::npos);
  }
}

TEST(TrajectoryText, SyntaxErrorCarriesPosition) {
  try {
    parse_trajectory("df1 = df.where(element = t.a, filter = 3)\nres = df1.select(t.a\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_EQ(e.code(), "SyntaxError");
  }
}

TEST(TrajectoryBinding, RejectsUndefinedReceiver) {
  EXPECT_THROW(parse_trajectory("res = df7.select(t.a)\n"), BindingError);
}

TEST(TrajectoryBinding, RejectsRebinding) {
  EXPECT_THROW(parse_trajectory("df1 = df.where(element = t.a, filter = 1)\n"
                                "df1 = df1.where(element = t.a, filter = 2)\n"
                                "res = df1.select(t.a)\n"),
               BindingError);
}

TEST(TrajectoryBinding, LastStepMustBindRes) {
  EXPECT_THROW(parse_trajectory("df1 = df.select(t.a)\n"), BindingError);
}

TEST(TrajectoryBinding, RejectsEmpty) { EXPECT_THROW(Trajectory::make({}), BindingError); }

TEST(Trajectory, SourceTablesAndCounts) {
  const auto t = parse_trajectory(read_text(fixture("golden/edits/substitute.before.traj")));
  EXPECT_EQ(t.source_tables(), (std::set<std::string>{"district", "reviews"}));
  EXPECT_EQ(t.action_count(), 2u);
  EXPECT_EQ(referenced_columns(t).front(), (QualifiedColumn{"reviews", "Date"}));
}

TEST(Trajectory, RenumberBindings) {
  const auto t = parse_trajectory("df7 = df.where(element = t.a, filter = 1)\n"
                                  "df3 = df7.where(element = t.b, filter = 2)\n"
                                  "res = df3.select(t.a)\n");
  EXPECT_EQ(render_trajectory(renumber_bindings(t)),
            "df1 = df.where(element = t.a, filter = 1)\n"
            "df2 = df1.where(element = t.b, filter = 2)\n"
            "res = df2.select(t.a)\n");
}

TEST(Validate, ReportsUnknownColumnOnce) {
  const auto& d = testing::schema("california_schools");
  const auto t = parse_trajectory(read_text(fixture("golden/closures/bam.traj")));
  const auto r = validate_trajectory(t, d);
  EXPECT_EQ(r.count(FindingKind::UnknownColumn), 1u);
  EXPECT_TRUE(r.has_errors());
  EXPECT_EQ(r.findings[0].column->column, "Year");
  EXPECT_EQ(r.findings[0].step, 0u);
}

TEST(Validate, UnknownTableSuppressesItsColumns) {
  const auto& d = testing::schema("california_schools");
  const auto r = validate_trajectory(parse_trajectory("res = df.select(nope.a, nope.b)\n"), d);
  EXPECT_EQ(r.count(FindingKind::UnknownTable), 1u);
  EXPECT_EQ(r.count(FindingKind::UnknownColumn), 0u);
}

TEST(Validate, GoldIsClean) {
  const auto& d = testing::schema("california_schools");
  EXPECT_TRUE(validate_trajectory(parse_trajectory(read_text(fixture("golden/closures/gold.traj"))), d).empty());
}

TEST(Validate, NestedAggregate) {
  const auto& d = testing::schema("california_schools");
  const auto r = validate_trajectory(parse_trajectory("res = df.select(count(max(schools.SOC)))\n"), d);
  EXPECT_EQ(r.count(FindingKind::NestedAggregate), 1u);
}

TEST(ActionSpace, CategoriesCoverTheVocabulary) {
  const auto& space = ActionSpace::instance();
  std::map<ActionCategory, int> per;
  for (const auto& e : space.entries()) per[e.category]++;
  EXPECT_GT(per[ActionCategory::Clause], 0);
  EXPECT_GT(per[ActionCategory::Dataframe], 0);
  EXPECT_GT(per[ActionCategory::Aggregation], 0);
  EXPECT_GT(per[ActionCategory::Operator], 0);
  ASSERT_NE(space.find("GROUP_BY"), nullptr);
  EXPECT_EQ(space.find("group_by")->kind, ActionKind::GroupBy);
  EXPECT_EQ(space.find("avg")->name, "average");
  EXPECT_EQ(space.find("nonsense"), nullptr);
}

TEST(ActionSpace, CatalogIsStable) {
  const auto& space = ActionSpace::instance();
  EXPECT_EQ(space.catalog_hash().size(), 16u);
  EXPECT_EQ(space.catalog_hash(), space.catalog_hash());
  const std::string jsonl = space.catalog_jsonl();
  EXPECT_EQ(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')), space.entries().size());
}

TEST(Literal, DateStringsClassifyAsDates) {
  EXPECT_EQ(Literal::string("1980-01-01").kind, LiteralKind::Date);
  EXPECT_EQ(Literal::string("1980").kind, LiteralKind::String);
  EXPECT_EQ(Literal::number("2.50").text, "2.50");
}

}  // namespace
}  // namespace trajsql
