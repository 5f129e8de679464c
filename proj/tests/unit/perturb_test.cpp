// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "fixtures.h"
#include "query_gen.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/action/validate.h"
#include "trajsql/core/error.h"
#include "trajsql/perturb/perturb.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {
namespace {

using testing::fixture;
using testing::read_text;
using testing::schema;

struct GoldenCase {
  const char* name;
  PerturbationKind kind;
  std::uint64_t seed;
  const char* db;
};

class EditGolden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(EditGolden, ReproducedUnderPinnedSeed) {
  const auto& c = GetParam();
  const auto before = parse_trajectory(read_text(fixture(std::string("golden/edits/") + c.name + ".before.traj")));
  const std::string after = read_text(fixture(std::string("golden/edits/") + c.name + ".after.traj"));
  Rng rng(c.seed);
  const auto p = perturb_once(before, c.kind, rng, schema(c.db));
  EXPECT_EQ(render_trajectory(p.trajectory), after);
  EXPECT_EQ(p.record.kind, c.kind);
}

INSTANTIATE_TEST_SUITE_P(Pinned, EditGolden,
                         ::testing::Values(GoldenCase{"add", PerturbationKind::Add, 5, "movie_platform"},
                                           GoldenCase{"delete", PerturbationKind::Delete, 3, "movie_platform"},
                                           GoldenCase{"substitute", PerturbationKind::Substitute, 4,
                                                      "retail_complaints"}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(PerturbOnce, DeleteOfSingleActionIsNotViable) {
  Rng rng(1);
  EXPECT_THROW(perturb_once(parse_trajectory("res = df.select(movie.title)\n"), PerturbationKind::Delete, rng,
                            schema("movie_platform")),
               NoViablePerturbation);
}

TEST(PerturbOnce, KindNames) {
  for (auto k : {PerturbationKind::Add, PerturbationKind::Delete, PerturbationKind::Substitute})
    EXPECT_EQ(perturbation_kind_from_name(perturbation_kind_name(k)), k);
  EXPECT_FALSE(perturbation_kind_from_name("MOVE"));
}

// ADD adds one action, DELETE removes one, SUBSTITUTE keeps the count.
TEST(PerturbProperty, ArityAndValidity) {
  const int expected_delta[] = {1, -1, 0};
  std::size_t done = 0;
  std::size_t seed = 0;
  for (const auto& [name, d] : testing::catalog().all()) {
    testing::QueryGenerator gen(d, 31);
    for (int i = 0; i < 400; ++i) {
      const auto t = sql::decompose(sql::parse_sql(gen.next()), d);
      for (int k = 0; k < 3; ++k, ++seed) {
        const auto kind = static_cast<PerturbationKind>(k);
        Rng rng(seed);
        try {
          const auto p = perturb_once(t, kind, rng, d);
          ASSERT_EQ(static_cast<long>(p.trajectory.action_count()) - static_cast<long>(t.action_count()),
                    expected_delta[k])
              << perturbation_kind_name(kind) << " " << p.record.rule << "\n"
              << render_trajectory(t) << "->\n"
              << render_trajectory(p.trajectory);
          ASSERT_NE(render_trajectory(p.trajectory), render_trajectory(t));
          // Text form still parses (binding discipline holds).
          ASSERT_EQ(parse_trajectory(render_trajectory(p.trajectory)), p.trajectory);
          ++done;
        } catch (const NoViablePerturbation&) {
        }
      }
    }
  }
  EXPECT_GE(done, 1000u);
}

TEST(Augment, DeterministicAndDistinct) {
  const auto& d = schema("movie_platform");
  const auto t = parse_trajectory(read_text(fixture("golden/edits/delete.before.traj")));
  PerturbationConfig cfg;
  cfg.k = 3;
  cfg.seed = 11;
  const auto a = augment_one(t, 4, cfg, d);
  const auto b = augment_one(t, 4, cfg, d);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].erroneous, b.pairs[i].erroneous);
    EXPECT_EQ(a.pairs[i].verified, t);
    EXPECT_TRUE(seen.insert(render_trajectory(a.pairs[i].erroneous)).second);
  }
  EXPECT_EQ(a.pairs.size() + a.skipped, 3u);
}

TEST(Augment, KZeroProducesNothing) {
  PerturbationConfig cfg;
  cfg.k = 0;
  const auto t = parse_trajectory(read_text(fixture("golden/edits/delete.before.traj")));
  EXPECT_TRUE(augment_one(t, 0, cfg, schema("movie_platform")).pairs.empty());
}

TEST(PerturbationConfig, Check) {
  PerturbationConfig cfg;
  cfg.check();
  cfg.weights = {0.5, 0.5, 0.5};
  EXPECT_THROW(cfg.check(), std::invalid_argument);
  cfg.weights = {1, 0, 0};
  cfg.k = -1;
  EXPECT_THROW(cfg.check(), std::invalid_argument);
}

TEST(InjectNegatives, FourToOneForEverySize) {
  for (std::size_t n = 1; n <= 100; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(int(i) + 1000, int(i));
    const auto out = inject_negatives(pairs, Ratio{}, n);
    std::size_t identities = 0;
    std::set<std::size_t> sources;
    for (const auto& p : out) {
      if (!p.identity) continue;
      ++identities;
      EXPECT_EQ(p.input, p.target);
      EXPECT_EQ(p.target, int(p.source));
      EXPECT_TRUE(sources.insert(p.source).second);
    }
    EXPECT_EQ(identities, n / 4) << n;
    EXPECT_EQ(out.size(), n + n / 4);
    EXPECT_EQ(identity_count(n, Ratio{}), n / 4);
  }
}

TEST(InjectNegatives, SeededShuffleIsReproducible) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 40; ++i) pairs.emplace_back(i + 100, i);
  const auto a = inject_negatives(pairs, Ratio{}, 5);
  const auto b = inject_negatives(pairs, Ratio{}, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].input, b[i].input);
    EXPECT_EQ(a[i].identity, b[i].identity);
  }
  EXPECT_THROW(inject_negatives(pairs, Ratio{0, 1}, 5), std::invalid_argument);
}

TEST(Rng, StreamsAreIndependentOfOrder) {
  Rng a = Rng::stream(7, 3);
  Rng b = Rng::stream(7, 3);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::stream(7, 3).next(), Rng::stream(7, 4).next());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
  EXPECT_EQ(r.weighted({0, 1, 0}), 1u);
}

}  // namespace
}  // namespace trajsql
