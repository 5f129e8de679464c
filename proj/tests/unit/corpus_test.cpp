// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fixtures.h"
#include "trajsql/core/error.h"
#include "trajsql/corpus/build.h"
#include "trajsql/corpus/record.h"
#include "trajsql/corpus/seed.h"

namespace trajsql {
namespace {

using testing::catalog;
using testing::fixture;
using testing::read_text;

LomOptions lom_options(DatabaseDirectory& dbs, int k = 2, std::uint64_t seed = 7) {
  LomOptions o;
  o.perturbation.k = k;
  o.perturbation.seed = seed;
  o.dbs = &dbs;
  return o;
}

TEST(Seeds, FixtureLoads) {
  const auto s = testing::seeds();
  ASSERT_EQ(s.size(), 10u);
  EXPECT_EQ(s[0].id, "cs-closures");
  EXPECT_EQ(parse_seeds(render_seed(s[0]) + "\n")[0], s[0]);
}

TEST(Seeds, Errors) {
  EXPECT_THROW(parse_seeds("{\"id\":\"a\"}\n"), FormatError);
  const std::string one = R"({"id":"a","db":"x","question":"q","gold_sql":"SELECT 1","initial_sql":"SELECT 1"})";
  try {
    parse_seeds(one + "\n" + one + "\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_seeds("/nonexistent/seeds.jsonl"), IoError);
}

// 10 seeds, one with a window-function gold: 9 BAM records, 9 + 9 SAM.
TEST(BuildCorpus, BamAndSamCounts) {
  const auto seeds = testing::seeds();
  const auto bam = build_bam_corpus(seeds, catalog());
  EXPECT_EQ(bam.corpus.records.size(), 9u);
  ASSERT_EQ(bam.corpus.rejected.size(), 1u);
  EXPECT_EQ(bam.corpus.rejected[0].seed, "cs-open-rank");
  EXPECT_EQ(bam.corpus.rejected[0].verdict, "Unsupported");
  EXPECT_EQ(bam.verified.size(), 9u);

  const auto sam = build_sam_corpus(bam, seeds, catalog());
  EXPECT_EQ(sam.records.size(), 18u);
  EXPECT_EQ(sam.stats.targets.at("SAM-phase1").count, 9u);
  EXPECT_EQ(sam.stats.targets.at("SAM-phase2").count, 9u);
}

// 3 wrong initial SQLs + 6 correct ones at K = 2 give 15 positives, plus
// floor(15 / 4) = 3 identities.
TEST(BuildCorpus, LomCount) {
  const auto seeds = testing::seeds();
  auto dbs = testing::databases();
  const auto bam = build_bam_corpus(seeds, catalog());
  const auto lom = build_lom_corpus(bam, seeds, catalog(), lom_options(dbs));
  EXPECT_EQ(lom.from_initial, 3u);
  EXPECT_EQ(lom.from_perturbation, 12u);
  EXPECT_EQ(lom.identities, 3u);
  EXPECT_EQ(lom.skipped, 0u);
  EXPECT_EQ(lom.corpus.records.size(), 18u);
  for (std::size_t i = 1; i < lom.corpus.records.size(); ++i)
    EXPECT_LE(lom.corpus.records[i - 1].seed, lom.corpus.records[i].seed);
}

TEST(BuildCorpus, AllCorrectAtKZeroIsEmpty) {
  auto dbs = testing::databases();
  std::vector<SeedExample> correct;
  for (const auto& s : testing::seeds())
    if (catalog().contains(s.db) && initial_sql_correct(s, catalog().get(s.db), &dbs)) correct.push_back(s);
  ASSERT_EQ(correct.size(), 6u);
  const auto bam = build_bam_corpus(correct, catalog());
  const auto lom = build_lom_corpus(bam, correct, catalog(), lom_options(dbs, 0));
  EXPECT_TRUE(lom.corpus.records.empty());
}

TEST(BuildCorpus, LomIsDeterministic) {
  const auto seeds = testing::seeds();
  auto dbs = testing::databases();
  const auto bam = build_bam_corpus(seeds, catalog());
  const auto a = build_lom_corpus(bam, seeds, catalog(), lom_options(dbs));
  const auto b = build_lom_corpus(bam, seeds, catalog(), lom_options(dbs));
  EXPECT_EQ(serialize_corpus(a.corpus), serialize_corpus(b.corpus));
  EXPECT_EQ(serialize_corpus(a.corpus), read_text(fixture("corpus/lom.jsonl")));
}

TEST(BuildCorpus, MissingSchema) {
  auto seeds = testing::seeds();
  seeds[0].db = "nowhere";
  EXPECT_THROW(build_bam_corpus(seeds, catalog()), MissingSchema);
}

TEST(CorpusFile, ShippedFilesRereadByteIdentically) {
  for (const char* name : {"bam.jsonl", "sam.jsonl", "lom.jsonl"}) {
    const std::string text = read_text(fixture(std::string("corpus/") + name));
    const auto c = parse_corpus(text);
    EXPECT_EQ(serialize_corpus(c), text) << name;
    EXPECT_EQ(compute_stats(c.records, c.rejected), c.stats) << name;
  }
}

TEST(CorpusFile, WriteThenRead) {
  const auto seeds = testing::seeds();
  const auto bam = build_bam_corpus(seeds, catalog());
  const auto path = testing::scratch_dir("corpus") / "bam.jsonl";
  write_corpus(bam.corpus, path);
  const auto back = read_corpus(path);
  EXPECT_EQ(back.records, bam.corpus.records);
  EXPECT_EQ(back.rejected, bam.corpus.rejected);
  EXPECT_EQ(back.stats, bam.corpus.stats);
  EXPECT_EQ(read_text(path), serialize_corpus(bam.corpus));
}

TEST(CorpusFile, TruncatedFileNamesLastCompleteLine) {
  const std::string text = read_text(fixture("corpus/bam.jsonl"));
  // Drop the stats trailer.
  const std::string cut = text.substr(0, text.rfind("#stats"));
  try {
    parse_corpus(cut);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), static_cast<std::size_t>(std::count(cut.begin(), cut.end(), '\n')));
  }
  // A record cut in half.
  const std::string half = text.substr(0, text.find('\n', text.find('\n') + 1) - 20);
  EXPECT_THROW(parse_corpus(half), FormatError);
}

TEST(CorpusStats, RoundTripRate) {
  const auto bam = build_bam_corpus(testing::seeds(), catalog());
  EXPECT_EQ(bam.corpus.stats.round_trip_attempted, 10u);
  EXPECT_EQ(bam.corpus.stats.round_trip_passed, 9u);
  EXPECT_DOUBLE_EQ(bam.corpus.stats.round_trip_pass_rate, 0.9);
  EXPECT_EQ(stats_from_json(stats_json(bam.corpus.stats)), bam.corpus.stats);
  EXPECT_EQ(whitespace_tokens("  a b\n c "), 3u);
}

TEST(CorpusRecord, TargetNames) {
  for (auto t : {CorpusTarget::Bam, CorpusTarget::SamPhase1, CorpusTarget::SamPhase2, CorpusTarget::Lom})
    EXPECT_EQ(corpus_target_from_name(corpus_target_name(t)), t);
}

}  // namespace
}  // namespace trajsql
