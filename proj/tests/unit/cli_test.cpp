// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.h"
#include "trajsql/cli/cli.h"
#include "trajsql/corpus/record.h"

namespace trajsql {
namespace {

using testing::fixture;
using testing::read_text;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args, const std::string& input = {}) {
  args.insert(args.begin(), "trajsql");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string path(const std::string& rel) { return fixture(rel).string(); }

TEST(Cli, RoundTripExitCodes) {
  auto r = cli({"roundtrip", "--schema", "california_schools", path("golden/closures/gold.sql")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "Pass\n");
  r = cli({"--format", "structured", "roundtrip", "--schema", "california_schools", "-e", "SELECT 1"});
  EXPECT_EQ(r.code, kExitUnsupported);
  EXPECT_EQ(ordered_json::parse(r.out)["verdict"], "Unsupported");
}

TEST(Cli, DecomposeFromStdin) {
  const auto r = cli({"decompose", "--schema", "movie_platform"}, "SELECT title FROM movie WHERE likes > 600");
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "df1 = df.where(element = movie.likes, filter = '> 600')\nres = df1.select(movie.title)\n");
}

TEST(Cli, DecomposeLenient) {
  const auto strict = cli({"decompose", "--schema", "california_schools", path("golden/closures/initial.sql")});
  EXPECT_EQ(strict.code, kExitError);
  const auto lenient =
      cli({"decompose", "--lenient", "--schema", "california_schools", path("golden/closures/initial.sql")});
  EXPECT_EQ(lenient.code, kExitOk);
  EXPECT_EQ(lenient.out, read_text(fixture("golden/closures/bam_from_initial.traj")));
}

TEST(Cli, RevertClosures) {
  const auto r = cli({"revert", "--schema", "california_schools", path("golden/closures/lom.traj")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("ORDER BY COUNT(schools.ClosedDate) DESC LIMIT 1"), std::string::npos) << r.out;
}

TEST(Cli, MaskThenFill) {
  const auto m = cli({"mask", path("golden/closures/bam.traj")});
  ASSERT_EQ(m.code, kExitOk);
  EXPECT_EQ(m.out, read_text(fixture("golden/closures/bam.masked")));
  const auto f = cli({"fill", "--schema", "california_schools", "--values",
                      "schools.ClosedDate,schools.SOC,schools.County,schools.ClosedDate,schools.ClosedDate,"
                      "schools.County,schools.ClosedDate",
                      path("golden/closures/bam.masked")});
  EXPECT_EQ(f.code, kExitOk) << f.err;
  EXPECT_EQ(f.out, read_text(fixture("golden/closures/sam.traj")));
}

TEST(Cli, PerturbRequiresSeed) {
  auto r = cli({"perturb", "--schema", "movie_platform", path("golden/edits/add.before.traj")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("UsageError: perturb requires --seed"), std::string::npos) << r.err;
  r = cli({"--seed", "5", "perturb", "--kind", "ADD", "--schema", "movie_platform",
           path("golden/edits/add.before.traj")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find(read_text(fixture("golden/edits/add.after.traj"))), std::string::npos) << r.out;
}

TEST(Cli, UnknownVerb) {
  const auto r = cli({"frob"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("UsageError: unknown verb 'frob'"), std::string::npos) << r.err;
}

TEST(Cli, BuildCorpusMatchesShippedFile) {
  const auto out = testing::scratch_dir("cli") / "lom.jsonl";
  const auto r = cli({"--seed", "7", "build-corpus", "--target", "lom", "--seeds", path("seeds/seeds.jsonl"), "--db",
                      path("dbs"), "-k", "2", "-o", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_text(out), read_text(fixture("corpus/lom.jsonl")));
  const auto stats = cli({"corpus-stats", out.string()});
  EXPECT_EQ(stats.code, kExitOk);
  EXPECT_NE(stats.out.find("LOM: 18 records"), std::string::npos) << stats.out;
}

TEST(Cli, OrchestrateThenEval) {
  const auto dir = testing::scratch_dir("cli");
  const auto results = (dir / "results.jsonl").string();
  auto r = cli({"orchestrate", "--backends", path("backends/closures.json"), "--seeds", path("seeds/seeds.jsonl"), "-o",
                results});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = cli({"--format", "structured", "eval", "--pred", results, "--gold", path("seeds/seeds.jsonl"), "--db",
           path("dbs")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = ordered_json::parse(r.out);
  EXPECT_EQ(j["n"], 10);
}

TEST(Cli, Version) {
  const auto r = cli({"--version"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, version_string() + "\n");
  EXPECT_EQ(r.out.rfind("trajsql 0.1.0", 0), 0u);
}

// The installed binary behaves like the in-process entry point.
TEST(CliBinary, ExitStatusPropagates) {
  const std::string cmd = std::string(TRAJSQL_CLI_PATH) + " roundtrip --schemas " + path("schemas") +
                          " --schema california_schools -e 'SELECT 1' 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  std::array<char, 256> buf{};
  std::string out;
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = ::pclose(p);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitUnsupported);
  EXPECT_EQ(out.rfind("Unsupported", 0), 0u) << out;
}

}  // namespace
}  // namespace trajsql
