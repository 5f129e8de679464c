// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "trajsql/action/trajectory.h"
#include "trajsql/corpus/record.h"
#include "trajsql/corpus/seed.h"
#include "trajsql/eval/engine.h"
#include "trajsql/perturb/perturb.h"
#include "trajsql/schema/database.h"

namespace trajsql {

struct VerifiedTrajectory {
  std::size_t seed_index = 0;
  Trajectory trajectory;
};

enum class BamInput { Gold, Initial };

struct BamBuild {
  Corpus corpus;
  /// Seeds whose gold SQL round-tripped, in seed order.
  std::vector<VerifiedTrajectory> verified;
};

/// One record per seed whose gold SQL round-trips Pass; the rest are
/// listed as rejections. Throws MissingSchema.
BamBuild build_bam_corpus(const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas,
                          BamInput input = BamInput::Gold);

/// Phase 1 (trajectory -> masked template) and phase 2 (schema, question,
/// initial schema list, template -> trajectory) per verified seed.
Corpus build_sam_corpus(const BamBuild& bam, const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas);

struct LomOptions {
  PerturbationConfig perturbation;
  Ratio negatives;
  /// Fixture databases for deciding initial-SQL correctness by execution;
  /// canonical equality with gold is used when absent or missing the db.
  DatabaseDirectory* dbs = nullptr;
};

struct LomBuild {
  Corpus corpus;
  std::size_t from_initial = 0;
  std::size_t from_perturbation = 0;
  std::size_t identities = 0;
  std::size_t skipped = 0;
};

/// Positives from decomposed wrong initial SQL and from perturbing the
/// verified trajectories of correct initial SQL, then identity negatives.
LomBuild build_lom_corpus(const BamBuild& bam, const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas,
                          const LomOptions& options);

/// Execution match when a fixture database exists, canonical equality
/// otherwise. Unparseable or failing initial SQL is incorrect.
bool initial_sql_correct(const SeedExample& seed, const DatabaseInput& d, DatabaseDirectory* dbs);

}  // namespace trajsql
