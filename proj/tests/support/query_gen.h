// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trajsql/schema/database.h"

namespace trajsql::testing {

/// Random SELECT statements inside the supported subset: one table or an
/// FK-joined pair, every FROM table referenced, WHERE conjunctions with an
/// occasional OR group, GROUP BY with aggregates and HAVING, DISTINCT,
/// ORDER BY, LIMIT/OFFSET.
class QueryGenerator {
 public:
  QueryGenerator(const DatabaseInput& d, std::uint64_t seed) : d_(d), rng_(seed) {}

  std::string next();

 private:
  struct Col {
    std::string table;
    std::string column;
    std::string type;
    std::vector<std::string> samples;
  };

  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string name(const Col& c) const;
  std::string literal(const Col& c);
  std::string predicate(const Col& c);
  std::string aggregate(const std::vector<Col>& pool);

  const DatabaseInput& d_;
  std::mt19937_64 rng_;
  bool qualify_ = false;
};

}  // namespace trajsql::testing
