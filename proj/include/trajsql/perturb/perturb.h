// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajsql/action/trajectory.h"
#include "trajsql/perturb/rng.h"
#include "trajsql/schema/database.h"

namespace trajsql {

enum class PerturbationKind { Add, Delete, Substitute };

std::string_view perturbation_kind_name(PerturbationKind k);  // ADD, DELETE, SUBSTITUTE
std::optional<PerturbationKind> perturbation_kind_from_name(std::string_view name);

struct PerturbationRecord {
  PerturbationKind kind = PerturbationKind::Add;
  /// Step and chain index: in the output for ADD, in the input otherwise.
  std::size_t step = 0;
  std::size_t action = 0;
  std::optional<Action> before;
  std::optional<Action> after;
  std::uint64_t seed = 0;
  /// Which rule of the kind's pool fired, e.g. `groupby`, `select-reorder`.
  std::string rule;

  bool operator==(const PerturbationRecord&) const = default;
};

struct PerturbationConfig {
  int k = 1;
  /// ADD, DELETE, SUBSTITUTE.
  std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::uint64_t seed = 0;
  int max_attempts = 16;

  /// Throws std::invalid_argument on negative K/weights or weights not
  /// summing to 1.
  void check() const;
};

struct Perturbed {
  Trajectory trajectory;
  PerturbationRecord record;
};

/// One edit of the given kind. The result passes binding validation and
/// renders differently from `t`. Throws NoViablePerturbation when no draw
/// succeeds within `max_attempts`.
Perturbed perturb_once(const Trajectory& t, PerturbationKind kind, Rng& rng, const DatabaseInput& d,
                       int max_attempts = 16);

struct AugmentedPair {
  Trajectory erroneous;
  Trajectory verified;
  PerturbationRecord record;
};

struct AugmentReport {
  std::vector<AugmentedPair> pairs;
  /// Draws abandoned after NoViablePerturbation or a duplicate result.
  std::size_t skipped = 0;
};

/// K edits of trajectory `index` (the RNG stream key), pairwise distinct.
AugmentReport augment_one(const Trajectory& verified, std::uint64_t index, const PerturbationConfig& cfg,
                          const DatabaseInput& d);

/// `augment_one` over the list, stream `i` for element `i`.
AugmentReport augment(const std::vector<Trajectory>& verified, const PerturbationConfig& cfg, const DatabaseInput& d);

struct Ratio {
  std::uint64_t positives = 4;
  std::uint64_t identities = 1;
};

template <class T>
struct TrainingPair {
  T input;
  T target;
  bool identity = false;
  /// Index of the originating positive.
  std::size_t source = 0;
};

/// Number of identity pairs added to `n` positives.
std::size_t identity_count(std::size_t n, Ratio ratio);

/// Positives plus `identity_count` identity pairs (verified -> verified)
/// whose sources are sampled without replacement, shuffled by `seed`.
/// Throws std::invalid_argument when the ratio is not positive.
template <class T>
std::vector<TrainingPair<T>> inject_negatives(const std::vector<std::pair<T, T>>& pairs, Ratio ratio,
                                              std::uint64_t seed);

}  // namespace trajsql

#include "trajsql/perturb/inject_impl.h"
