// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numeric>
#include <stdexcept>

namespace trajsql {

template <class T>
std::vector<TrainingPair<T>> inject_negatives(const std::vector<std::pair<T, T>>& pairs, Ratio ratio,
                                              std::uint64_t seed) {
  if (ratio.positives == 0 || ratio.identities == 0) throw std::invalid_argument("ratio must be positive");
  std::vector<TrainingPair<T>> out;
  out.reserve(pairs.size() + identity_count(pairs.size(), ratio));
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back({pairs[i].first, pairs[i].second, false, i});

  Rng rng(seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n = identity_count(pairs.size(), ratio);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& verified = pairs[order[i % order.size()]].second;
    out.push_back({verified, verified, true, order[i % order.size()]});
  }
  rng.shuffle(out);
  return out;
}

}  // namespace trajsql
