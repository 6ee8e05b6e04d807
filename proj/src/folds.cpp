#include "nodkit/folds.hpp"

#include <numeric>
#include <vector>

#include "nodkit/errors.hpp"
#include "nodkit/rng.hpp"

namespace nodkit {

DatasetManifest split_folds(const DatasetManifest& manifest, int k, uint64_t seed) {
  if (k < 2) throw InvalidInput("split_folds: k must be >= 2");
  const size_t n = manifest.entries.size();
  if (n < static_cast<size_t>(k))
    throw InvalidInput("split_folds: need at least k entries (" +
                       std::to_string(n) + " < " + std::to_string(k) + ")");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  DatasetManifest out = manifest;
  for (size_t pos = 0; pos < n; ++pos)
    out.entries[order[pos]].fold = static_cast<int>(pos % static_cast<size_t>(k));
  return out;
}

}  // namespace nodkit
