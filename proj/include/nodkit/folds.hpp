#pragma once

#include <cstdint>

#include "nodkit/volume.hpp"

namespace nodkit {

// Deterministic k-fold assignment: seeded permutation, then round-robin, so
// fold sizes differ by at most one.
DatasetManifest split_folds(const DatasetManifest& manifest, int k, uint64_t seed);

}  // namespace nodkit
