#pragma once

#include <utility>
#include <vector>

#include "nodkit/volume.hpp"

namespace nodkit {

struct PhantomResult {
  Volume volume;
  std::vector<GroundTruthNodule> nodules;
  // Per-nodule 4-reader annotations, identical by construction, so the
  // ground truth round-trips through the standard consensus path.
  std::vector<ReaderMask> reader_masks;
};

// Deterministic synthetic volume: Gaussian background noise plus ellipsoidal
// nodules (axis ratios in [0.8, 1.25]) whose centers are separated by at
// least the sum of their radii.
PhantomResult generate_phantom(const PhantomSpec& spec);

}  // namespace nodkit
