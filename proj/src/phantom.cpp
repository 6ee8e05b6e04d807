#include "nodkit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nodkit/consensus.hpp"
#include "nodkit/errors.hpp"
#include "nodkit/rng.hpp"

namespace nodkit {

void PhantomSpec::validate() const {
  if (n_nodules < 0) throw InvalidInput("phantom: n_nodules must be >= 0");
  if (!(diameter_range_vox[0] > 0) ||
      diameter_range_vox[1] < diameter_range_vox[0])
    throw InvalidInput("phantom: diameter range must be positive and ordered");
  const int64_t min_dim = std::min({shape[0], shape[1], shape[2]});
  if (diameter_range_vox[1] >= static_cast<double>(min_dim))
    throw InvalidInput("phantom: max diameter must be < min(shape)");
  if (background_noise_sd < 0) throw InvalidInput("phantom: noise sd must be >= 0");
}

namespace {

struct Ellipsoid {
  std::array<double, 3> center;  // z,y,x (integer-lattice rasterization)
  std::array<double, 3> radii;
};

// Voxel v belongs to the nodule iff sum(((v - c) / r)^2) <= 1. Indices are
// compared directly (not voxel centers), so a sphere of diameter 10 centered
// on an integer lattice point covers {v : ||v - c|| <= 5}.
MaskGrid rasterize(const Ellipsoid& e, const std::array<int64_t, 3>& shape) {
  MaskGrid mask({shape[0], shape[1], shape[2]});
  const int64_t z0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(e.center[0] - e.radii[0])));
  const int64_t z1 = std::min<int64_t>(shape[0] - 1, static_cast<int64_t>(std::ceil(e.center[0] + e.radii[0])));
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(e.center[1] - e.radii[1])));
  const int64_t y1 = std::min<int64_t>(shape[1] - 1, static_cast<int64_t>(std::ceil(e.center[1] + e.radii[1])));
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(e.center[2] - e.radii[2])));
  const int64_t x1 = std::min<int64_t>(shape[2] - 1, static_cast<int64_t>(std::ceil(e.center[2] + e.radii[2])));
  for (int64_t z = z0; z <= z1; ++z)
    for (int64_t y = y0; y <= y1; ++y)
      for (int64_t x = x0; x <= x1; ++x) {
        const double dz = (static_cast<double>(z) - e.center[0]) / e.radii[0];
        const double dy = (static_cast<double>(y) - e.center[1]) / e.radii[1];
        const double dx = (static_cast<double>(x) - e.center[2]) / e.radii[2];
        if (dz * dz + dy * dy + dx * dx <= 1.0) mask.at(z, y, x) = 1;
      }
  return mask;
}

}  // namespace

PhantomResult generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  PhantomResult result;
  result.volume.voxels = Tensor({spec.shape[0], spec.shape[1], spec.shape[2]});
  result.volume.spacing_mm = {1.0, 1.0, 1.0};
  for (int64_t i = 0; i < result.volume.voxels.numel(); ++i)
    result.volume.voxels[i] =
        static_cast<float>(rng.normal(0.0, spec.background_noise_sd));

  std::vector<Ellipsoid> placed;
  constexpr int kMaxRetries = 200;
  for (int k = 0; k < spec.n_nodules; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
      const double diameter =
          rng.uniform(spec.diameter_range_vox[0], spec.diameter_range_vox[1]);
      Ellipsoid e;
      double max_r = 0;
      for (int axis = 0; axis < 3; ++axis) {
        const double ratio = rng.uniform(0.8, 1.25);
        e.radii[static_cast<size_t>(axis)] = 0.5 * diameter * ratio;
        max_r = std::max(max_r, e.radii[static_cast<size_t>(axis)]);
      }
      for (int axis = 0; axis < 3; ++axis) {
        const double lim = static_cast<double>(spec.shape[static_cast<size_t>(axis)]);
        const double margin = e.radii[static_cast<size_t>(axis)] + 1.0;
        if (lim - margin <= margin) break;
        e.center[static_cast<size_t>(axis)] = rng.uniform(margin, lim - margin);
      }
      bool separated = true;
      for (const auto& other : placed) {
        const double min_dist =
            max_r + *std::max_element(other.radii.begin(), other.radii.end());
        double d2 = 0;
        for (int axis = 0; axis < 3; ++axis) {
          const double d = e.center[static_cast<size_t>(axis)] -
                           other.center[static_cast<size_t>(axis)];
          d2 += d * d;
        }
        if (d2 < min_dist * min_dist) {
          separated = false;
          break;
        }
      }
      if (separated) {
        placed.push_back(e);
        ok = true;
      }
    }
    if (!ok)
      throw RuntimeFailure(
          "phantom placement failed after retries (seed " +
          std::to_string(spec.seed) + ", shape " + std::to_string(spec.shape[0]) +
          "x" + std::to_string(spec.shape[1]) + "x" + std::to_string(spec.shape[2]) +
          ", " + std::to_string(spec.n_nodules) + " nodules of " +
          std::to_string(spec.diameter_range_vox[0]) + ".." +
          std::to_string(spec.diameter_range_vox[1]) + " vox)");
  }

  MaskGrid all({spec.shape[0], spec.shape[1], spec.shape[2]});
  for (const auto& e : placed) {
    MaskGrid mask = rasterize(e, spec.shape);
    const int64_t count = mask_volume(mask);
    if (count == 0) throw RuntimeFailure("phantom nodule rasterized to nothing");
    for (int64_t i = 0; i < mask.numel(); ++i)
      if (mask[i]) {
        result.volume.voxels[i] = static_cast<float>(spec.nodule_intensity);
        all[i] = 1;
      }

    GroundTruthNodule gt;
    gt.box = mask_to_box(mask);
    gt.center_vox = mask_centroid(mask);
    gt.diameter_vox = volume_equivalent_diameter(count);
    gt.n_readers = 4;
    gt.consensus_mask = std::move(mask);
    result.nodules.push_back(std::move(gt));
  }

  // A nodule-free phantom carries no reader annotations (reader masks must
  // be nonempty).
  if (!placed.empty()) {
    for (int reader = 0; reader < 4; ++reader) {
      ReaderMask rm;
      rm.reader_id = reader;
      rm.mask = all;
      result.reader_masks.push_back(std::move(rm));
    }
  }
  return result;
}

}  // namespace nodkit
