#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nodkit/geometry.hpp"
#include "nodkit/tensor.hpp"

namespace nodkit {

// A 3D scalar grid indexed (z,y,x) with per-axis spacing metadata. The unit
// of inference.
struct Volume {
  Tensor voxels;                          // rank 3, (z,y,x)
  std::array<double, 3> spacing_mm{1, 1, 1};  // z,y,x, strictly positive
  std::string id;

  std::array<int64_t, 3> shape() const {
    return {voxels.dim(0), voxels.dim(1), voxels.dim(2)};
  }
  void validate() const;  // throws InvalidInput on broken invariants
};

// One reader's binary annotation, same shape as its volume. A reader may
// contribute several of these, each holding one or more connected components.
struct ReaderMask {
  int reader_id = 0;  // 0..3
  MaskGrid mask;
};

// Consensus nodule derived from multi-reader annotations.
struct GroundTruthNodule {
  MaskGrid consensus_mask;          // full volume shape
  Box3D box;                        // tight bounding box of consensus_mask
  std::array<double, 3> center_vox{};  // consensus mask centroid (voxel centers)
  double diameter_vox = 0.0;        // volume-equivalent diameter
  int n_readers = 0;                // distinct readers in the cluster, 1..4
};

// Recipe for one synthetic volume.
struct PhantomSpec {
  std::array<int64_t, 3> shape{64, 64, 64};
  int n_nodules = 1;
  std::array<double, 2> diameter_range_vox{6.0, 24.0};
  double nodule_intensity = 1.0;
  double background_noise_sd = 0.1;
  uint64_t seed = 0;

  void validate() const;
};

struct ManifestEntry {
  std::string volume_path;
  std::string annotation_path;
  int fold = -1;  // -1 until split_folds assigns one
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

// Derived quantities shared by consensus merging and augmentation.
std::array<double, 3> mask_centroid(const MaskGrid& mask);
int64_t mask_volume(const MaskGrid& mask);
double volume_equivalent_diameter(int64_t voxel_count);

}  // namespace nodkit
