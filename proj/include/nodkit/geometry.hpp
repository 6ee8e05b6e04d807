#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nodkit/tensor.hpp"

namespace nodkit {

// Continuous axis-aligned 3D box in voxel units. Coordinates are (z,y,x)
// and sizes (d,h,w); voxel v occupies [v, v+1) per axis, so integer-aligned
// boxes have half-integer centers.
struct Box3D {
  std::array<double, 3> center{};  // z,y,x
  std::array<double, 3> size{};    // d,h,w

  double lo(int axis) const { return center[axis] - 0.5 * size[axis]; }
  double hi(int axis) const { return center[axis] + 0.5 * size[axis]; }
  double volume() const { return size[0] * size[1] * size[2]; }
  bool valid() const { return size[0] > 0 && size[1] > 0 && size[2] > 0; }
};

// Six-term box-vs-anchor parameterization: center offsets normalized by the
// anchor size, log size ratios.
struct RegressionDelta {
  std::array<double, 6> t{};  // tz,ty,tx,td,th,tw
  bool finite() const;
};

// Cubic anchors tiled over a feature grid. Cell (i,j,k) is centered at
// ((i+0.5)*stride, (j+0.5)*stride, (k+0.5)*stride); anchors are stored
// implicitly, cell-major with the size index fastest.
struct AnchorGrid {
  std::vector<double> sizes;
  int stride = 4;
  std::array<int64_t, 3> grid_shape{};

  int64_t count() const {
    return grid_shape[0] * grid_shape[1] * grid_shape[2] *
           static_cast<int64_t>(sizes.size());
  }
  Box3D at(int64_t flat_index) const;
};

enum class AnchorLabel : int8_t { kNegative = -1, kIgnore = 0, kPositive = 1 };

// Per-anchor training targets. deltas/matched_gt are meaningful only where
// labels is kPositive.
struct TargetAssignment {
  std::vector<AnchorLabel> labels;
  std::vector<int32_t> matched_gt;
  std::vector<RegressionDelta> deltas;

  int64_t positive_count() const;
  int64_t negative_count() const;
};

double iou(const Box3D& a, const Box3D& b);

AnchorGrid generate_anchors(const std::array<int64_t, 3>& grid_shape, int stride,
                            const std::vector<double>& sizes);

RegressionDelta encode_box(const Box3D& gt, const Box3D& anchor);
Box3D decode_box(const Box3D& anchor, const RegressionDelta& delta);

// Greedy descending-score suppression; ties broken by lower original index.
// Returns kept indices in pick order.
std::vector<int32_t> nms(const std::vector<Box3D>& boxes,
                         const std::vector<double>& scores,
                         double iou_threshold);

// Faster-RCNN style matching: positive if IoU >= pos_iou or argmax anchor of
// some ground-truth box, negative if max-IoU < neg_iou, ignore otherwise.
TargetAssignment assign_targets(const AnchorGrid& anchors,
                                const std::vector<Box3D>& gts, double pos_iou,
                                double neg_iou);

// Same matching rules, applied to an arbitrary box list (used for proposal
// labeling on the second stage).
TargetAssignment assign_targets_boxes(const std::vector<Box3D>& boxes,
                                      const std::vector<Box3D>& gts,
                                      double pos_iou, double neg_iou);

// LUNA16-style hit criterion: candidate center within the nodule radius of
// the nodule center, boundary inclusive.
bool hit_test(const std::array<double, 3>& candidate_center,
              const std::array<double, 3>& gt_center, double gt_diameter);

// Tight bounding box of a nonempty binary mask under the half-open voxel
// convention.
Box3D mask_to_box(const MaskGrid& mask);

// Clip a box to [0, bounds) per axis, keeping at least a sliver of extent.
Box3D clip_box(const Box3D& box, const std::array<int64_t, 3>& bounds);

}  // namespace nodkit
