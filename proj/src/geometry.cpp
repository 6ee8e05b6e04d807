#include "nodkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "nodkit/errors.hpp"

namespace nodkit {

bool RegressionDelta::finite() const {
  for (double v : t)
    if (!std::isfinite(v)) return false;
  return true;
}

int64_t TargetAssignment::positive_count() const {
  return std::count(labels.begin(), labels.end(), AnchorLabel::kPositive);
}

int64_t TargetAssignment::negative_count() const {
  return std::count(labels.begin(), labels.end(), AnchorLabel::kNegative);
}

Box3D AnchorGrid::at(int64_t flat_index) const {
  const int64_t ns = static_cast<int64_t>(sizes.size());
  const int64_t s = flat_index % ns;
  int64_t cell = flat_index / ns;
  const int64_t x = cell % grid_shape[2];
  cell /= grid_shape[2];
  const int64_t y = cell % grid_shape[1];
  const int64_t z = cell / grid_shape[1];
  Box3D b;
  b.center = {(static_cast<double>(z) + 0.5) * stride,
              (static_cast<double>(y) + 0.5) * stride,
              (static_cast<double>(x) + 0.5) * stride};
  const double edge = sizes[static_cast<size_t>(s)];
  b.size = {edge, edge, edge};
  return b;
}

double iou(const Box3D& a, const Box3D& b) {
  double inter = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = std::max(a.lo(axis), b.lo(axis));
    const double hi = std::min(a.hi(axis), b.hi(axis));
    if (hi <= lo) return 0.0;
    inter *= hi - lo;
  }
  const double uni = a.volume() + b.volume() - inter;
  return inter / uni;
}

AnchorGrid generate_anchors(const std::array<int64_t, 3>& grid_shape, int stride,
                            const std::vector<double>& sizes) {
  if (stride < 1) throw InvalidInput("anchor stride must be >= 1");
  if (sizes.empty()) throw InvalidInput("anchor size list must be nonempty");
  AnchorGrid g;
  g.sizes = sizes;
  g.stride = stride;
  g.grid_shape = grid_shape;
  return g;
}

RegressionDelta encode_box(const Box3D& gt, const Box3D& anchor) {
  RegressionDelta d;
  for (int axis = 0; axis < 3; ++axis) {
    d.t[static_cast<size_t>(axis)] =
        (gt.center[axis] - anchor.center[axis]) / anchor.size[axis];
    d.t[static_cast<size_t>(axis + 3)] = std::log(gt.size[axis] / anchor.size[axis]);
  }
  return d;
}

Box3D decode_box(const Box3D& anchor, const RegressionDelta& delta) {
  if (!delta.finite()) throw InvalidInput("non-finite regression delta");
  Box3D b;
  for (int axis = 0; axis < 3; ++axis) {
    b.center[axis] = anchor.center[axis] + delta.t[static_cast<size_t>(axis)] * anchor.size[axis];
    b.size[axis] = anchor.size[axis] * std::exp(delta.t[static_cast<size_t>(axis + 3)]);
  }
  return b;
}

std::vector<int32_t> nms(const std::vector<Box3D>& boxes,
                         const std::vector<double>& scores,
                         double iou_threshold) {
  if (boxes.size() != scores.size())
    throw InvalidInput("nms: boxes and scores length mismatch");
  std::vector<int32_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)])
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    return a < b;
  });
  std::vector<int32_t> kept;
  std::vector<char> suppressed(boxes.size(), 0);
  for (int32_t idx : order) {
    if (suppressed[static_cast<size_t>(idx)]) continue;
    kept.push_back(idx);
    for (int32_t other : order) {
      if (other == idx || suppressed[static_cast<size_t>(other)]) continue;
      if (iou(boxes[static_cast<size_t>(idx)], boxes[static_cast<size_t>(other)]) >
          iou_threshold)
        suppressed[static_cast<size_t>(other)] = 1;
    }
  }
  return kept;
}

namespace {

TargetAssignment assign_impl(const std::vector<Box3D>& gts, double pos_iou,
                             double neg_iou, int64_t n,
                             const std::function<Box3D(int64_t)>& box_at) {
  if (!(0.0 <= neg_iou && neg_iou <= pos_iou && pos_iou <= 1.0))
    throw InvalidInput("assign_targets: require 0 <= neg_iou <= pos_iou <= 1");

  TargetAssignment out;
  out.labels.assign(static_cast<size_t>(n), AnchorLabel::kNegative);
  out.matched_gt.assign(static_cast<size_t>(n), -1);
  out.deltas.assign(static_cast<size_t>(n), RegressionDelta{});
  if (gts.empty()) return out;  // no GT: everything stays negative

  const int64_t ng = static_cast<int64_t>(gts.size());
  std::vector<double> best_iou(static_cast<size_t>(n), 0.0);
  std::vector<int32_t> best_gt(static_cast<size_t>(n), 0);
  std::vector<double> gt_best_iou(static_cast<size_t>(ng), -1.0);
  std::vector<int64_t> gt_best_anchor(static_cast<size_t>(ng), 0);

  for (int64_t i = 0; i < n; ++i) {
    const Box3D anchor = box_at(i);
    for (int64_t g = 0; g < ng; ++g) {
      const double v = iou(anchor, gts[static_cast<size_t>(g)]);
      if (v > best_iou[static_cast<size_t>(i)]) {
        best_iou[static_cast<size_t>(i)] = v;
        best_gt[static_cast<size_t>(i)] = static_cast<int32_t>(g);
      }
      if (v > gt_best_iou[static_cast<size_t>(g)]) {  // strict: ties keep lower index
        gt_best_iou[static_cast<size_t>(g)] = v;
        gt_best_anchor[static_cast<size_t>(g)] = i;
      }
    }
  }

  for (int64_t i = 0; i < n; ++i) {
    const size_t si = static_cast<size_t>(i);
    if (best_iou[si] >= pos_iou)
      out.labels[si] = AnchorLabel::kPositive;
    else if (best_iou[si] < neg_iou)
      out.labels[si] = AnchorLabel::kNegative;
    else
      out.labels[si] = AnchorLabel::kIgnore;
    out.matched_gt[si] = best_gt[si];
  }

  // Argmax rule: every GT keeps at least one positive anchor. A forced
  // anchor with no overlap at all regresses toward the GT that forced it.
  for (int64_t g = 0; g < ng; ++g) {
    const int64_t i = gt_best_anchor[static_cast<size_t>(g)];
    const size_t si = static_cast<size_t>(i);
    out.labels[si] = AnchorLabel::kPositive;
    if (best_iou[si] == 0.0) out.matched_gt[si] = static_cast<int32_t>(g);
  }

  for (int64_t i = 0; i < n; ++i) {
    const size_t si = static_cast<size_t>(i);
    if (out.labels[si] == AnchorLabel::kPositive)
      out.deltas[si] =
          encode_box(gts[static_cast<size_t>(out.matched_gt[si])], box_at(i));
  }
  return out;
}

}  // namespace

TargetAssignment assign_targets(const AnchorGrid& anchors,
                                const std::vector<Box3D>& gts, double pos_iou,
                                double neg_iou) {
  return assign_impl(gts, pos_iou, neg_iou, anchors.count(),
                     [&](int64_t i) { return anchors.at(i); });
}

TargetAssignment assign_targets_boxes(const std::vector<Box3D>& boxes,
                                      const std::vector<Box3D>& gts,
                                      double pos_iou, double neg_iou) {
  return assign_impl(gts, pos_iou, neg_iou, static_cast<int64_t>(boxes.size()),
                     [&](int64_t i) { return boxes[static_cast<size_t>(i)]; });
}

bool hit_test(const std::array<double, 3>& candidate_center,
              const std::array<double, 3>& gt_center, double gt_diameter) {
  double d2 = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double d = candidate_center[static_cast<size_t>(axis)] -
                     gt_center[static_cast<size_t>(axis)];
    d2 += d * d;
  }
  const double r = 0.5 * gt_diameter;
  return d2 <= r * r;
}

Box3D mask_to_box(const MaskGrid& mask) {
  if (mask.rank() != 3) throw InvalidInput("mask_to_box: expected a rank-3 mask");
  int64_t lo[3] = {std::numeric_limits<int64_t>::max(),
                   std::numeric_limits<int64_t>::max(),
                   std::numeric_limits<int64_t>::max()};
  int64_t hi[3] = {-1, -1, -1};
  const int64_t D = mask.dim(0), H = mask.dim(1), W = mask.dim(2);
  for (int64_t z = 0; z < D; ++z)
    for (int64_t y = 0; y < H; ++y)
      for (int64_t x = 0; x < W; ++x) {
        if (!mask.at(z, y, x)) continue;
        const int64_t v[3] = {z, y, x};
        for (int axis = 0; axis < 3; ++axis) {
          lo[axis] = std::min(lo[axis], v[axis]);
          hi[axis] = std::max(hi[axis], v[axis]);
        }
      }
  if (hi[0] < 0) throw InvalidInput("mask_to_box: empty mask");
  Box3D b;
  for (int axis = 0; axis < 3; ++axis) {
    b.center[static_cast<size_t>(axis)] = 0.5 * static_cast<double>(lo[axis] + hi[axis] + 1);
    b.size[static_cast<size_t>(axis)] = static_cast<double>(hi[axis] - lo[axis] + 1);
  }
  return b;
}

Box3D clip_box(const Box3D& box, const std::array<int64_t, 3>& bounds) {
  Box3D out;
  constexpr double kMinExtent = 1e-3;
  for (int axis = 0; axis < 3; ++axis) {
    const double bound = static_cast<double>(bounds[static_cast<size_t>(axis)]);
    double lo = std::clamp(box.lo(axis), 0.0, bound);
    double hi = std::clamp(box.hi(axis), 0.0, bound);
    if (hi - lo < kMinExtent) {  // keep a sliver so downstream sizes stay positive
      const double mid = std::clamp(0.5 * (lo + hi), 0.5 * kMinExtent,
                                    bound - 0.5 * kMinExtent);
      lo = mid - 0.5 * kMinExtent;
      hi = mid + 0.5 * kMinExtent;
    }
    out.center[static_cast<size_t>(axis)] = 0.5 * (lo + hi);
    out.size[static_cast<size_t>(axis)] = hi - lo;
  }
  return out;
}

}  // namespace nodkit
