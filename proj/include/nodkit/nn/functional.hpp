#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nodkit/errors.hpp"
#include "nodkit/geometry.hpp"
#include "nodkit/tensor.hpp"

// Standalone differentiable pieces shared by the heads and their tests.
// Everything here is templated on the scalar type so finite-difference
// checks can run at double precision.
namespace nodkit::nn {

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// Numerically stable binary cross-entropy on a logit.
template <typename T>
T bce_with_logits(T logit, T target) {
  const T neg_abs = logit < T(0) ? logit : -logit;
  return std::max(logit, T(0)) - logit * target + std::log1p(std::exp(neg_abs));
}

template <typename T>
T bce_with_logits_grad(T logit, T target) {
  return sigmoid(logit) - target;
}

template <typename T>
T smooth_l1(T d) {
  const T a = std::abs(d);
  return a < T(1) ? T(0.5) * d * d : a - T(0.5);
}

template <typename T>
T smooth_l1_grad(T d) {
  if (d > T(1)) return T(1);
  if (d < T(-1)) return T(-1);
  return d;
}

template <typename T>
struct DiceLoss {
  T loss = T(0);
  bool empty_warning = false;     // set when the pair list is empty
  std::vector<T> per_pair_dice;
};

// Soft dice over aligned probability/ground-truth pairs:
//   dice = (2*sum(p*g) + eps) / (sum(p) + sum(g) + eps),  loss = 1 - mean(dice)
template <typename T>
DiceLoss<T> soft_dice_loss(const std::vector<TensorT<T>>& preds,
                           const std::vector<MaskGrid>& gts,
                           T eps = T(1e-5)) {
  if (preds.size() != gts.size())
    throw InvalidInput("soft_dice_loss: pred/gt list length mismatch");
  DiceLoss<T> out;
  if (preds.empty()) {
    out.empty_warning = true;
    return out;
  }
  T total = T(0);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].shape() != gts[i].shape())
      throw InvalidInput("soft_dice_loss: shape mismatch at pair " +
                         std::to_string(i));
    T pg = T(0), p = T(0), g = T(0);
    for (int64_t v = 0; v < preds[i].numel(); ++v) {
      const T pv = preds[i][v];
      const T gv = gts[i][v] ? T(1) : T(0);
      pg += pv * gv;
      p += pv;
      g += gv;
    }
    const T dice = (T(2) * pg + eps) / (p + g + eps);
    out.per_pair_dice.push_back(dice);
    total += dice;
  }
  out.loss = T(1) - total / T(preds.size());
  return out;
}

// Gradient of soft_dice_loss with respect to each prediction grid.
template <typename T>
std::vector<TensorT<T>> soft_dice_loss_backward(
    const std::vector<TensorT<T>>& preds, const std::vector<MaskGrid>& gts,
    T eps = T(1e-5)) {
  std::vector<TensorT<T>> grads;
  const T inv_n = preds.empty() ? T(0) : T(1) / T(preds.size());
  for (size_t i = 0; i < preds.size(); ++i) {
    T pg = T(0), p = T(0), g = T(0);
    for (int64_t v = 0; v < preds[i].numel(); ++v) {
      const T pv = preds[i][v];
      const T gv = gts[i][v] ? T(1) : T(0);
      pg += pv * gv;
      p += pv;
      g += gv;
    }
    const T denom = p + g + eps;
    const T numer = T(2) * pg + eps;
    TensorT<T> grad(preds[i].shape());
    for (int64_t v = 0; v < preds[i].numel(); ++v) {
      const T gv = gts[i][v] ? T(1) : T(0);
      // d dice / dp_v, then loss = 1 - mean(dice)
      const T ddice = (T(2) * gv * denom - numer) / (denom * denom);
      grad[v] = -inv_n * ddice;
    }
    grads.push_back(std::move(grad));
  }
  return grads;
}

// Interpolation-based ROI pooling: a regular out_size^3 lattice of trilinear
// samples inside each box, taken from a (C,D,H,W) feature map whose cell j
// sits at input coordinate (j+0.5)*stride. Returns (N,C,o,o,o).
template <typename T>
TensorT<T> roi_pool(const TensorT<T>& fmap, const std::vector<Box3D>& boxes,
                    double stride, int out_size) {
  if (fmap.rank() != 4) throw InvalidInput("roi_pool: feature map must be rank 4");
  const int64_t C = fmap.dim(0), D = fmap.dim(1), H = fmap.dim(2), W = fmap.dim(3);
  const int64_t N = static_cast<int64_t>(boxes.size());
  const int64_t o = out_size;
  TensorT<T> out({std::max<int64_t>(N, 1), C, o, o, o});
  if (N == 0) return TensorT<T>({1, C, o, o, o});

  const int64_t dims[3] = {D, H, W};
  for (int64_t n = 0; n < N; ++n) {
    const Box3D& box = boxes[static_cast<size_t>(n)];
    for (int axis = 0; axis < 3; ++axis)
      if (!(box.size[static_cast<size_t>(axis)] > 1e-9))
        throw InvalidInput("roi_pool: degenerate box for candidate " +
                           std::to_string(n));
    // Per-axis sample positions in feature-cell coordinates.
    std::vector<double> pos[3];
    for (int axis = 0; axis < 3; ++axis) {
      const double lo = box.lo(axis);
      const double len = box.size[static_cast<size_t>(axis)];
      for (int64_t i = 0; i < o; ++i) {
        const double u = lo + (static_cast<double>(i) + 0.5) * len / static_cast<double>(o);
        pos[axis].push_back(u / stride - 0.5);
      }
    }
    for (int64_t iz = 0; iz < o; ++iz)
      for (int64_t iy = 0; iy < o; ++iy)
        for (int64_t ix = 0; ix < o; ++ix) {
          const double p[3] = {pos[0][static_cast<size_t>(iz)],
                               pos[1][static_cast<size_t>(iy)],
                               pos[2][static_cast<size_t>(ix)]};
          int64_t base[3];
          double frac[3];
          for (int axis = 0; axis < 3; ++axis) {
            const double clamped =
                std::clamp(p[axis], 0.0, static_cast<double>(dims[axis] - 1));
            const double fl = std::floor(clamped);
            base[axis] = std::min(static_cast<int64_t>(fl), dims[axis] - 1);
            frac[axis] = clamped - static_cast<double>(base[axis]);
          }
          for (int64_t c = 0; c < C; ++c) {
            T acc = T(0);
            for (int dz = 0; dz < 2; ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                  const int64_t z = std::min(base[0] + dz, D - 1);
                  const int64_t y = std::min(base[1] + dy, H - 1);
                  const int64_t x = std::min(base[2] + dx, W - 1);
                  const double w = (dz ? frac[0] : 1.0 - frac[0]) *
                                   (dy ? frac[1] : 1.0 - frac[1]) *
                                   (dx ? frac[2] : 1.0 - frac[2]);
                  acc += static_cast<T>(w) * fmap.at(c, z, y, x);
                }
            out[(((n * C + c) * o + iz) * o + iy) * o + ix] = acc;
          }
        }
  }
  return out;
}

// Scatter the pooled-grid gradient back onto the feature map.
template <typename T>
void roi_pool_backward(const TensorT<T>& grad_out,
                       const std::vector<Box3D>& boxes, double stride,
                       int out_size, TensorT<T>& grad_fmap) {
  const int64_t C = grad_fmap.dim(0), D = grad_fmap.dim(1), H = grad_fmap.dim(2),
                W = grad_fmap.dim(3);
  const int64_t o = out_size;
  const int64_t dims[3] = {D, H, W};
  for (int64_t n = 0; n < static_cast<int64_t>(boxes.size()); ++n) {
    const Box3D& box = boxes[static_cast<size_t>(n)];
    std::vector<double> pos[3];
    for (int axis = 0; axis < 3; ++axis) {
      const double lo = box.lo(axis);
      const double len = box.size[static_cast<size_t>(axis)];
      for (int64_t i = 0; i < o; ++i) {
        const double u = lo + (static_cast<double>(i) + 0.5) * len / static_cast<double>(o);
        pos[axis].push_back(u / stride - 0.5);
      }
    }
    for (int64_t iz = 0; iz < o; ++iz)
      for (int64_t iy = 0; iy < o; ++iy)
        for (int64_t ix = 0; ix < o; ++ix) {
          const double p[3] = {pos[0][static_cast<size_t>(iz)],
                               pos[1][static_cast<size_t>(iy)],
                               pos[2][static_cast<size_t>(ix)]};
          int64_t base[3];
          double frac[3];
          for (int axis = 0; axis < 3; ++axis) {
            const double clamped =
                std::clamp(p[axis], 0.0, static_cast<double>(dims[axis] - 1));
            const double fl = std::floor(clamped);
            base[axis] = std::min(static_cast<int64_t>(fl), dims[axis] - 1);
            frac[axis] = clamped - static_cast<double>(base[axis]);
          }
          for (int64_t c = 0; c < C; ++c) {
            const T g = grad_out[(((n * C + c) * o + iz) * o + iy) * o + ix];
            for (int dz = 0; dz < 2; ++dz)
              for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                  const int64_t z = std::min(base[0] + dz, D - 1);
                  const int64_t y = std::min(base[1] + dy, H - 1);
                  const int64_t x = std::min(base[2] + dx, W - 1);
                  const double w = (dz ? frac[0] : 1.0 - frac[0]) *
                                   (dy ? frac[1] : 1.0 - frac[1]) *
                                   (dx ? frac[2] : 1.0 - frac[2]);
                  grad_fmap.at(c, z, y, x) += static_cast<T>(w) * g;
                }
          }
        }
  }
}

}  // namespace nodkit::nn
