#include "nodkit/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "nodkit/errors.hpp"

namespace nodkit {

std::array<double, 3> mask_centroid(const MaskGrid& mask) {
  double sz = 0, sy = 0, sx = 0;
  int64_t n = 0;
  const int64_t D = mask.dim(0), H = mask.dim(1), W = mask.dim(2);
  for (int64_t z = 0; z < D; ++z)
    for (int64_t y = 0; y < H; ++y)
      for (int64_t x = 0; x < W; ++x)
        if (mask.at(z, y, x)) {
          sz += static_cast<double>(z);
          sy += static_cast<double>(y);
          sx += static_cast<double>(x);
          ++n;
        }
  if (n == 0) throw InvalidInput("centroid of empty mask");
  // +0.5 puts the centroid at voxel centers, matching the half-open box
  // convention used everywhere else.
  const double inv = 1.0 / static_cast<double>(n);
  return {sz * inv + 0.5, sy * inv + 0.5, sx * inv + 0.5};
}

int64_t mask_volume(const MaskGrid& mask) {
  int64_t n = 0;
  for (int64_t i = 0; i < mask.numel(); ++i)
    if (mask[i]) ++n;
  return n;
}

double volume_equivalent_diameter(int64_t voxel_count) {
  return 2.0 * std::cbrt(3.0 * static_cast<double>(voxel_count) /
                         (4.0 * std::numbers::pi));
}

std::vector<MaskGrid> connected_components(const MaskGrid& mask) {
  const int64_t D = mask.dim(0), H = mask.dim(1), W = mask.dim(2);
  std::vector<int32_t> label(static_cast<size_t>(mask.numel()), -1);
  std::vector<MaskGrid> components;
  std::vector<int64_t> stack;
  const auto flat = [&](int64_t z, int64_t y, int64_t x) {
    return (z * H + y) * W + x;
  };

  for (int64_t z = 0; z < D; ++z)
    for (int64_t y = 0; y < H; ++y)
      for (int64_t x = 0; x < W; ++x) {
        const int64_t idx = flat(z, y, x);
        if (!mask[idx] || label[static_cast<size_t>(idx)] >= 0) continue;
        const int32_t comp = static_cast<int32_t>(components.size());
        components.emplace_back(MaskGrid({D, H, W}));
        stack.assign(1, idx);
        label[static_cast<size_t>(idx)] = comp;
        while (!stack.empty()) {
          const int64_t cur = stack.back();
          stack.pop_back();
          components.back()[cur] = 1;
          const int64_t cz = cur / (H * W), cy = (cur / W) % H, cx = cur % W;
          constexpr int64_t dz[6] = {1, -1, 0, 0, 0, 0};
          constexpr int64_t dy[6] = {0, 0, 1, -1, 0, 0};
          constexpr int64_t dx[6] = {0, 0, 0, 0, 1, -1};
          for (int k = 0; k < 6; ++k) {
            const int64_t nz = cz + dz[k], ny = cy + dy[k], nx = cx + dx[k];
            if (nz < 0 || nz >= D || ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
            const int64_t nidx = flat(nz, ny, nx);
            if (mask[nidx] && label[static_cast<size_t>(nidx)] < 0) {
              label[static_cast<size_t>(nidx)] = comp;
              stack.push_back(nidx);
            }
          }
        }
      }
  return components;
}

double mask_iou(const MaskGrid& a, const MaskGrid& b) {
  if (!a.same_shape(b)) throw InvalidInput("mask_iou: shape mismatch");
  int64_t inter = 0, uni = 0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const bool va = a[i] != 0, vb = b[i] != 0;
    inter += (va && vb) ? 1 : 0;
    uni += (va || vb) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct UnionFind {
  std::vector<int32_t> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int32_t find(int32_t a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

std::vector<GroundTruthNodule> merge_annotations(
    const std::vector<ReaderMask>& masks, int min_readers, double cluster_iou) {
  if (min_readers < 1) throw InvalidInput("min_readers must be >= 1");
  if (masks.empty()) return {};

  const auto shape = masks.front().mask.shape();
  for (const auto& m : masks) {
    if (m.mask.shape() != shape)
      throw InvalidInput("merge_annotations: reader mask shape mismatch");
    if (mask_volume(m.mask) == 0)
      throw InvalidInput("merge_annotations: empty reader mask");
  }

  struct Component {
    MaskGrid mask;
    int reader_id;
  };
  std::vector<Component> comps;
  for (const auto& rm : masks)
    for (auto& c : connected_components(rm.mask))
      comps.push_back({std::move(c), rm.reader_id});

  const size_t n = comps.size();
  UnionFind uf(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const double v = mask_iou(comps[i].mask, comps[j].mask);
      if (v > cluster_iou) {
        if (comps[i].reader_id == comps[j].reader_id)
          throw InvalidInput(
              "merge_annotations: overlapping components from reader " +
              std::to_string(comps[i].reader_id) + " (annotation corruption)");
        uf.unite(static_cast<int32_t>(i), static_cast<int32_t>(j));
      }
    }

  // Gather clusters keyed by union-find root, in root order so the output is
  // independent of input permutation up to nodule ordering by root. Nodules
  // are finally ordered by centroid for full permutation invariance.
  std::vector<std::vector<size_t>> clusters(n);
  for (size_t i = 0; i < n; ++i)
    clusters[static_cast<size_t>(uf.find(static_cast<int32_t>(i)))].push_back(i);

  std::vector<GroundTruthNodule> out;
  for (const auto& members : clusters) {
    if (members.empty()) continue;
    std::set<int> readers;
    for (size_t i : members) readers.insert(comps[i].reader_id);
    if (static_cast<int>(readers.size()) < min_readers) continue;

    // >= 50% reader vote, ties positive. A voxel counts once per distinct
    // reader even if that reader contributed several cluster members.
    const int nr = static_cast<int>(readers.size());
    MaskGrid votes({shape[0], shape[1], shape[2]});
    for (int reader : readers) {
      MaskGrid reader_union({shape[0], shape[1], shape[2]});
      for (size_t i : members)
        if (comps[i].reader_id == reader)
          for (int64_t v = 0; v < reader_union.numel(); ++v)
            reader_union[v] |= comps[i].mask[v];
      for (int64_t v = 0; v < votes.numel(); ++v) votes[v] += reader_union[v];
    }
    MaskGrid consensus({shape[0], shape[1], shape[2]});
    int64_t count = 0;
    for (int64_t v = 0; v < votes.numel(); ++v)
      if (2 * static_cast<int>(votes[v]) >= nr) {
        consensus[v] = 1;
        ++count;
      }
    if (count == 0) continue;

    GroundTruthNodule gt;
    gt.box = mask_to_box(consensus);
    gt.center_vox = mask_centroid(consensus);
    gt.diameter_vox = volume_equivalent_diameter(count);
    gt.n_readers = nr;
    gt.consensus_mask = std::move(consensus);
    out.push_back(std::move(gt));
  }

  std::sort(out.begin(), out.end(), [](const GroundTruthNodule& a,
                                       const GroundTruthNodule& b) {
    return a.center_vox < b.center_vox;
  });
  return out;
}

}  // namespace nodkit
