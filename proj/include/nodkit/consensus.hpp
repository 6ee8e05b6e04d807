#pragma once

#include <vector>

#include "nodkit/volume.hpp"

namespace nodkit {

// Cluster per-reader connected components by transitive closure of pairwise
// mask-IoU > 0.4; clusters annotated by at least min_readers distinct readers
// become consensus nodules. The consensus mask keeps voxels marked by >= 50%
// of the cluster's readers (ties count as positive).
//
// Rejected inputs: masks whose shape differs across readers, and two
// overlapping (IoU > 0.4) components from the same reader.
std::vector<GroundTruthNodule> merge_annotations(
    const std::vector<ReaderMask>& masks, int min_readers,
    double cluster_iou = 0.4);

// Face-connected (6-neighborhood) components of a binary grid.
std::vector<MaskGrid> connected_components(const MaskGrid& mask);

double mask_iou(const MaskGrid& a, const MaskGrid& b);

}  // namespace nodkit
