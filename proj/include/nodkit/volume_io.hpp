#pragma once

#include <string>
#include <vector>

#include "nodkit/volume.hpp"

namespace nodkit {

// On-disk volume container: a MetaImage-style text header followed by the
// raw little-endian payload in z-major order (x fastest). Header keys:
//   NDims = 3
//   DimSize = <z> <y> <x>
//   ElementSpacing = <z> <y> <x>
//   ElementType = int16 | float32
//   VolumeID = <string>            (optional)
// Distinct errors: MalformedHeader, TruncatedPayload, DimensionOverflow.
enum class ElementType { kInt16, kFloat32 };

Volume load_volume(const std::string& path);
void save_volume(const Volume& volume, const std::string& path,
                 ElementType element_type = ElementType::kFloat32);

// Flat run-length encoding over z-major order, starting with a run of zeros.
std::vector<int64_t> rle_encode(const MaskGrid& mask);
MaskGrid rle_decode(const std::vector<int64_t>& runs,
                    const std::array<int64_t, 3>& shape);

// Annotation document: {"readers":[{"reader_id":int,"rle":[...]}]}.
// Mask shape comes from the paired volume.
std::vector<ReaderMask> load_annotations(const std::string& path,
                                         const std::array<int64_t, 3>& shape);
void save_annotations(const std::vector<ReaderMask>& readers,
                      const std::string& path);

// Manifest document: JSON list of {"volume","annotation","fold"}.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace nodkit
