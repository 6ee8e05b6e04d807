#include "nodkit/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nodkit/errors.hpp"

namespace nodkit {

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

using nlohmann::json;

void Volume::validate() const {
  if (voxels.rank() != 3) throw InvalidInput("volume must be rank 3");
  for (int i = 0; i < 3; ++i) {
    if (voxels.dim(i) < 1) throw InvalidInput("volume dims must be >= 1");
    if (!(spacing_mm[static_cast<size_t>(i)] > 0.0))
      throw InvalidInput("volume spacing must be positive");
  }
  for (int64_t i = 0; i < voxels.numel(); ++i)
    if (!std::isfinite(voxels[i])) throw InvalidInput("volume voxels must be finite");
}

namespace {

constexpr int64_t kMaxDim = 4096;  // guards the payload size computation

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Volume load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open volume file: " + path);

  int ndims = -1;
  std::array<int64_t, 3> dims{};
  bool have_dims = false;
  std::array<double, 3> spacing{1, 1, 1};
  std::string element_type;
  std::string id;

  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line == "ElementDataFile = LOCAL") break;  // header terminator
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw MalformedHeader("missing '=' in line '" + line + "' of " + path);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream vs(value);
    if (key == "NDims") {
      if (!(vs >> ndims) || ndims != 3)
        throw MalformedHeader("NDims must be 3 in " + path);
    } else if (key == "DimSize") {
      if (!(vs >> dims[0] >> dims[1] >> dims[2]))
        throw MalformedHeader("DimSize needs three integers in " + path);
      have_dims = true;
    } else if (key == "ElementSpacing") {
      if (!(vs >> spacing[0] >> spacing[1] >> spacing[2]))
        throw MalformedHeader("ElementSpacing needs three values in " + path);
    } else if (key == "ElementType") {
      element_type = value;
    } else if (key == "VolumeID") {
      id = value;
    } else {
      throw MalformedHeader("unknown key '" + key + "' in " + path);
    }
  }
  if (ndims != 3) throw MalformedHeader("NDims missing in " + path);
  if (!have_dims) throw MalformedHeader("DimSize missing in " + path);
  if (element_type != "int16" && element_type != "float32")
    throw MalformedHeader("ElementType must be int16 or float32 in " + path);
  for (int64_t d : dims)
    if (d < 1 || d > kMaxDim)
      throw DimensionOverflow("DimSize out of range in " + path);

  const int64_t n = dims[0] * dims[1] * dims[2];
  Volume v;
  v.voxels = Tensor({dims[0], dims[1], dims[2]});
  v.spacing_mm = spacing;
  v.id = id;

  if (element_type == "float32") {
    std::vector<float> buf(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(n * 4));
    if (in.gcount() != static_cast<std::streamsize>(n * 4))
      throw TruncatedPayload("expected " + std::to_string(n * 4) +
                             " payload bytes in " + path);
    std::memcpy(v.voxels.data(), buf.data(), static_cast<size_t>(n) * 4);
  } else {
    std::vector<int16_t> buf(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(n * 2));
    if (in.gcount() != static_cast<std::streamsize>(n * 2))
      throw TruncatedPayload("expected " + std::to_string(n * 2) +
                             " payload bytes in " + path);
    for (int64_t i = 0; i < n; ++i) v.voxels[i] = static_cast<float>(buf[static_cast<size_t>(i)]);
  }
  for (int i = 0; i < 3; ++i)
    if (!(v.spacing_mm[static_cast<size_t>(i)] > 0.0))
      throw MalformedHeader("ElementSpacing must be positive in " + path);
  return v;
}

void save_volume(const Volume& volume, const std::string& path,
                 ElementType element_type) {
  volume.validate();
  for (int i = 0; i < 3; ++i)
    if (volume.voxels.dim(i) > kMaxDim)
      throw DimensionOverflow("volume dims exceed container limit");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write volume file: " + path);

  std::ostringstream header;
  header << "NDims = 3\n";
  header << "DimSize = " << volume.voxels.dim(0) << " " << volume.voxels.dim(1)
         << " " << volume.voxels.dim(2) << "\n";
  header.precision(17);
  header << "ElementSpacing = " << volume.spacing_mm[0] << " "
         << volume.spacing_mm[1] << " " << volume.spacing_mm[2] << "\n";
  header << "ElementType = "
         << (element_type == ElementType::kFloat32 ? "float32" : "int16") << "\n";
  if (!volume.id.empty()) header << "VolumeID = " << volume.id << "\n";
  header << "ElementDataFile = LOCAL\n";
  out << header.str();

  const int64_t n = volume.voxels.numel();
  if (element_type == ElementType::kFloat32) {
    out.write(reinterpret_cast<const char*>(volume.voxels.data()),
              static_cast<std::streamsize>(n * 4));
  } else {
    std::vector<int16_t> buf(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      const float f = std::round(volume.voxels[i]);
      buf[static_cast<size_t>(i)] =
          static_cast<int16_t>(std::clamp(f, -32768.0f, 32767.0f));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(n * 2));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<int64_t> rle_encode(const MaskGrid& mask) {
  std::vector<int64_t> runs;
  uint8_t current = 0;  // runs start with zeros
  int64_t run = 0;
  for (int64_t i = 0; i < mask.numel(); ++i) {
    const uint8_t v = mask[i] ? 1 : 0;
    if (v == current) {
      ++run;
    } else {
      runs.push_back(run);
      current = v;
      run = 1;
    }
  }
  runs.push_back(run);
  return runs;
}

MaskGrid rle_decode(const std::vector<int64_t>& runs,
                    const std::array<int64_t, 3>& shape) {
  MaskGrid mask({shape[0], shape[1], shape[2]});
  int64_t pos = 0;
  uint8_t current = 0;
  for (int64_t run : runs) {
    if (run < 0 || pos + run > mask.numel())
      throw InvalidInput("rle runs exceed mask size");
    if (current)
      for (int64_t i = 0; i < run; ++i) mask[pos + i] = 1;
    pos += run;
    current = static_cast<uint8_t>(1 - current);
  }
  if (pos != mask.numel()) throw InvalidInput("rle runs do not cover the mask");
  return mask;
}

std::vector<ReaderMask> load_annotations(const std::string& path,
                                         const std::array<int64_t, 3>& shape) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput("bad annotation JSON in " + path + ": " + e.what());
  }
  if (!doc.contains("readers") || !doc["readers"].is_array())
    throw InvalidInput("annotation document needs a 'readers' array: " + path);
  std::vector<ReaderMask> out;
  for (const auto& r : doc["readers"]) {
    ReaderMask rm;
    rm.reader_id = r.at("reader_id").get<int>();
    if (rm.reader_id < 0 || rm.reader_id > 3)
      throw InvalidInput("reader_id out of range 0..3 in " + path);
    rm.mask = rle_decode(r.at("rle").get<std::vector<int64_t>>(), shape);
    out.push_back(std::move(rm));
  }
  return out;
}

void save_annotations(const std::vector<ReaderMask>& readers,
                      const std::string& path) {
  json doc;
  doc["readers"] = json::array();
  for (const auto& r : readers) {
    doc["readers"].push_back({{"reader_id", r.reader_id}, {"rle", rle_encode(r.mask)}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write annotation file: " + path);
  out << doc.dump() << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput("bad manifest JSON in " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw InvalidInput("manifest must be a JSON list: " + path);
  DatasetManifest m;
  for (const auto& e : doc) {
    ManifestEntry entry;
    entry.volume_path = e.at("volume").get<std::string>();
    entry.annotation_path = e.at("annotation").get<std::string>();
    entry.fold = e.value("fold", -1);
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  json doc = json::array();
  for (const auto& e : manifest.entries)
    doc.push_back({{"volume", e.volume_path},
                   {"annotation", e.annotation_path},
                   {"fold", e.fold}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace nodkit
