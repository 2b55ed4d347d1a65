#pragma once

#include <string>
#include <unordered_map>

#include "edgegeo/image.hpp"

namespace edgegeo {

/// Per-pixel semantic category ids, optionally paired with instance ids.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> categories;
  std::vector<std::uint16_t> instances;  // empty when absent

  LabelMap() = default;
  LabelMap(int w, int h) : width(w), height(h), categories(static_cast<size_t>(w) * h, 0) {}

  bool has_instances() const { return !instances.empty(); }
  std::uint16_t category(int x, int y) const { return categories[static_cast<size_t>(y) * width + x]; }
  std::uint16_t instance(int x, int y) const { return instances[static_cast<size_t>(y) * width + x]; }
};

/// Total, idempotent mapping of raw category ids onto merged category ids.
struct MergeTable {
  std::unordered_map<std::uint16_t, std::uint16_t> id_map;
  std::unordered_map<std::uint16_t, std::string> names;  // raw id -> raw name

  std::uint16_t merged(std::uint16_t raw) const;
  void validate() const;  // idempotence over the declared palette
};

/// CSV columns: raw_id, raw_name, merged_name. Each merged_name must itself
/// appear as a raw_name, which makes the table idempotent by construction.
MergeTable merge_table_from_csv(const std::string& path);

/// Pixel-wise table application; instance ids pass through untouched.
LabelMap merge_labels(const LabelMap& labels, const MergeTable& table);

/// Two-sided boundary band: a pixel is an edge iff any 4-neighbor differs in
/// category, or instance ids are present and differ.
BinaryMap extract_edges(const LabelMap& merged);

}  // namespace edgegeo
