#include "edgegeo/edge_gt.hpp"

#include <fstream>
#include <sstream>

namespace edgegeo {

std::uint16_t MergeTable::merged(std::uint16_t raw) const {
  const auto it = id_map.find(raw);
  if (it == id_map.end())
    throw validation_error("merge table has no entry for category id " + std::to_string(raw));
  return it->second;
}

void MergeTable::validate() const {
  for (const auto& [raw, m] : id_map) {
    const auto it = id_map.find(m);
    if (it == id_map.end() || it->second != m)
      throw validation_error("merge table not idempotent at id " + std::to_string(raw));
  }
}

MergeTable merge_table_from_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open " + path);

  MergeTable t;
  std::unordered_map<std::string, std::uint16_t> by_name;
  std::vector<std::pair<std::uint16_t, std::string>> rows;  // raw id, merged name

  std::string line;
  std::int64_t offset = 0;
  bool first = true;
  while (std::getline(f, line)) {
    const std::int64_t line_offset = offset;
    offset += static_cast<std::int64_t>(line.size()) + 1;
    if (line.empty() || line[0] == '#') continue;

    std::stringstream ss(line);
    std::string id_str, raw_name, merged_name;
    if (!std::getline(ss, id_str, ',') || !std::getline(ss, raw_name, ',') ||
        !std::getline(ss, merged_name)) {
      if (first) continue;  // tolerate a header row
      throw io_error(path + ": malformed merge table row '" + line + "'", line_offset);
    }
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(id_str);
    trim(raw_name);
    trim(merged_name);
    if (first && !std::isdigit(static_cast<unsigned char>(id_str.empty() ? 'x' : id_str[0]))) {
      first = false;  // header
      continue;
    }
    first = false;

    std::uint16_t id = 0;
    try {
      id = static_cast<std::uint16_t>(std::stoul(id_str));
    } catch (const std::exception&) {
      throw io_error(path + ": bad category id '" + id_str + "'", line_offset);
    }
    by_name[raw_name] = id;
    t.names[id] = raw_name;
    rows.emplace_back(id, merged_name);
  }

  for (const auto& [id, merged_name] : rows) {
    const auto it = by_name.find(merged_name);
    if (it == by_name.end())
      throw validation_error(path + ": merged category '" + merged_name +
                             "' does not appear as a raw category");
    t.id_map[id] = it->second;
  }
  t.validate();
  return t;
}

LabelMap merge_labels(const LabelMap& labels, const MergeTable& table) {
  LabelMap out = labels;
  for (std::uint16_t& c : out.categories) c = table.merged(c);
  return out;
}

BinaryMap extract_edges(const LabelMap& merged) {
  const int w = merged.width, h = merged.height;
  if (merged.has_instances() && merged.instances.size() != merged.categories.size())
    throw validation_error("extract_edges: instance map size mismatch");
  BinaryMap out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      bool edge = false;
      for (int k = 0; k < 4 && !edge; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        if (merged.category(nx[k], ny[k]) != merged.category(x, y)) edge = true;
        if (merged.has_instances() && merged.instance(nx[k], ny[k]) != merged.instance(x, y))
          edge = true;
      }
      out.at(x, y) = edge ? 1 : 0;
    }
  }
  return out;
}

}  // namespace edgegeo
