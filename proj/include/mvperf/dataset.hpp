#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvperf/errors.hpp"
#include "mvperf/label_tuple.hpp"
#include "mvperf/numeric_text.hpp"

namespace mvperf {

// One data point in one view: sparse storage, dense semantics (absent
// indices are zero). Indices are 0-based internally, 1-based in files.
struct SparseRow {
  std::vector<int> idx;
  std::vector<double> val;

  double dot(const Eigen::VectorXd& w) const {
    double s = 0.0;
    for (std::size_t t = 0; t < idx.size(); ++t) s += w[idx[t]] * val[t];
    return s;
  }

  // dense += scale * row
  void add_scaled_to(Eigen::VectorXd& dense, double scale) const {
    for (std::size_t t = 0; t < idx.size(); ++t) dense[idx[t]] += scale * val[t];
  }

  bool operator==(const SparseRow&) const = default;
};

struct MultiViewDataset {
  std::int64_t n = 0;             // data points
  int m = 0;                      // views
  std::vector<int> dims;          // per-view dimension d_j
  std::vector<std::vector<SparseRow>> views;  // views[j][i]
  LabelTuple labels;              // the ground-truth tuple, entries +1/-1

  bool operator==(const MultiViewDataset&) const = default;
};

inline void validate(const MultiViewDataset& ds) {
  if (ds.n < 1) throw FormatError("dataset: n must be >= 1");
  if (ds.m < 1) throw FormatError("dataset: m must be >= 1");
  if (static_cast<int>(ds.dims.size()) != ds.m ||
      static_cast<int>(ds.views.size()) != ds.m)
    throw FormatError("dataset: dims/views count does not match m");
  if (static_cast<std::int64_t>(ds.labels.size()) != ds.n)
    throw FormatError("dataset: expected " + std::to_string(ds.n) + " labels, got " +
                      std::to_string(ds.labels.size()));
  for (std::int64_t i = 0; i < ds.n; ++i)
    if (ds.labels[i] != 1 && ds.labels[i] != -1)
      throw FormatError("dataset: label at row " + std::to_string(i + 1) +
                        " is " + std::to_string(ds.labels[i]) + ", must be +1 or -1");
  for (int j = 0; j < ds.m; ++j) {
    if (ds.dims[j] < 1)
      throw FormatError("dataset: view " + std::to_string(j + 1) + " has dimension < 1");
    if (static_cast<std::int64_t>(ds.views[j].size()) != ds.n)
      throw FormatError("dataset: view " + std::to_string(j + 1) + " has " +
                        std::to_string(ds.views[j].size()) + " rows, expected " +
                        std::to_string(ds.n));
    for (std::int64_t i = 0; i < ds.n; ++i) {
      const SparseRow& row = ds.views[j][i];
      if (row.idx.size() != row.val.size())
        throw FormatError("dataset: ragged sparse row");
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (row.idx[t] < 0 || row.idx[t] >= ds.dims[j])
          throw FormatError("dataset: view " + std::to_string(j + 1) + " row " +
                            std::to_string(i + 1) + " index out of range");
        if (!std::isfinite(row.val[t]))
          throw FormatError("dataset: non-finite value in view " +
                            std::to_string(j + 1) + " row " + std::to_string(i + 1));
      }
    }
  }
}

namespace detail {

// Parses one `i1:v1 i2:v2 ...` line. Returns the max 1-based index seen.
inline int parse_sparse_line(const std::string& line, const std::string& where,
                             SparseRow& out) {
  int max_index = 0;
  std::size_t pos = 0;
  const std::size_t len = line.size();
  while (pos < len) {
    while (pos < len && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= len) break;
    std::size_t colon = line.find(':', pos);
    std::size_t end = line.find_first_of(" \t", pos);
    if (end == std::string::npos) end = len;
    if (colon == std::string::npos || colon >= end)
      throw FormatError(where + ": expected index:value pair, got '" +
                        line.substr(pos, end - pos) + "'");
    const long long index = parse_int(std::string_view(line).substr(pos, colon - pos), where);
    if (index < 1) throw FormatError(where + ": feature index must be >= 1");
    const double value =
        parse_double(std::string_view(line).substr(colon + 1, end - colon - 1), where);
    if (!std::isfinite(value)) throw FormatError(where + ": non-finite value");
    out.idx.push_back(static_cast<int>(index - 1));
    out.val.push_back(value);
    max_index = std::max(max_index, static_cast<int>(index));
    pos = end;
  }
  // duplicate index detection
  std::vector<int> sorted = out.idx;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw FormatError(where + ": duplicate feature index in row");
  return max_index;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline std::vector<SparseRow> load_view_file(const std::filesystem::path& path,
                                             int& max_index_seen) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open view file " + path.string());
  std::vector<SparseRow> rows;
  std::string line;
  std::int64_t lineno = 0;
  max_index_seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    if (line.find_first_not_of(" \t") == std::string::npos)
      throw FormatError(where + ": blank lines are forbidden");
    SparseRow row;
    max_index_seen = std::max(max_index_seen, parse_sparse_line(line, where, row));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("view file " + path.string() + " is empty");
  return rows;
}

inline LabelTuple load_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path.string());
  LabelTuple labels;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    if (line.find_first_not_of(" \t") == std::string::npos)
      throw FormatError(where + ": blank lines are forbidden");
    std::string tok = line;
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok == "+1" || tok == "1")
      labels.push_back(1);
    else if (tok == "-1")
      labels.push_back(-1);
    else
      throw FormatError(where + ": label must be +1 or -1, got '" + tok + "'");
  }
  return labels;
}

}  // namespace detail

// Manifest: JSON with fields `version`, `labels` (file path or inline
// array), `views` (ordered list of paths or {path, dim} objects). Paths
// are relative to the manifest's directory; view order defines j.
inline MultiViewDataset load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();

  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw FormatError("manifest: missing or unsupported version (expected 1)");
  if (!doc.contains("views") || !doc["views"].is_array() || doc["views"].empty())
    throw FormatError("manifest: 'views' must be a non-empty list");
  if (!doc.contains("labels"))
    throw FormatError("manifest: missing 'labels'");

  MultiViewDataset ds;

  if (doc["labels"].is_string()) {
    ds.labels = detail::load_label_file(base / doc["labels"].get<std::string>());
  } else if (doc["labels"].is_array()) {
    for (const auto& v : doc["labels"]) {
      if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1))
        throw FormatError("manifest: inline label must be +1 or -1");
      ds.labels.push_back(v.get<int>());
    }
  } else {
    throw FormatError("manifest: 'labels' must be a path or an array");
  }
  if (ds.labels.empty()) throw FormatError("manifest: no labels");

  ds.n = static_cast<std::int64_t>(ds.labels.size());
  ds.m = static_cast<int>(doc["views"].size());
  for (const auto& entry : doc["views"]) {
    std::string rel;
    int declared_dim = 0;
    if (entry.is_string()) {
      rel = entry.get<std::string>();
    } else if (entry.is_object() && entry.contains("path") && entry["path"].is_string()) {
      rel = entry["path"].get<std::string>();
      if (entry.contains("dim")) {
        if (!entry["dim"].is_number_integer() || entry["dim"].get<std::int64_t>() < 1)
          throw FormatError("manifest: view 'dim' must be a positive integer");
        declared_dim = entry["dim"].get<int>();
      }
    } else {
      throw FormatError("manifest: each view must be a path or {path, dim}");
    }
    int max_index = 0;
    auto rows = detail::load_view_file(base / rel, max_index);
    if (static_cast<std::int64_t>(rows.size()) != ds.n)
      throw FormatError("manifest: view file " + rel + " has " +
                        std::to_string(rows.size()) + " rows but there are " +
                        std::to_string(ds.n) + " labels");
    if (declared_dim > 0 && declared_dim < max_index)
      throw FormatError("manifest: view " + rel + " declares dim " +
                        std::to_string(declared_dim) + " but contains index " +
                        std::to_string(max_index));
    ds.dims.push_back(declared_dim > 0 ? declared_dim : max_index);
    ds.views.push_back(std::move(rows));
  }
  validate(ds);
  return ds;
}

// Writes manifest.json, labels.txt and view_<j>.txt into `dir`.
// Returns the manifest path. load_manifest on the result reproduces the
// dataset value-for-value.
inline std::filesystem::path write_dataset(const MultiViewDataset& ds,
                                           const std::filesystem::path& dir) {
  validate(ds);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  {
    std::ofstream out(dir / "labels.txt");
    if (!out) throw IoError("cannot write " + (dir / "labels.txt").string());
    for (int y : ds.labels) out << (y == 1 ? "+1" : "-1") << "\n";
  }
  nlohmann::json views = nlohmann::json::array();
  for (int j = 0; j < ds.m; ++j) {
    const std::string name = "view_" + std::to_string(j + 1) + ".txt";
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    for (const SparseRow& row : ds.views[j]) {
      if (row.idx.empty())
        throw FormatError("write_dataset: empty row cannot be represented "
                          "(blank lines are forbidden)");
      for (std::size_t t = 0; t < row.idx.size(); ++t) {
        if (t) out << ' ';
        out << (row.idx[t] + 1) << ':' << format_double(row.val[t]);
      }
      out << "\n";
    }
    views.push_back({{"path", name}, {"dim", ds.dims[j]}});
  }
  nlohmann::json doc{{"version", 1}, {"labels", "labels.txt"}, {"views", views}};
  const auto manifest = dir / "manifest.json";
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write " + manifest.string());
  out << doc.dump(2) << "\n";
  return manifest;
}

}  // namespace mvperf
