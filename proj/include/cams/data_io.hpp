#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cams/errors.hpp"
#include "cams/partition.hpp"

namespace cams {

// Sample-by-feature matrix with optional ground-truth labels, ids compacted
// to 0..K-1 in order of first appearance.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;  // empty when no ground truth
  std::string name;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int num_features() const { return static_cast<int>(features.cols()); }
  bool has_labels() const { return !labels.empty(); }
  int num_classes() const {
    int k = 0;
    for (int lab : labels) k = std::max(k, lab + 1);
    return k;
  }
  Partition truth() const {
    Partition p;
    p.labels = labels;
    p.num_clusters = num_classes();
    return p;
  }
};

enum class LabelMode { EmbeddedLastColumn, SeparateFile, None };

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

inline bool try_parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Compacts raw label tokens (integers or strings) to contiguous 0-based ids
// in order of first appearance.
inline std::vector<int> compact_labels(const std::vector<std::string>& raw) {
  std::vector<int> out(raw.size());
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), raw[i]);
    if (it == seen.end()) {
      seen.push_back(raw[i]);
      out[i] = static_cast<int>(seen.size()) - 1;
    } else {
      out[i] = static_cast<int>(it - seen.begin());
    }
  }
  return out;
}

// Loads a comma-separated dataset, one sample per row. An optional header row
// is auto-detected: if a cell that should be numeric does not parse on the
// first line, that line is skipped. Feature cells on any later line must
// parse as finite reals.
inline Dataset load_dataset(const std::string& path, LabelMode mode,
                            const std::string& label_path = "") {
  const std::vector<std::string> lines = detail::read_lines(path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_tokens;
  int expected_cells = -1;
  bool first_content_line = true;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string line = detail::trim(lines[li]);
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv(line);
    const int feature_cells =
        static_cast<int>(cells.size()) - (mode == LabelMode::EmbeddedLastColumn ? 1 : 0);

    if (first_content_line) {
      bool numeric = feature_cells >= 1;
      for (int c = 0; c < feature_cells && numeric; ++c) {
        double v;
        numeric = detail::try_parse_double(cells[c], v);
      }
      first_content_line = false;
      if (!numeric) continue;  // header row
    }

    if (expected_cells < 0) {
      expected_cells = static_cast<int>(cells.size());
      if (feature_cells < 1)
        throw ParseError(path + ":" + std::to_string(li + 1) + ": no feature columns");
    } else if (static_cast<int>(cells.size()) != expected_cells) {
      throw ParseError(path + ":" + std::to_string(li + 1) + ": expected " +
                       std::to_string(expected_cells) + " columns, got " +
                       std::to_string(cells.size()));
    }

    std::vector<double> row(feature_cells);
    for (int c = 0; c < feature_cells; ++c) {
      double v;
      if (!detail::try_parse_double(cells[c], v) || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(li + 1) + ": cell '" + cells[c] +
                         "' is not a finite number");
      row[c] = v;
    }
    rows.push_back(std::move(row));
    if (mode == LabelMode::EmbeddedLastColumn) label_tokens.push_back(cells.back());
  }

  const int n = static_cast<int>(rows.size());
  if (n < 2) throw ValidationError(path + ": need at least 2 samples, got " + std::to_string(n));
  const int d = static_cast<int>(rows.front().size());

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.features.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) ds.features(i, j) = rows[i][j];

  if (mode == LabelMode::SeparateFile) {
    for (const std::string& raw : detail::read_lines(label_path)) {
      const std::string tok = detail::trim(raw);
      if (!tok.empty()) label_tokens.push_back(tok);
    }
  }
  if (mode != LabelMode::None) {
    if (static_cast<int>(label_tokens.size()) != n)
      throw ValidationError(path + ": " + std::to_string(label_tokens.size()) +
                            " labels for " + std::to_string(n) + " samples");
    ds.labels = compact_labels(label_tokens);
  }
  return ds;
}

// Writes features (and the compacted label column, when present) back to CSV
// with enough digits that a reload is bit-identical.
inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (int i = 0; i < ds.num_samples(); ++i) {
    for (int j = 0; j < ds.num_features(); ++j) {
      if (j) out << ',';
      out << detail::format_double(ds.features(i, j));
    }
    if (ds.has_labels()) out << ',' << ds.labels[i];
    out << '\n';
  }
}

// Optional per-column min-max scaling (off by default in every pipeline).
inline void normalize_minmax(Dataset& ds) {
  for (int j = 0; j < ds.num_features(); ++j) {
    const double lo = ds.features.col(j).minCoeff();
    const double hi = ds.features.col(j).maxCoeff();
    if (hi > lo)
      ds.features.col(j) = (ds.features.col(j).array() - lo) / (hi - lo);
    else
      ds.features.col(j).setZero();
  }
}

}  // namespace cams
