#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cams/data_io.hpp"
#include "cams/errors.hpp"

namespace cams {

inline void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::vector<std::vector<double>> rows;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string line = detail::trim(lines[li]);
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv(line);
    if (!rows.empty() && cells.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(li + 1) + ": ragged row");
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!detail::try_parse_double(cells[c], row[c]))
        throw ParseError(path + ":" + std::to_string(li + 1) + ": cell '" + cells[c] +
                         "' is not a number");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

// Compact binary container for square matrices: magic "CAM1", little-endian
// u64 n, then n*n IEEE-754 doubles in row-major order.
inline void save_matrix_cam(const Eigen::MatrixXd& m, const std::string& path) {
  if (m.rows() != m.cols()) throw ValidationError(path + ": container holds square matrices only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out.write("CAM1", 4);
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  out.write(reinterpret_cast<const char*>(&n), 8);
  std::vector<double> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    out.write(reinterpret_cast<const char*>(row.data()), 8 * static_cast<std::streamsize>(row.size()));
  }
}

inline Eigen::MatrixXd load_matrix_cam(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CAM1", 4) != 0)
    throw ParseError(path + ": bad magic bytes (expected CAM1)");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || n == 0) throw ParseError(path + ": bad matrix size");
  Eigen::MatrixXd m(n, n);
  std::vector<double> row(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), 8 * static_cast<std::streamsize>(n));
    if (!in) throw ParseError(path + ": truncated payload");
    for (std::uint64_t j = 0; j < n; ++j) m(i, j) = row[j];
  }
  return m;
}

// Dispatches on the ".cam" extension, else dense CSV.
inline Eigen::MatrixXd load_matrix_auto(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".cam") return load_matrix_cam(path);
  return load_matrix_csv(path);
}

inline void save_matrix_auto(const Eigen::MatrixXd& m, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".cam")
    save_matrix_cam(m, path);
  else
    save_matrix_csv(m, path);
}

// 8-bit grayscale PGM; entries are scaled by 255 and rounded half-up, then
// clipped to [0,255] (signed difference matrices clip at black).
inline void save_matrix_pgm(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double scaled = std::floor(m(i, j) * 255.0 + 0.5);
      const unsigned char byte =
          static_cast<unsigned char>(scaled < 0.0 ? 0.0 : (scaled > 255.0 ? 255.0 : scaled));
      out.put(static_cast<char>(byte));
    }
}

inline void save_labels(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (int lab : labels) out << lab << '\n';
}

inline std::vector<int> load_labels(const std::string& path) {
  std::vector<std::string> tokens;
  for (const std::string& raw : detail::read_lines(path)) {
    const std::string tok = detail::trim(raw);
    if (!tok.empty()) tokens.push_back(tok);
  }
  return compact_labels(tokens);
}

}  // namespace cams
