#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "cams/errors.hpp"
#include "cams/matrix_io.hpp"
#include "cams/partition.hpp"

namespace cams {

enum class CaKind { PlainCa, Lwca, Pts, Enhanced };

inline const char* to_string(CaKind k) {
  switch (k) {
    case CaKind::PlainCa: return "ca";
    case CaKind::Lwca: return "lwca";
    case CaKind::Pts: return "pts";
    case CaKind::Enhanced: return "enhanced";
  }
  return "?";
}

// Symmetric pairwise similarity in [0,1]. For kind PlainCa every entry is an
// integer multiple of 1/m and the diagonal is all ones.
struct CoassocMatrix {
  Eigen::MatrixXd values;
  CaKind kind = CaKind::PlainCa;

  int size() const { return static_cast<int>(values.rows()); }
};

inline void validate_similarity(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() != a.cols()) throw ValidationError(std::string(who) + ": matrix is not square");
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j) {
      if (a(i, j) != a(j, i)) throw ValidationError(std::string(who) + ": matrix is not symmetric");
      if (!(a(i, j) >= 0.0 && a(i, j) <= 1.0))
        throw ValidationError(std::string(who) + ": entry outside [0,1]");
    }
}

// Co-occurrence frequency of every sample pair over the ensemble.
inline CoassocMatrix build_ca(const Ensemble& ensemble) {
  validate_ensemble(ensemble);
  const int n = ensemble.num_items();
  const int m = ensemble.size();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
  for (const Partition& p : ensemble.members)
    for (int i = 0; i < n; ++i) {
      const int li = p.labels[i];
      for (int j = i + 1; j < n; ++j)
        if (li == p.labels[j]) ++counts(i, j);
    }
  CoassocMatrix ca;
  ca.kind = CaKind::PlainCa;
  ca.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    ca.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = static_cast<double>(counts(i, j)) / static_cast<double>(m);
      ca.values(i, j) = v;
      ca.values(j, i) = v;
    }
  }
  return ca;
}

// Entropy of a cluster across the whole ensemble: how consistently the other
// base clusterings keep its members together. p(c, c') = |c n c'| / |c|.
inline double cluster_uncertainty(const Ensemble& ensemble, int partition_index, int cluster_id) {
  validate_ensemble(ensemble);
  const Partition& home = ensemble.members.at(partition_index);
  std::vector<int> members;
  for (int i = 0; i < home.size(); ++i)
    if (home.labels[i] == cluster_id) members.push_back(i);
  if (members.empty()) throw std::domain_error("cluster_uncertainty: empty cluster");

  const double size = static_cast<double>(members.size());
  double u = 0.0;
  for (const Partition& other : ensemble.members) {
    std::vector<int> inter(other.num_clusters, 0);
    for (int i : members) ++inter[other.labels[i]];
    for (int cnt : inter) {
      if (cnt == 0) continue;
      const double p = static_cast<double>(cnt) / size;
      u -= p * std::log2(p);
    }
  }
  return u;
}

struct LwcaParams {
  double theta = 0.4;
};

// Reliability weight per cluster, decaying with its ensemble entropy.
inline std::vector<std::vector<double>> eci_weights(const Ensemble& ensemble, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("lwca: theta must be positive");
  const int m = ensemble.size();
  std::vector<std::vector<double>> eci(m);
  for (int pi = 0; pi < m; ++pi) {
    const int l = ensemble.members[pi].num_clusters;
    eci[pi].resize(l);
    for (int c = 0; c < l; ++c)
      eci[pi][c] = std::exp(-cluster_uncertainty(ensemble, pi, c) / (theta * m));
  }
  return eci;
}

// Locally weighted CA: co-occurrences scaled by the originating cluster's
// reliability, then symmetrized as (A + A^T)/2.
inline CoassocMatrix build_lwca(const Ensemble& ensemble, const LwcaParams& params = {}) {
  validate_ensemble(ensemble);
  const int n = ensemble.num_items();
  const int m = ensemble.size();
  const std::vector<std::vector<double>> eci = eci_weights(ensemble, params.theta);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int pi = 0; pi < m; ++pi) {
    const Partition& p = ensemble.members[pi];
    for (int i = 0; i < n; ++i) {
      const int li = p.labels[i];
      const double w = eci[pi][li];
      a(i, i) += w;
      for (int j = i + 1; j < n; ++j)
        if (li == p.labels[j]) a(i, j) += w;
    }
  }
  CoassocMatrix lwca;
  lwca.kind = CaKind::Lwca;
  lwca.values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      // the weight is a property of the shared cluster, so A is symmetric
      // already; averaging the two half-sums keeps that exact
      const double v = a(i, j) / static_cast<double>(m);
      lwca.values(i, j) = v;
      lwca.values(j, i) = v;
    }
  return lwca;
}

// Support set Omega = {(i,j) : ca[i][j] >= alpha} (inclusive) and the matrix
// of retained entries. pairs lists the upper triangle including the diagonal;
// the mask answers membership for both orientations.
struct HighConfidence {
  int n = 0;
  double alpha = 0.0;
  std::vector<std::pair<int, int>> pairs;  // i <= j, sorted
  std::vector<std::uint8_t> mask;          // n*n row-major
  Eigen::MatrixXd h;

  bool in_omega(int i, int j) const { return mask[static_cast<std::size_t>(i) * n + j] != 0; }
};

inline HighConfidence extract_hc(const CoassocMatrix& ca_tilde, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("extract_hc: alpha must lie in [0,1]");
  validate_similarity(ca_tilde.values, "extract_hc");
  const int n = ca_tilde.size();
  HighConfidence hc;
  hc.n = n;
  hc.alpha = alpha;
  hc.mask.assign(static_cast<std::size_t>(n) * n, 0);
  hc.h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = ca_tilde.values(i, j);
      if (v >= alpha) {
        hc.pairs.emplace_back(i, j);
        hc.mask[static_cast<std::size_t>(i) * n + j] = 1;
        hc.mask[static_cast<std::size_t>(j) * n + i] = 1;
        hc.h(i, j) = v;
        hc.h(j, i) = v;
      }
    }
  return hc;
}

inline void save_omega_csv(const HighConfidence& hc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "i,j,h\n";
  for (auto [i, j] : hc.pairs)
    out << i << ',' << j << ',' << detail::format_double(hc.h(i, j)) << '\n';
}

struct Laplacian {
  Eigen::MatrixXd phi;
};

// phi = diag(H 1) - H. Diagonal entries of H cancel out, so self-loops
// contribute nothing; every row sums to zero by construction.
inline Laplacian build_laplacian(const HighConfidence& hc) {
  const int n = hc.n;
  Laplacian lap;
  lap.phi = -hc.h;
  for (int i = 0; i < n; ++i) lap.phi(i, i) += hc.h.row(i).sum();
  return lap;
}

}  // namespace cams
