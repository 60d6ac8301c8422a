#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "cams/coassoc.hpp"
#include "cams/errors.hpp"
#include "cams/partition.hpp"

namespace cams {

// Samples with identical cluster membership across every base clustering are
// indistinguishable to the ensemble; each such group is one microcluster.
struct MicroclusterMap {
  std::vector<int> assignment;  // sample -> microcluster id
  std::vector<int> sizes;
  int n_prime = 0;
};

inline MicroclusterMap form_microclusters(const Ensemble& ensemble) {
  validate_ensemble(ensemble);
  const int n = ensemble.num_items();
  const int m = ensemble.size();

  struct SigHash {
    std::size_t operator()(const std::vector<int>& sig) const {
      std::size_t h = 1469598103934665603ull;
      for (int v : sig) {
        h ^= static_cast<std::size_t>(v) + 0x9e3779b9u;
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::vector<int>, int, SigHash> ids;

  MicroclusterMap map;
  map.assignment.resize(n);
  std::vector<int> sig(m);
  for (int i = 0; i < n; ++i) {  // scan order numbers microclusters by smallest member
    for (int k = 0; k < m; ++k) sig[k] = ensemble.members[k].labels[i];
    auto [it, inserted] = ids.try_emplace(sig, static_cast<int>(ids.size()));
    map.assignment[i] = it->second;
    if (inserted)
      map.sizes.push_back(1);
    else
      ++map.sizes[it->second];
  }
  map.n_prime = static_cast<int>(ids.size());
  return map;
}

// Co-occurrence frequencies between microclusters. Every microcluster sits in
// exactly one cluster of each base clustering by construction.
inline CoassocMatrix build_mca(const Ensemble& ensemble, const MicroclusterMap& map) {
  validate_ensemble(ensemble);
  const int n = ensemble.num_items();
  const int m = ensemble.size();
  const int np = map.n_prime;

  std::vector<int> rep(np, -1);  // first member of each microcluster
  for (int i = 0; i < n; ++i)
    if (rep[map.assignment[i]] < 0) rep[map.assignment[i]] = i;

  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i)
      if (ensemble.members[k].labels[i] != ensemble.members[k].labels[rep[map.assignment[i]]])
        throw std::logic_error("mca: microcluster spans two clusters in partition " +
                               std::to_string(k));

  CoassocMatrix mca;
  mca.kind = CaKind::PlainCa;
  mca.values.resize(np, np);
  for (int i = 0; i < np; ++i) {
    mca.values(i, i) = 1.0;
    for (int j = i + 1; j < np; ++j) {
      int together = 0;
      for (int k = 0; k < m; ++k)
        if (ensemble.members[k].labels[rep[i]] == ensemble.members[k].labels[rep[j]]) ++together;
      const double v = static_cast<double>(together) / static_cast<double>(m);
      mca.values(i, j) = v;
      mca.values(j, i) = v;
    }
  }
  return mca;
}

struct PtsParams {
  int v = 0;  // top-V links kept per node
  int t = 20; // random-walk step count
};

// Default neighborhood size: 5*ceil(log2 n'), capped at n'-1.
inline int default_pts_v(int n_prime) {
  const int log_term = n_prime > 1 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(n_prime)))) : 1;
  return std::min(n_prime - 1, std::max(1, 5 * log_term));
}

// Probability-trajectory similarity. Keeps the top-V links per node, runs a
// size-weighted random walk, and compares nodes by the cosine of their
// concatenated T-step row trajectories. cos(R_i, R_j) is evaluated through
// the Gram identity sum_s Q^s (Q^s)^T, which avoids storing trajectories.
inline CoassocMatrix build_pts(const CoassocMatrix& mca, const std::vector<int>& sizes,
                               const PtsParams& params) {
  const int np = mca.size();
  if (static_cast<int>(sizes.size()) != np)
    throw ValidationError("pts: size vector does not match matrix");
  if (params.v < 1 || params.v >= np)
    throw std::invalid_argument("pts: v must lie in [1, n'-1]");
  if (params.t < 1) throw std::invalid_argument("pts: t must be positive");

  // Sparse elite-neighbor graph, re-symmetrized by elementwise max.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(np, np);
  std::vector<int> order(np);
  for (int i = 0; i < np; ++i) {
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (mca.values(i, a) != mca.values(i, b)) return mca.values(i, a) > mca.values(i, b);
      return a < b;
    });
    for (int r = 0; r < params.v; ++r) w(i, order[r]) = mca.values(i, order[r]);
    order.resize(np);
  }
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) w(i, j) = std::max(w(i, j), w(j, i));

  // Transition probabilities scale with link weight and target size.
  Eigen::MatrixXd q(np, np);
  for (int i = 0; i < np; ++i) {
    double mass = 0.0;
    for (int j = 0; j < np; ++j)
      if (j != i) mass += static_cast<double>(sizes[j]) * w(i, j);
    if (mass > 0.0) {
      for (int j = 0; j < np; ++j)
        q(i, j) = (j == i) ? 0.0 : static_cast<double>(sizes[j]) * w(i, j) / mass;
    } else {
      for (int j = 0; j < np; ++j)
        q(i, j) = (j == i) ? 0.0 : 1.0 / static_cast<double>(np - 1);
    }
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(np, np);
  Eigen::MatrixXd power = q;
  for (int s = 0; s < params.t; ++s) {
    gram.noalias() += power * power.transpose();
    if (s + 1 < params.t) power = power * q;
  }

  CoassocMatrix pts;
  pts.kind = CaKind::Pts;
  pts.values.resize(np, np);
  for (int i = 0; i < np; ++i) {
    pts.values(i, i) = 1.0;
    for (int j = i + 1; j < np; ++j) {
      const double denom = std::sqrt(gram(i, i) * gram(j, j));
      double v = denom > 0.0 ? gram(i, j) / denom : 0.0;
      v = std::min(1.0, std::max(0.0, v));
      pts.values(i, j) = v;
      pts.values(j, i) = v;
    }
  }
  return pts;
}

// Every sample inherits the label of its microcluster.
inline Partition lift_partition(const Partition& micro, const MicroclusterMap& map) {
  if (micro.size() != map.n_prime)
    throw ValidationError("lift: partition length does not match microcluster count");
  Partition out;
  out.labels.resize(map.assignment.size());
  for (std::size_t i = 0; i < map.assignment.size(); ++i)
    out.labels[i] = micro.labels[map.assignment[i]];
  out.num_clusters = micro.num_clusters;
  return out;
}

inline void save_microclusters_csv(const MicroclusterMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "sample_index,microcluster_id\n";
  for (std::size_t i = 0; i < map.assignment.size(); ++i)
    out << i << ',' << map.assignment[i] << '\n';
}

}  // namespace cams
