#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

#include "cams/data_io.hpp"
#include "cams/errors.hpp"
#include "cams/partition.hpp"
#include "cams/rng.hpp"

namespace cams {

struct KmeansTrace {
  Partition partition;
  std::vector<double> wcss_history;  // within-cluster sum of squares after each update
  int iters = 0;
};

// Lloyd iterations with distance-weighted (k-means++ style) seeding.
// Empty clusters are repaired by reseeding on the point farthest from its
// assigned centroid; ties everywhere break toward the smallest index, so a
// run is fully determined by (data, k, seed, max_iters).
inline KmeansTrace run_kmeans_traced(const Dataset& data, int k, std::uint64_t seed,
                                     int max_iters = 100) {
  const int n = data.num_samples();
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds sample count");
  const Eigen::MatrixXd& x = data.features;
  SplitRng rng(seed);

  // Seeding: first center uniform, then each next center sampled with
  // probability proportional to squared distance from the chosen set.
  Eigen::MatrixXd centers(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  {
    int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = x.row(first);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = (x.row(i) - centers.row(c - 1)).squaredNorm();
        if (d < d2[i]) d2[i] = d;
        total += d2[i];
      }
      int pick = 0;
      if (total > 0.0) {
        const double target = rng.next_double() * total;
        double acc = 0.0;
        pick = n - 1;
        for (int i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      }
      centers.row(c) = x.row(pick);
    }
  }

  std::vector<int> assign(n, -1);
  std::vector<int> prev_assign;
  std::vector<int> sizes(k, 0);
  KmeansTrace trace;

  for (int iter = 0; iter < max_iters; ++iter) {
    prev_assign = assign;

    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      assign[i] = best_c;
    }

    std::fill(sizes.begin(), sizes.end(), 0);
    for (int i = 0; i < n; ++i) ++sizes[assign[i]];

    // Reseed each empty cluster with the point farthest from its centroid,
    // stealing only from clusters that keep at least one member.
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      double far = -1.0;
      int far_i = -1;
      for (int i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double d = (x.row(i) - centers.row(assign[i])).squaredNorm();
        if (d > far) {
          far = d;
          far_i = i;
        }
      }
      if (far_i < 0) break;  // repair exhausted
      --sizes[assign[far_i]];
      assign[far_i] = c;
      sizes[c] = 1;
    }

    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0) centers.row(c).setZero();
    for (int i = 0; i < n; ++i) centers.row(assign[i]) += x.row(i);
    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0) centers.row(c) /= static_cast<double>(sizes[c]);

    double wcss = 0.0;
    for (int i = 0; i < n; ++i) wcss += (x.row(i) - centers.row(assign[i])).squaredNorm();
    trace.wcss_history.push_back(wcss);
    trace.iters = iter + 1;

    if (assign == prev_assign) break;
  }

  trace.partition = compact_partition(assign);
  return trace;
}

inline Partition run_kmeans(const Dataset& data, int k, std::uint64_t seed, int max_iters = 100) {
  return run_kmeans_traced(data, k, seed, max_iters).partition;
}

}  // namespace cams
