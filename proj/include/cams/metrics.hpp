#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cams/coassoc.hpp"
#include "cams/errors.hpp"
#include "cams/partition.hpp"

namespace cams {

struct MetricsReport {
  double ari = 0, nmi = 0, fscore = 0, accuracy = 0, purity = 0;
};

namespace detail {

inline std::vector<std::vector<std::int64_t>> contingency(const Partition& p,
                                                          const Partition& q) {
  std::vector<std::vector<std::int64_t>> table(p.num_clusters,
                                               std::vector<std::int64_t>(q.num_clusters, 0));
  for (int i = 0; i < p.size(); ++i) ++table[p.labels[i]][q.labels[i]];
  return table;
}

inline double pairs2(std::int64_t c) { return 0.5 * static_cast<double>(c) * static_cast<double>(c - 1); }

// Max-weight assignment on a rectangular score table (Hungarian algorithm on
// the negated costs). Returns the optimal total score.
inline double max_assignment(const std::vector<std::vector<std::int64_t>>& score) {
  const int rows = static_cast<int>(score.size());
  const int cols = static_cast<int>(score[0].size());
  const int dim = std::max(rows, cols);
  const double kInf = std::numeric_limits<double>::infinity();

  // cost(i, j) = -score padded with zeros to a square matrix
  std::vector<double> u(dim + 1, 0), v(dim + 1, 0);
  std::vector<int> match(dim + 1, 0);  // match[j] = row assigned to column j
  std::vector<int> way(dim + 1, 0);
  auto cost = [&](int i, int j) -> double {
    if (i < rows && j < cols) return -static_cast<double>(score[i][j]);
    return 0.0;
  };
  for (int i = 1; i <= dim; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(dim + 1, kInf);
    std::vector<char> used(dim + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= dim; ++j)
    if (match[j] > 0) total += -cost(match[j] - 1, j - 1);
  return total;
}

}  // namespace detail

// External clustering quality: pair-counting ARI and F-score, NMI normalized
// by the geometric mean of entropies, Accuracy through an optimal cluster to
// class assignment, and Purity.
inline MetricsReport compute_metrics(const Partition& pred, const Partition& truth) {
  if (pred.size() != truth.size()) throw ValidationError("metrics: partition length mismatch");
  const int n = pred.size();
  if (n < 2) throw std::domain_error("metrics: need at least 2 samples for pairwise metrics");
  validate_partition(pred);
  validate_partition(truth);

  const auto table = detail::contingency(pred, truth);
  std::vector<std::int64_t> row_sum(pred.num_clusters, 0), col_sum(truth.num_clusters, 0);
  for (int i = 0; i < pred.num_clusters; ++i)
    for (int j = 0; j < truth.num_clusters; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
    }

  MetricsReport rep;

  // ARI
  double sum_cells = 0, sum_rows = 0, sum_cols = 0;
  for (int i = 0; i < pred.num_clusters; ++i)
    for (int j = 0; j < truth.num_clusters; ++j) sum_cells += detail::pairs2(table[i][j]);
  for (std::int64_t s : row_sum) sum_rows += detail::pairs2(s);
  for (std::int64_t s : col_sum) sum_cols += detail::pairs2(s);
  const double total_pairs = detail::pairs2(n);
  const double expected = sum_rows * sum_cols / total_pairs;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) {
    // both partitions degenerate (all-singletons or single-cluster)
    rep.ari = (pred.labels == truth.labels) ? 1.0 : 0.0;
  } else {
    rep.ari = (sum_cells - expected) / (max_index - expected);
  }

  // NMI (geometric-mean normalization)
  double h_pred = 0, h_truth = 0, mi = 0;
  for (std::int64_t s : row_sum)
    if (s > 0) h_pred -= (double(s) / n) * std::log(double(s) / n);
  for (std::int64_t s : col_sum)
    if (s > 0) h_truth -= (double(s) / n) * std::log(double(s) / n);
  for (int i = 0; i < pred.num_clusters; ++i)
    for (int j = 0; j < truth.num_clusters; ++j) {
      const std::int64_t c = table[i][j];
      if (c > 0)
        mi += (double(c) / n) *
              std::log(double(n) * double(c) / (double(row_sum[i]) * double(col_sum[j])));
    }
  if (h_pred > 0.0 && h_truth > 0.0)
    rep.nmi = mi / std::sqrt(h_pred * h_truth);
  else
    rep.nmi = (pred.num_clusters == truth.num_clusters && pred.num_clusters == 1) ? 1.0 : 0.0;

  // pairwise F-score (same-cluster pairs are the positives)
  const double tp = sum_cells;
  if (sum_rows == 0.0 && sum_cols == 0.0) {
    rep.fscore = 1.0;  // both all-singletons: identical pair structure
  } else {
    const double precision = sum_rows > 0.0 ? tp / sum_rows : 0.0;
    const double recall = sum_cols > 0.0 ? tp / sum_cols : 0.0;
    rep.fscore = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }

  rep.accuracy = detail::max_assignment(table) / static_cast<double>(n);

  double purity = 0;
  for (int i = 0; i < pred.num_clusters; ++i)
    purity += static_cast<double>(*std::max_element(table[i].begin(), table[i].end()));
  rep.purity = purity / static_cast<double>(n);

  return rep;
}

// Pair-level reliability of a plain CA matrix against ground truth: for each
// distinct entry value, the precision of pairs at that value and the recall
// of true same-class pairs at threshold >= value.
struct ReliabilityEntry {
  double value = 0;
  std::int64_t count = 0;      // pairs (i < j) whose CA entry equals value
  double precision = 0;        // P(same true class | entry == value)
  double recall = 0;           // fraction of same-class pairs with entry >= value
};

struct ReliabilityProfile {
  std::vector<ReliabilityEntry> entries;  // ascending by value
};

inline ReliabilityProfile reliability_profile(const CoassocMatrix& ca_tilde,
                                              const Partition& truth) {
  if (truth.size() != ca_tilde.size())
    throw std::invalid_argument("reliability: truth length does not match matrix");
  validate_partition(truth);
  const int n = ca_tilde.size();

  std::map<double, std::pair<std::int64_t, std::int64_t>> bins;  // value -> (pairs, same-class)
  std::int64_t total_same = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool same = truth.labels[i] == truth.labels[j];
      auto& bin = bins[ca_tilde.values(i, j)];
      ++bin.first;
      if (same) {
        ++bin.second;
        ++total_same;
      }
    }

  ReliabilityProfile profile;
  profile.entries.reserve(bins.size());
  std::int64_t same_at_or_above = total_same;
  for (auto it = bins.begin(); it != bins.end(); ++it) {
    ReliabilityEntry e;
    e.value = it->first;
    e.count = it->second.first;
    e.precision = static_cast<double>(it->second.second) / static_cast<double>(e.count);
    e.recall = total_same > 0
                   ? static_cast<double>(same_at_or_above) / static_cast<double>(total_same)
                   : 1.0;
    same_at_or_above -= it->second.second;
    profile.entries.push_back(e);
  }
  return profile;
}

inline void save_profile_csv(const ReliabilityProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "value,count,precision,recall\n";
  for (const ReliabilityEntry& e : p.entries)
    out << detail::format_double(e.value) << ',' << e.count << ','
        << detail::format_double(e.precision) << ',' << detail::format_double(e.recall) << '\n';
}

}  // namespace cams
