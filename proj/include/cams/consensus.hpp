#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include "cams/coassoc.hpp"
#include "cams/errors.hpp"
#include "cams/partition.hpp"

namespace cams {

enum class Linkage { Average, Complete };

inline Linkage linkage_from_string(const std::string& s) {
  if (s == "average") return Linkage::Average;
  if (s == "complete") return Linkage::Complete;
  throw std::invalid_argument("linkage must be 'average' or 'complete'");
}

struct Merge {
  int cluster_a = 0;  // dendrogram ids: leaves 0..n-1, merge t creates n+t
  int cluster_b = 0;
  double similarity = 0.0;
};

struct Dendrogram {
  int n = 0;
  std::vector<Merge> merges;
};

// Agglomerative clustering on a similarity matrix, merging the most similar
// pair until k clusters remain. Linkage values follow the Lance-Williams
// recurrences (average: size-weighted mean; complete: minimum). Ties break on
// the lexicographically smallest (min member a, min member b) pair, so runs
// are reproducible bit for bit.
inline std::pair<Partition, Dendrogram> hac(const CoassocMatrix& similarity, int k,
                                            Linkage linkage) {
  validate_similarity(similarity.values, "hac");
  const int n = similarity.size();
  if (k < 1 || k > n) throw std::invalid_argument("hac: k must lie in [1, n]");

  // A cluster lives in the slot of its smallest member, so slot order doubles
  // as the deterministic tie-break order.
  Eigen::MatrixXd link = similarity.values;
  std::vector<char> active(n, 1);
  std::vector<int> size(n, 1);
  std::vector<int> dendro_id(n);
  std::vector<int> version(n, 0);
  for (int i = 0; i < n; ++i) dendro_id[i] = i;

  struct Candidate {
    double sim;
    int a, b;
    int va, vb;
  };
  struct Worse {
    bool operator()(const Candidate& x, const Candidate& y) const {
      if (x.sim != y.sim) return x.sim < y.sim;
      if (x.a != y.a) return x.a > y.a;
      return x.b > y.b;
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, Worse> queue;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) queue.push({link(i, j), i, j, 0, 0});

  Dendrogram dendro;
  dendro.n = n;
  std::vector<int> merged_into(n, -1);
  int clusters = n;
  while (clusters > k) {
    Candidate top;
    for (;;) {
      if (queue.empty()) throw NumericalError("hac: merge queue drained early");
      top = queue.top();
      queue.pop();
      if (active[top.a] && active[top.b] && version[top.a] == top.va &&
          version[top.b] == top.vb)
        break;
    }
    const int a = top.a, b = top.b;
    dendro.merges.push_back({dendro_id[a], dendro_id[b], top.sim});

    // Merge b into a (a < b, so a keeps the smallest member index).
    for (int t = 0; t < n; ++t) {
      if (!active[t] || t == a || t == b) continue;
      double merged;
      if (linkage == Linkage::Average)
        merged = (size[a] * link(a, t) + size[b] * link(b, t)) /
                 static_cast<double>(size[a] + size[b]);
      else
        merged = std::min(link(a, t), link(b, t));
      link(a, t) = merged;
      link(t, a) = merged;
    }
    size[a] += size[b];
    active[b] = 0;
    merged_into[b] = a;
    ++version[a];
    dendro_id[a] = n + static_cast<int>(dendro.merges.size()) - 1;
    --clusters;

    for (int t = 0; t < n; ++t) {
      if (!active[t] || t == a) continue;
      const int lo = std::min(t, a), hi = std::max(t, a);
      queue.push({link(lo, hi), lo, hi, version[lo], version[hi]});
    }
  }

  // Label the survivors by slot order (slot index = smallest member index).
  std::vector<int> slot_label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (active[i]) slot_label[i] = next++;

  Partition part;
  part.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    int s = i;
    while (merged_into[s] >= 0) s = merged_into[s];
    for (int t = i; merged_into[t] >= 0;) {  // path compression
      const int up = merged_into[t];
      merged_into[t] = merged_into[up] >= 0 ? s : up;
      t = up;
    }
    part.labels[i] = slot_label[s];
  }
  part.num_clusters = k;
  return {part, dendro};
}

inline void save_dendrogram_csv(const Dendrogram& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "step,cluster_a,cluster_b,similarity\n";
  for (std::size_t t = 0; t < d.merges.size(); ++t)
    out << t << ',' << d.merges[t].cluster_a << ',' << d.merges[t].cluster_b << ','
        << detail::format_double(d.merges[t].similarity) << '\n';
}

}  // namespace cams
