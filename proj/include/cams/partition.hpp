#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "cams/errors.hpp"

namespace cams {

// One clustering of n items: labels in 0..num_clusters-1, every id occupied.
struct Partition {
  std::vector<int> labels;
  int num_clusters = 0;

  int size() const { return static_cast<int>(labels.size()); }
};

// Relabels arbitrary integer ids to contiguous 0-based ids in order of first
// appearance. The mapping is a bijection on observed values, so co-membership
// is preserved.
inline Partition compact_partition(const std::vector<int>& raw) {
  Partition p;
  p.labels.resize(raw.size());
  std::vector<int> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), raw[i]);
    if (it == seen.end()) {
      seen.push_back(raw[i]);
      p.labels[i] = static_cast<int>(seen.size()) - 1;
    } else {
      p.labels[i] = static_cast<int>(it - seen.begin());
    }
  }
  p.num_clusters = static_cast<int>(seen.size());
  return p;
}

inline void validate_partition(const Partition& p) {
  if (p.labels.empty()) throw ValidationError("partition: empty label vector");
  if (p.num_clusters < 1 || p.num_clusters > p.size())
    throw ValidationError("partition: cluster count out of range");
  std::vector<char> occupied(p.num_clusters, 0);
  for (int lab : p.labels) {
    if (lab < 0 || lab >= p.num_clusters)
      throw ValidationError("partition: label " + std::to_string(lab) + " out of range");
    occupied[lab] = 1;
  }
  for (int c = 0; c < p.num_clusters; ++c)
    if (!occupied[c])
      throw ValidationError("partition: cluster " + std::to_string(c) + " is empty");
}

// m base clusterings over the same n items.
struct Ensemble {
  std::vector<Partition> members;

  int size() const { return static_cast<int>(members.size()); }
  int num_items() const { return members.empty() ? 0 : members.front().size(); }
};

inline void validate_ensemble(const Ensemble& e) {
  if (e.members.empty()) throw ValidationError("ensemble: no members");
  const int n = e.members.front().size();
  for (const Partition& p : e.members) {
    validate_partition(p);
    if (p.size() != n) throw ValidationError("ensemble: partition length mismatch");
  }
}

}  // namespace cams
