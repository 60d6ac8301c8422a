#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cams/errors.hpp"
#include "cams/kmeans.hpp"
#include "cams/partition.hpp"
#include "cams/rng.hpp"

namespace cams {

struct PoolResult {
  Ensemble ensemble;
  std::vector<int> requested_k;  // the K drawn for each member (achieved l may differ)
};

// Candidate pool: pool_size K-means runs with K drawn uniformly from
// {2, ..., ceil(sqrt(n))}. Member i depends only on (seed, i), so pool
// generation is order-independent and safe to parallelize.
inline PoolResult generate_pool(const Dataset& data, int pool_size, std::uint64_t seed) {
  const int n = data.num_samples();
  if (pool_size < 1) throw std::invalid_argument("pool: size must be positive");
  if (n < 4) throw std::domain_error("pool: need n >= 4 so that the K range [2, sqrt(n)] is nonempty");
  const int k_max = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));

  PoolResult pool;
  pool.ensemble.members.resize(pool_size);
  pool.requested_k.resize(pool_size);
  const SplitRng root(seed);
  for (int i = 0; i < pool_size; ++i) {
    SplitRng member = root.derive(kStreamPool, static_cast<std::uint64_t>(i));
    const int k = static_cast<int>(member.derive(kStreamKchoice).uniform_int(2, k_max));
    const std::uint64_t km_seed = member.derive(kStreamKmeansSeed).next_u64();
    pool.requested_k[i] = k;
    pool.ensemble.members[i] = run_kmeans(data, k, km_seed);
  }
  return pool;
}

// m distinct members chosen uniformly without replacement (Floyd's method),
// pool order preserved.
inline Ensemble sample_ensemble(const Ensemble& pool, int m, std::uint64_t seed) {
  const int pool_m = pool.size();
  if (m < 1) throw std::invalid_argument("sample: m must be positive");
  if (m > pool_m) throw std::invalid_argument("sample: m exceeds pool size");
  SplitRng rng(seed);
  std::vector<int> chosen;
  chosen.reserve(m);
  for (int j = pool_m - m; j < pool_m; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(chosen.begin(), chosen.end(), t) != chosen.end())
      chosen.push_back(j);
    else
      chosen.push_back(t);
  }
  std::sort(chosen.begin(), chosen.end());
  Ensemble out;
  out.members.reserve(m);
  for (int idx : chosen) out.members.push_back(pool.members[idx]);
  return out;
}

// Pool CSV: one row per partition, n integer labels per row.
inline void save_ensemble_csv(const Ensemble& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const Partition& p : e.members) {
    for (int i = 0; i < p.size(); ++i) {
      if (i) out << ',';
      out << p.labels[i];
    }
    out << '\n';
  }
}

inline Ensemble load_ensemble_csv(const std::string& path) {
  Ensemble e;
  const std::vector<std::string> lines = detail::read_lines(path);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string line = detail::trim(lines[li]);
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv(line);
    std::vector<int> raw(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (!detail::try_parse_double(cells[c], v) || v != std::floor(v))
        throw ParseError(path + ":" + std::to_string(li + 1) + ": label '" + cells[c] +
                         "' is not an integer");
      raw[c] = static_cast<int>(v);
    }
    e.members.push_back(compact_partition(raw));
  }
  validate_ensemble(e);
  return e;
}

}  // namespace cams
