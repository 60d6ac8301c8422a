#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cams/data_io.hpp"
#include "cams/rng.hpp"

namespace cams {

// Gaussian mixture generators for the bundled benchmark stand-ins and for
// synthetic test instances. The originals referenced in the literature are
// not redistributed here; these mixtures reproduce their shape (sample count,
// dimensionality, class count and class-size profile) with a fixed seed, so
// every run of the tooling sees identical bytes.

struct BlobSpec {
  std::vector<double> center;
  double sigma = 1.0;
  int count = 0;
  std::vector<double> stretch;  // optional per-dimension sigma multipliers
};

inline Dataset make_blobs(const std::vector<BlobSpec>& blobs, std::uint64_t seed,
                          const std::string& name) {
  int n = 0;
  const int d = static_cast<int>(blobs.front().center.size());
  for (const BlobSpec& b : blobs) n += b.count;

  Dataset ds;
  ds.name = name;
  ds.features.resize(n, d);
  ds.labels.resize(n);

  SplitRng rng(seed);
  int row = 0;
  for (std::size_t c = 0; c < blobs.size(); ++c) {
    SplitRng blob_rng = rng.derive(c);
    for (int s = 0; s < blobs[c].count; ++s) {
      for (int j = 0; j < d; ++j) {
        const double u1 = 1.0 - blob_rng.next_double();
        const double u2 = blob_rng.next_double();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        const double scale = blobs[c].stretch.empty() ? 1.0 : blobs[c].stretch[j];
        ds.features(row, j) = blobs[c].center[j] + blobs[c].sigma * scale * z;
      }
      ds.labels[row] = static_cast<int>(c);
      ++row;
    }
  }
  return ds;
}

// 788 points in the plane, 7 groups of very different sizes, two of them
// close enough to confuse low-K base clusterings.
inline Dataset make_aggregation_like(std::uint64_t seed = 20230788) {
  return make_blobs(
      {
          {{5.5, 25.5}, 1.2, 45},
          {{17.5, 24.0}, 1.9, 170, {1.3, 0.95}},
          {{30.0, 25.2}, 1.7, 102},
          {{10.0, 9.0}, 2.1, 273, {1.45, 1.0}},
          {{16.8, 14.6}, 1.1, 34},
          {{27.0, 8.6}, 1.9, 130},
          {{33.4, 15.4}, 1.1, 34},
      },
      seed, "aggregation");
}

// 336 points, 8 features, 8 heavily imbalanced classes; the two dominant
// classes overlap and the minor classes hug them, so base clusterings are
// noisy the way protein-localization data is.
inline Dataset make_ecoli_like(std::uint64_t seed = 20230336) {
  return make_blobs(
      {
          {{0.3262, 0.3801, 0.4789, 0.4994, 0.4354, 0.2704, 0.3101, 0.3982}, 0.0950, 143},  // cp
          {{0.6137, 0.5871, 0.4789, 0.4994, 0.5159, 0.6844, 0.5976, 0.4903}, 0.0855, 77},   // im
          {{0.2687, 0.4376, 0.5249, 0.4994, 0.8379, 0.3624, 0.2296, 0.6282}, 0.0855, 52},   // pp
          {{0.8517, 0.6929, 0.4657, 0.4994, 0.4762, 0.8960, 0.7827, 0.4638}, 0.0808, 35},   // imU
          {{0.3837, 0.4951, 0.4904, 0.4764, 0.5504, 0.2014, 0.8966, 0.8353}, 0.0808, 20},   // om
          {{0.4297, 0.5181, 0.5019, 0.5684, 0.5619, 0.2359, 0.9426, 0.7432}, 0.0475, 5},    // omL
          {{0.7195, 0.6400, 0.4789, 0.5259, 0.5027, 0.7769, 0.6769, 0.4903}, 0.0475, 2},    // imL
          {{0.5079, 0.5210, 0.4789, 0.4598, 0.4894, 0.5786, 0.5182, 0.4638}, 0.0475, 2},    // imS
      },
      seed, "ecoli");
}

// Wide mixture at the scale of the large benchmark subsamples.
inline Dataset make_large_mixture(int n, int classes, int d, std::uint64_t seed) {
  SplitRng layout(seed);
  std::vector<BlobSpec> blobs(classes);
  const int per = n / classes;
  for (int c = 0; c < classes; ++c) {
    blobs[c].center.resize(d);
    for (int j = 0; j < d; ++j) blobs[c].center[j] = layout.next_double();
    blobs[c].sigma = 0.12;
    blobs[c].count = c + 1 < classes ? per : n - per * (classes - 1);
  }
  return make_blobs(blobs, seed + 1, "large_mixture");
}

// Class names used when the stand-in files are written to disk; the ecoli
// labels are strings on purpose to exercise string-label compaction.
inline const std::vector<std::string>& ecoli_class_names() {
  static const std::vector<std::string> names = {"cp", "im", "pp", "imU",
                                                 "om", "omL", "imL", "imS"};
  return names;
}

}  // namespace cams
