#include <catch2/catch.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include "cams/consensus.hpp"
#include "cams/rng.hpp"
#include "oracles.hpp"

using namespace cams;

namespace {

CoassocMatrix random_similarity(SplitRng& rng, int n) {
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = rng.next_double();
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return CoassocMatrix{s, CaKind::PlainCa};
}

// reference agglomerative clustering that recomputes every linkage from the
// raw matrix at every step
std::vector<std::set<int>> brute_hac(const Eigen::MatrixXd& s, int k, Linkage linkage) {
  const int n = static_cast<int>(s.rows());
  std::vector<std::set<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};
  while (static_cast<int>(clusters.size()) > k) {
    double best = -1.0;
    std::pair<int, int> best_pair{-1, -1};
    std::pair<int, int> best_key{0, 0};
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double link;
        if (linkage == Linkage::Average) {
          double sum = 0;
          for (int i : clusters[a])
            for (int j : clusters[b]) sum += s(i, j);
          link = sum / (clusters[a].size() * clusters[b].size());
        } else {
          link = 1e300;
          for (int i : clusters[a])
            for (int j : clusters[b]) link = std::min(link, s(i, j));
        }
        std::pair<int, int> key{std::min(*clusters[a].begin(), *clusters[b].begin()),
                                std::max(*clusters[a].begin(), *clusters[b].begin())};
        if (link > best || (link == best && key < best_key)) {
          best = link;
          best_pair = {static_cast<int>(a), static_cast<int>(b)};
          best_key = key;
        }
      }
    clusters[best_pair.first].insert(clusters[best_pair.second].begin(),
                                     clusters[best_pair.second].end());
    clusters.erase(clusters.begin() + best_pair.second);
  }
  return clusters;
}

std::vector<int> labels_from_sets(const std::vector<std::set<int>>& clusters, int n) {
  std::vector<std::pair<int, const std::set<int>*>> ordered;
  for (const auto& c : clusters) ordered.emplace_back(*c.begin(), &c);
  std::sort(ordered.begin(), ordered.end());
  std::vector<int> labels(n, -1);
  for (std::size_t idx = 0; idx < ordered.size(); ++idx)
    for (int i : *ordered[idx].second) labels[i] = static_cast<int>(idx);
  return labels;
}

}  // namespace

TEST_CASE("k equal to n yields singletons and no merges", "[consensus]") {
  SplitRng rng(87);
  const CoassocMatrix s = random_similarity(rng, 6);
  const auto [part, dendro] = hac(s, 6, Linkage::Average);
  REQUIRE(part.num_clusters == 6);
  REQUIRE(dendro.merges.empty());
  for (int i = 0; i < 6; ++i) REQUIRE(part.labels[i] == i);
}

TEST_CASE("k equal to one merges everything with a full history", "[consensus]") {
  SplitRng rng(89);
  const CoassocMatrix s = random_similarity(rng, 7);
  const auto [part, dendro] = hac(s, 1, Linkage::Average);
  REQUIRE(part.num_clusters == 1);
  REQUIRE(dendro.merges.size() == 6);
  for (int lab : part.labels) REQUIRE(lab == 0);
}

TEST_CASE("block-diagonal similarity recovers its blocks", "[consensus]") {
  Eigen::MatrixXd s(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const bool same = (i < 3) == (j < 3);
      s(i, j) = i == j ? 1.0 : (same ? 0.9 : 0.1);
    }
  const auto [part, dendro] = hac(CoassocMatrix{s, CaKind::PlainCa}, 2, Linkage::Average);
  REQUIRE(part.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
  // every within-block merge dominates any cross-block alternative
  for (const Merge& m : dendro.merges) REQUIRE(m.similarity == 0.9);
}

TEST_CASE("cut agrees with a from-scratch reference on random matrices", "[consensus]") {
  SplitRng rng(91);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(4, 12));
    const int k = static_cast<int>(rng.uniform_int(1, n));
    const Linkage linkage = trial % 2 ? Linkage::Average : Linkage::Complete;
    const CoassocMatrix s = random_similarity(rng, n);
    const auto [part, dendro] = hac(s, k, linkage);
    const auto ref = labels_from_sets(brute_hac(s.values, k, linkage), n);
    REQUIRE(part.labels == ref);
  }
}

TEST_CASE("recorded similarities match an independent recomputation", "[consensus]") {
  SplitRng rng(93);
  const int n = 11;
  const CoassocMatrix s = random_similarity(rng, n);
  const auto [part, dendro] = hac(s, 1, Linkage::Average);

  // replay the merges, recomputing each average linkage over raw entries
  std::vector<std::vector<int>> members(n + dendro.merges.size());
  for (int i = 0; i < n; ++i) members[i] = {i};
  for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
    const Merge& m = dendro.merges[t];
    double sum = 0;
    for (int i : members[m.cluster_a])
      for (int j : members[m.cluster_b]) sum += s.values(i, j);
    const double avg = sum / (members[m.cluster_a].size() * members[m.cluster_b].size());
    REQUIRE(m.similarity == Approx(avg).margin(1e-12));
    members[n + t] = members[m.cluster_a];
    members[n + t].insert(members[n + t].end(), members[m.cluster_b].begin(),
                          members[m.cluster_b].end());
  }
}

TEST_CASE("cuts at k and k-1 differ by exactly one merge", "[consensus]") {
  SplitRng rng(97);
  const CoassocMatrix s = random_similarity(rng, 10);
  for (int k = 9; k >= 2; --k) {
    const Partition fine = hac(s, k, Linkage::Average).first;
    const Partition coarse = hac(s, k - 1, Linkage::Average).first;
    // count label blocks of fine inside each coarse block
    std::set<std::pair<int, int>> refinement;
    for (int i = 0; i < 10; ++i) refinement.insert({coarse.labels[i], fine.labels[i]});
    REQUIRE(static_cast<int>(refinement.size()) == k);  // one coarse block holds two fine ones
  }
}

TEST_CASE("relabeling samples does not change the clustering", "[consensus]") {
  SplitRng rng(101);
  const int n = 9;
  const CoassocMatrix s = random_similarity(rng, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  Eigen::MatrixXd sp(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sp(i, j) = s.values(perm[i], perm[j]);

  const Partition direct = hac(s, 3, Linkage::Average).first;
  const Partition permuted = hac(CoassocMatrix{sp, CaKind::PlainCa}, 3, Linkage::Average).first;
  std::vector<int> unpermuted(n);
  for (int i = 0; i < n; ++i) unpermuted[perm[i]] = permuted.labels[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      REQUIRE((direct.labels[i] == direct.labels[j]) ==
              (unpermuted[i] == unpermuted[j]));
}

TEST_CASE("merge ids follow the leaves-then-internal convention", "[consensus]") {
  SplitRng rng(103);
  const int n = 8;
  const CoassocMatrix s = random_similarity(rng, n);
  const auto [part, dendro] = hac(s, 1, Linkage::Average);
  REQUIRE(dendro.n == n);
  std::set<int> alive;
  for (int i = 0; i < n; ++i) alive.insert(i);
  for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
    REQUIRE(alive.count(dendro.merges[t].cluster_a) == 1);
    REQUIRE(alive.count(dendro.merges[t].cluster_b) == 1);
    alive.erase(dendro.merges[t].cluster_a);
    alive.erase(dendro.merges[t].cluster_b);
    alive.insert(n + static_cast<int>(t));
  }
  REQUIRE(alive.size() == 1);
}

TEST_CASE("invalid arguments are rejected", "[consensus]") {
  SplitRng rng(107);
  const CoassocMatrix s = random_similarity(rng, 5);
  REQUIRE_THROWS_AS(hac(s, 0, Linkage::Average), std::invalid_argument);
  REQUIRE_THROWS_AS(hac(s, 6, Linkage::Average), std::invalid_argument);
  CoassocMatrix bad = s;
  bad.values(0, 1) += 0.1;
  REQUIRE_THROWS_AS(hac(bad, 2, Linkage::Average), ValidationError);
}

TEST_CASE("zero-similarity pairs still merge when required", "[consensus]") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  const auto [part, dendro] = hac(CoassocMatrix{s, CaKind::PlainCa}, 1, Linkage::Average);
  REQUIRE(part.num_clusters == 1);
  // deterministic tie-breaking walks the smallest indices first
  REQUIRE(dendro.merges[0].cluster_a == 0);
  REQUIRE(dendro.merges[0].cluster_b == 1);
}

TEST_CASE("dendrogram CSV has the documented columns", "[consensus]") {
  SplitRng rng(109);
  const CoassocMatrix s = random_similarity(rng, 4);
  const auto [part, dendro] = hac(s, 1, Linkage::Average);
  const std::string path =
      (std::filesystem::temp_directory_path() / "dendro.csv").string();
  save_dendrogram_csv(dendro, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "step,cluster_a,cluster_b,similarity");
  int lines = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++lines;
  REQUIRE(lines == 3);
}
