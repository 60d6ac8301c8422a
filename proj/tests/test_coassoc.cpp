#include <catch2/catch.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cams/coassoc.hpp"
#include "cams/rng.hpp"
#include "oracles.hpp"

using namespace cams;

namespace {

Ensemble from_labels(const std::vector<std::vector<int>>& labels) {
  Ensemble e;
  for (const auto& raw : labels) e.members.push_back(compact_partition(raw));
  return e;
}

Ensemble random_ensemble(SplitRng& rng, int n, int m, int max_clusters) {
  Ensemble e;
  for (int k = 0; k < m; ++k) {
    std::vector<int> raw(n);
    const int clusters = static_cast<int>(rng.uniform_int(1, max_clusters));
    for (int i = 0; i < n; ++i) raw[i] = static_cast<int>(rng.below(clusters));
    e.members.push_back(compact_partition(raw));
  }
  return e;
}

}  // namespace

TEST_CASE("single one-cluster partition gives the all-ones matrix", "[coassoc]") {
  const CoassocMatrix ca = build_ca(from_labels({{0, 0, 0}}));
  REQUIRE(ca.values == Eigen::MatrixXd::Ones(3, 3));
  REQUIRE(ca.kind == CaKind::PlainCa);
}

TEST_CASE("two crossing partitions give the textbook half-values", "[coassoc]") {
  const CoassocMatrix ca = build_ca(from_labels({{0, 0, 1, 1}, {0, 1, 1, 0}}));
  REQUIRE(ca.values(0, 1) == 0.5);
  REQUIRE(ca.values(1, 2) == 0.5);
  REQUIRE(ca.values(2, 3) == 0.5);
  REQUIRE(ca.values(0, 3) == 0.5);
  REQUIRE(ca.values(0, 2) == 0.0);
  REQUIRE(ca.values(1, 3) == 0.0);
  for (int i = 0; i < 4; ++i) REQUIRE(ca.values(i, i) == 1.0);
}

TEST_CASE("co-association equals the pair-counting oracle", "[coassoc]") {
  SplitRng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(3, 12));
    const int m = static_cast<int>(rng.uniform_int(1, 5));
    const Ensemble e = random_ensemble(rng, n, m, 4);
    const CoassocMatrix ca = build_ca(e);
    const Eigen::MatrixXd ref = oracle::coassociation(e);
    REQUIRE(ca.values == ref);
    REQUIRE(ca.values == ca.values.transpose().eval());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double scaled = ca.values(i, j) * m;
        REQUIRE(std::abs(scaled - std::round(scaled)) < 1e-9);  // multiples of 1/m
      }
  }
}

TEST_CASE("mismatched partition lengths are rejected", "[coassoc]") {
  Ensemble e;
  e.members.push_back(compact_partition({0, 1, 0}));
  e.members.push_back(compact_partition({0, 1}));
  REQUIRE_THROWS_AS(build_ca(e), ValidationError);
}

TEST_CASE("uncertainty is zero when all partitions agree", "[coassoc]") {
  const Ensemble e = from_labels({{0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}});
  for (int pi = 0; pi < e.size(); ++pi)
    for (int c = 0; c < e.members[pi].num_clusters; ++c)
      REQUIRE(cluster_uncertainty(e, pi, c) == 0.0);
}

TEST_CASE("a cluster split in half by the other partition has entropy one", "[coassoc]") {
  const Ensemble e = from_labels({{0, 0}, {0, 1}});
  REQUIRE(cluster_uncertainty(e, 0, 0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("uncertainty is nonnegative", "[coassoc]") {
  SplitRng rng(37);
  const Ensemble e = random_ensemble(rng, 10, 4, 3);
  for (int pi = 0; pi < e.size(); ++pi)
    for (int c = 0; c < e.members[pi].num_clusters; ++c)
      REQUIRE(cluster_uncertainty(e, pi, c) >= 0.0);
}

TEST_CASE("identical partitions make LWCA equal plain CA", "[coassoc]") {
  const Ensemble e = from_labels({{0, 0, 1, 2}, {0, 0, 1, 2}});
  const CoassocMatrix lwca = build_lwca(e, LwcaParams{0.4});
  const CoassocMatrix ca = build_ca(e);
  REQUIRE((lwca.values - ca.values).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(lwca.kind == CaKind::Lwca);
}

TEST_CASE("huge theta flattens the weights back to plain CA", "[coassoc]") {
  SplitRng rng(41);
  const Ensemble e = random_ensemble(rng, 9, 3, 3);
  const CoassocMatrix lwca = build_lwca(e, LwcaParams{1e9});
  const CoassocMatrix ca = build_ca(e);
  REQUIRE((lwca.values - ca.values).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("LWCA matches a direct evaluation of the weighting formula", "[coassoc]") {
  const Ensemble e = from_labels({{0, 0, 1, 1}, {0, 1, 1, 0}});
  const double theta = 0.4;
  const int n = 4, m = 2;

  // independent evaluation: entropy, weight, weighted sum per pair
  auto entropy = [&](int pi, int cid) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (e.members[pi].labels[i] == cid) members.push_back(i);
    double u = 0.0;
    for (int pj = 0; pj < m; ++pj) {
      std::vector<int> inter(e.members[pj].num_clusters, 0);
      for (int i : members) ++inter[e.members[pj].labels[i]];
      for (int c : inter)
        if (c > 0) {
          const double p = double(c) / members.size();
          u -= p * std::log2(p);
        }
    }
    return u;
  };
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (e.members[k].labels[i] == e.members[k].labels[j])
          expected(i, j) +=
              std::exp(-entropy(k, e.members[k].labels[i]) / (theta * m)) / m;
  expected = ((expected + expected.transpose()) / 2.0).eval();

  const CoassocMatrix lwca = build_lwca(e, LwcaParams{theta});
  REQUIRE((lwca.values - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("LWCA never exceeds plain CA", "[coassoc]") {
  SplitRng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const Ensemble e = random_ensemble(rng, 8, 3, 3);
    const CoassocMatrix lwca = build_lwca(e, LwcaParams{0.4});
    const CoassocMatrix ca = build_ca(e);
    REQUIRE(((ca.values - lwca.values).array() >= -1e-12).all());
  }
}

TEST_CASE("high-confidence threshold is inclusive", "[coassoc]") {
  // entry 16/20 = 0.8 must survive alpha = 0.8; 15/20 must not
  Ensemble e;
  for (int k = 0; k < 20; ++k) {
    std::vector<int> raw = {0, k < 16 ? 0 : 1, k < 15 ? 0 : 1};
    e.members.push_back(compact_partition(raw));
  }
  const CoassocMatrix ca = build_ca(e);
  REQUIRE(ca.values(0, 1) == 0.8);
  const HighConfidence hc = extract_hc(ca, 0.8);
  REQUIRE(hc.in_omega(0, 1));
  REQUIRE(hc.h(0, 1) == 0.8);
  REQUIRE(ca.values(0, 2) == 0.75);
  REQUIRE_FALSE(hc.in_omega(0, 2));
  REQUIRE(hc.h(0, 2) == 0.0);
  // the diagonal always clears the threshold
  for (int i = 0; i < 3; ++i) REQUIRE(hc.in_omega(i, i));
}

TEST_CASE("alpha zero keeps every pair", "[coassoc]") {
  SplitRng rng(47);
  const Ensemble e = random_ensemble(rng, 6, 2, 3);
  const CoassocMatrix ca = build_ca(e);
  const HighConfidence hc = extract_hc(ca, 0.0);
  REQUIRE(static_cast<int>(hc.pairs.size()) == 6 * 7 / 2);
  REQUIRE(hc.h == ca.values);
}

TEST_CASE("alpha outside [0,1] is rejected", "[coassoc]") {
  const CoassocMatrix ca = build_ca(from_labels({{0, 0, 1}}));
  REQUIRE_THROWS_AS(extract_hc(ca, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(extract_hc(ca, 1.1), std::invalid_argument);
}

TEST_CASE("raising alpha shrinks omega", "[coassoc]") {
  SplitRng rng(53);
  const Ensemble e = random_ensemble(rng, 10, 4, 3);
  const CoassocMatrix ca = build_ca(e);
  const HighConfidence loose = extract_hc(ca, 0.3);
  const HighConfidence tight = extract_hc(ca, 0.7);
  for (auto [i, j] : tight.pairs) REQUIRE(loose.in_omega(i, j));
  REQUIRE(tight.pairs.size() <= loose.pairs.size());
}

TEST_CASE("empty support gives the zero Laplacian", "[coassoc]") {
  HighConfidence hc;
  hc.n = 3;
  hc.mask.assign(9, 0);
  hc.h = Eigen::MatrixXd::Zero(3, 3);
  REQUIRE(build_laplacian(hc).phi == Eigen::MatrixXd::Zero(3, 3));
}

TEST_CASE("two-node Laplacian with a self-loop cancels it", "[coassoc]") {
  HighConfidence hc;
  hc.n = 2;
  hc.mask.assign(4, 1);
  hc.h.resize(2, 2);
  hc.h << 1, 1, 1, 1;  // h12 = 1 plus unit self-loops
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  REQUIRE(build_laplacian(hc).phi == expected);
}

TEST_CASE("Laplacian rows sum to zero and the matrix is PSD", "[coassoc]") {
  SplitRng rng(59);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(5, 50));
    const Ensemble e = random_ensemble(rng, n, 4, 5);
    const HighConfidence hc = extract_hc(build_ca(e), 0.5);
    const Laplacian lap = build_laplacian(hc);
    for (int i = 0; i < n; ++i) REQUIRE(std::abs(lap.phi.row(i).sum()) < 1e-12);
    REQUIRE((lap.phi - lap.phi.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(lap.phi);
    REQUIRE(eigs.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("omega dumps as a sorted edge list", "[coassoc]") {
  const CoassocMatrix ca = build_ca(from_labels({{0, 0, 1}}));
  const HighConfidence hc = extract_hc(ca, 0.9);
  const std::string path =
      (std::filesystem::temp_directory_path() / "omega.csv").string();
  save_omega_csv(hc, path);
  std::ifstream in(path);
  std::string header, line1;
  std::getline(in, header);
  std::getline(in, line1);
  REQUIRE(header == "i,j,h");
  REQUIRE(line1 == "0,0,1");
}
