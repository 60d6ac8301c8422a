#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <vector>

#include "cams/microcluster.hpp"
#include "cams/rng.hpp"
#include "oracles.hpp"

using namespace cams;

namespace {

Ensemble from_labels(const std::vector<std::vector<int>>& labels) {
  Ensemble e;
  for (const auto& raw : labels) e.members.push_back(compact_partition(raw));
  return e;
}

}  // namespace

TEST_CASE("identical partitions collapse to one microcluster per cluster", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}});
  const MicroclusterMap map = form_microclusters(e);
  REQUIRE(map.n_prime == 3);
  REQUIRE(map.sizes == std::vector<int>{2, 2, 1});
}

TEST_CASE("crossing partitions give all-distinct signatures", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 1, 1}, {0, 1, 1, 0}});
  const MicroclusterMap map = form_microclusters(e);
  REQUIRE(map.n_prime == 4);
  REQUIRE(map.assignment == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("with one partition microclusters are its clusters", "[microcluster]") {
  const Ensemble e = from_labels({{0, 1, 0, 2, 1}});
  const MicroclusterMap map = form_microclusters(e);
  REQUIRE(map.n_prime == 3);
  for (int i = 0; i < 5; ++i)
    REQUIRE(map.assignment[i] == e.members[0].labels[i]);
}

TEST_CASE("microclusters refine every base clustering", "[microcluster]") {
  SplitRng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    Ensemble e;
    const int n = 12;
    for (int k = 0; k < 4; ++k) {
      std::vector<int> raw(n);
      for (int i = 0; i < n; ++i) raw[i] = static_cast<int>(rng.below(3));
      e.members.push_back(compact_partition(raw));
    }
    const MicroclusterMap map = form_microclusters(e);
    for (const Partition& p : e.members)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (map.assignment[i] == map.assignment[j])
            REQUIRE(p.labels[i] == p.labels[j]);
  }
}

TEST_CASE("single microcluster gives the 1x1 identity MCA", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 0}});
  const MicroclusterMap map = form_microclusters(e);
  REQUIRE(map.n_prime == 1);
  const CoassocMatrix mca = build_mca(e, map);
  REQUIRE(mca.values == Eigen::MatrixXd::Ones(1, 1));
}

TEST_CASE("all-singleton microclusters make MCA equal plain CA", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 1, 1}, {0, 1, 1, 0}});
  const MicroclusterMap map = form_microclusters(e);
  REQUIRE(map.n_prime == 4);
  const CoassocMatrix mca = build_mca(e, map);
  REQUIRE(mca.values == build_ca(e).values);
}

TEST_CASE("identical partitions give a block-indicator MCA", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 1, 2}, {0, 0, 1, 2}});
  const MicroclusterMap map = form_microclusters(e);
  const CoassocMatrix mca = build_mca(e, map);
  REQUIRE(mca.values == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("inconsistent microcluster map is detected", "[microcluster]") {
  const Ensemble e = from_labels({{0, 1, 1}});
  MicroclusterMap bogus;
  bogus.assignment = {0, 0, 1};  // groups samples 0,1 although they never co-cluster
  bogus.sizes = {2, 1};
  bogus.n_prime = 2;
  REQUIRE_THROWS_AS(build_mca(e, bogus), std::logic_error);
}

TEST_CASE("two-node walk with one step has orthogonal trajectories", "[microcluster]") {
  CoassocMatrix mca;
  mca.values.resize(2, 2);
  mca.values << 1.0, 0.5, 0.5, 1.0;
  const CoassocMatrix pts = build_pts(mca, {1, 1}, PtsParams{1, 1});
  REQUIRE(pts.values(0, 0) == 1.0);
  REQUIRE(pts.values(1, 1) == 1.0);
  REQUIRE(pts.values(0, 1) == 0.0);  // R0 = (0,1), R1 = (1,0)
  REQUIRE(pts.kind == CaKind::Pts);
}

TEST_CASE("nodes with identical transition rows have similarity one", "[microcluster]") {
  CoassocMatrix mca;
  mca.values.resize(3, 3);
  mca.values << 1.0, 0.0, 0.8,
                0.0, 1.0, 0.8,
                0.8, 0.8, 1.0;
  const CoassocMatrix pts = build_pts(mca, {1, 1, 1}, PtsParams{1, 1});
  REQUIRE(pts.values(0, 1) == Approx(1.0).margin(1e-12));
}

TEST_CASE("transition rows are stochastic and PTS stays in range", "[microcluster]") {
  SplitRng rng(67);
  Ensemble e;
  const int n = 14;
  for (int k = 0; k < 5; ++k) {
    std::vector<int> raw(n);
    for (int i = 0; i < n; ++i) raw[i] = static_cast<int>(rng.below(4));
    e.members.push_back(compact_partition(raw));
  }
  const MicroclusterMap map = form_microclusters(e);
  const CoassocMatrix mca = build_mca(e, map);
  const int v = default_pts_v(map.n_prime);
  const CoassocMatrix pts = build_pts(mca, map.sizes, PtsParams{v, 5});
  REQUIRE(pts.values == pts.values.transpose().eval());
  REQUIRE((pts.values.array() >= 0.0).all());
  REQUIRE((pts.values.array() <= 1.0).all());
}

TEST_CASE("invalid neighborhood sizes are rejected", "[microcluster]") {
  CoassocMatrix mca;
  mca.values = Eigen::MatrixXd::Identity(3, 3);
  REQUIRE_THROWS_AS(build_pts(mca, {1, 1, 1}, PtsParams{3, 1}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_pts(mca, {1, 1, 1}, PtsParams{0, 1}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_pts(mca, {1, 1, 1}, PtsParams{1, 0}), std::invalid_argument);
}

TEST_CASE("lifting with the identity map is a no-op", "[microcluster]") {
  const Ensemble e = from_labels({{0, 0, 1, 1}, {0, 1, 1, 0}});  // singleton microclusters
  const MicroclusterMap map = form_microclusters(e);
  Partition micro = compact_partition({0, 1, 0, 1});
  const Partition lifted = lift_partition(micro, map);
  REQUIRE(lifted.labels == micro.labels);
}

TEST_CASE("samples inherit their microcluster label", "[microcluster]") {
  MicroclusterMap map;
  map.assignment = {0, 0, 1};
  map.sizes = {2, 1};
  map.n_prime = 2;
  const Partition lifted = lift_partition(compact_partition({0, 1}), map);
  REQUIRE(lifted.labels == std::vector<int>{0, 0, 1});
  REQUIRE_THROWS_AS(lift_partition(compact_partition({0, 1, 1}), map), ValidationError);
}

TEST_CASE("microcluster assignments dump as CSV", "[microcluster]") {
  MicroclusterMap map;
  map.assignment = {0, 1, 0};
  map.sizes = {2, 1};
  map.n_prime = 2;
  const std::string path =
      (std::filesystem::temp_directory_path() / "micro.csv").string();
  save_microclusters_csv(map, path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  REQUIRE(header == "sample_index,microcluster_id");
  REQUIRE(first == "0,0");
}

TEST_CASE("lifting preserves microcluster co-membership", "[microcluster]") {
  SplitRng rng(71);
  Ensemble e;
  for (int k = 0; k < 3; ++k) {
    std::vector<int> raw(10);
    for (int i = 0; i < 10; ++i) raw[i] = static_cast<int>(rng.below(3));
    e.members.push_back(compact_partition(raw));
  }
  const MicroclusterMap map = form_microclusters(e);
  std::vector<int> micro_raw(map.n_prime);
  for (int i = 0; i < map.n_prime; ++i) micro_raw[i] = static_cast<int>(rng.below(3));
  const Partition lifted = lift_partition(compact_partition(micro_raw), map);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (map.assignment[i] == map.assignment[j])
        REQUIRE(lifted.labels[i] == lifted.labels[j]);
}
