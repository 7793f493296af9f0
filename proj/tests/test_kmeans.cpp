#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "betamix/kmeans.hpp"
#include "betamix/rng.hpp"
#include "oracles.hpp"

using namespace betamix;

namespace {

// Three tight blobs with zero overlap.
MethylationMatrix blobs(std::size_t per_blob, std::size_t N, std::vector<int>* truth) {
  RngStream rng(100, 0xB10B);
  std::vector<double> rows;
  const double centers[3] = {0.05, 0.5, 0.95};
  for (int blob = 0; blob < 3; ++blob)
    for (std::size_t i = 0; i < per_blob; ++i) {
      truth->push_back(blob);
      for (std::size_t n = 0; n < N; ++n)
        rows.push_back(centers[blob] + 0.02 * (rng.next_unit() - 0.5));
    }
  return oracle::make_matrix(3 * per_blob, N, 1, rows);
}

}  // namespace

TEST_CASE("K=1 puts everything in one cluster") {
  std::vector<int> truth;
  const auto m = blobs(50, 2, &truth);
  const auto a = kmeans_init(m, 1, 9);
  CHECK(std::all_of(a.labels.begin(), a.labels.end(), [](int v) { return v == 0; }));
  CHECK(a.counts[0] == m.n_sites());
}

TEST_CASE("well-separated blobs are recovered exactly") {
  std::vector<int> truth;
  const auto m = blobs(200, 3, &truth);
  const auto a = kmeans_init(m, 3, 7);
  // Same partition up to label names: the label must be constant per blob
  // and distinct across blobs.
  std::set<int> blob_labels;
  for (int blob = 0; blob < 3; ++blob) {
    const int first = a.labels[blob * 200];
    for (int i = 0; i < 200; ++i) REQUIRE(a.labels[blob * 200 + i] == first);
    blob_labels.insert(first);
  }
  CHECK(blob_labels.size() == 3);
}

TEST_CASE("same seed gives identical labels, any thread count") {
  std::vector<int> truth;
  const auto m = blobs(2000, 2, &truth);
  const auto a = kmeans_init(m, 3, 42, 1);
  const auto b = kmeans_init(m, 3, 42, 4);
  CHECK(a.labels == b.labels);
  const auto c = kmeans_init(m, 3, 43);
  CHECK(a.counts == b.counts);
  (void)c;
}

TEST_CASE("C < K is rejected") {
  std::vector<int> truth;
  const auto m = blobs(1, 1, &truth);  // 3 sites
  CHECK_THROWS_AS(kmeans_init(m, 4, 1), std::invalid_argument);
}

TEST_CASE("initial_params: proportions and pooled moments") {
  RngStream rng(55, 0xF00D);
  const std::size_t C = 60000;
  std::vector<double> rows(C);
  for (double& v : rows) v = rng.next_beta(2.0, 20.0);
  const auto m = oracle::make_matrix(C, 1, 1, rows);
  InitAssignment all_one{std::vector<int>(C, 0), {C}};
  const auto [tau, shapes] = initial_params(m, all_one, {ModelVariant::KDotDot, 1, 3});
  CHECK(tau[0] == 1.0);
  CHECK(shapes.block(0, 0).alpha == doctest::Approx(2.0).epsilon(0.02));
  CHECK(shapes.block(0, 0).delta == doctest::Approx(20.0).epsilon(0.02));
}

TEST_CASE("initial_params: hard 70/30 split gives tau (0.7, 0.3)") {
  std::vector<double> rows(100, 0.5);
  for (std::size_t i = 0; i < 100; ++i) rows[i] = i < 70 ? 0.2 : 0.8;
  const auto m = oracle::make_matrix(100, 1, 1, rows);
  std::vector<int> labels(100);
  for (std::size_t i = 0; i < 100; ++i) labels[i] = i < 70 ? 0 : 1;
  InitAssignment a{labels, {70, 30}};
  const auto [tau, shapes] = initial_params(m, a, {ModelVariant::KDotDot, 2, 3});
  CHECK(tau[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(tau[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(tau[0] + tau[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("KN. blocks get distinct estimates when patient columns differ") {
  RngStream rng(66, 0xBEEF);
  const std::size_t C = 20000;
  std::vector<double> rows(C * 2);
  for (std::size_t c = 0; c < C; ++c) {
    rows[c * 2] = rng.next_beta(2.0, 20.0);   // patient 1
    rows[c * 2 + 1] = rng.next_beta(20.0, 2.0);  // patient 2
  }
  const auto m = oracle::make_matrix(C, 2, 1, rows);
  InitAssignment all_one{std::vector<int>(C, 0), {C}};
  const auto [tau, shapes] = initial_params(m, all_one, {ModelVariant::KNDot, 1, 3});
  CHECK(shapes.block(0, 0).alpha == doctest::Approx(2.0).epsilon(0.05));
  CHECK(shapes.block(0, 1).alpha == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("K.. pooling is invariant to permuting patient columns") {
  RngStream rng(77, 0xCAFE);
  const std::size_t C = 500;
  std::vector<double> rows(C * 3);
  for (double& v : rows) v = rng.next_beta(4.0, 3.0);
  const auto m = oracle::make_matrix(C, 3, 1, rows);
  // Swap patients 0 and 2.
  std::vector<double> swapped(rows);
  for (std::size_t c = 0; c < C; ++c) std::swap(swapped[c * 3], swapped[c * 3 + 2]);
  const auto ms = oracle::make_matrix(C, 3, 1, swapped);

  std::vector<int> labels(C);
  for (std::size_t c = 0; c < C; ++c) labels[c] = static_cast<int>(c % 2);
  InitAssignment a{labels, {(C + 1) / 2, C / 2}};
  const auto [tau1, s1] = initial_params(m, a, {ModelVariant::KDotDot, 2, 3});
  const auto [tau2, s2] = initial_params(ms, a, {ModelVariant::KDotDot, 2, 3});
  for (int k = 0; k < 2; ++k) {
    CHECK(s1.block(k, 0).alpha == doctest::Approx(s2.block(k, 0).alpha).epsilon(1e-12));
    CHECK(s1.block(k, 0).delta == doctest::Approx(s2.block(k, 0).delta).epsilon(1e-12));
  }
}

TEST_CASE("degenerate cluster moments fall back to a flat-ish start") {
  // A cluster whose members are a single repeated value has (floored)
  // variance 1e-8; the inversion then yields very large but finite shapes.
  std::vector<double> rows(10, 0.5);
  const auto m = oracle::make_matrix(10, 1, 1, rows);
  InitAssignment a{std::vector<int>(10, 0), {10}};
  const auto [tau, shapes] = initial_params(m, a, {ModelVariant::KDotDot, 1, 3});
  CHECK(shapes.block(0, 0).alpha > 0.51);
  CHECK(std::isfinite(shapes.block(0, 0).alpha));
}
