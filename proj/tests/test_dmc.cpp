#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betamix/dmc.hpp"
#include "betamix/em.hpp"
#include "betamix/rng.hpp"
#include "betamix/simulator.hpp"
#include "oracles.hpp"

using namespace betamix;

namespace {

FittedModel tiny_kr_model(const std::vector<int>& hard) {
  FittedModel m;
  m.spec = {ModelVariant::KDotR, 2, 3};
  m.N = 1;
  m.R = 2;
  m.C = hard.size();
  m.tau = {0.5, 0.5};
  m.shapes = ShapeParams(ModelVariant::KDotR, 2, 1, 2);
  m.shapes.block(0, 0) = {2, 20};   // cluster 1: hypo -> hyper
  m.shapes.block(0, 1) = {20, 2};
  m.shapes.block(1, 0) = {4, 3};    // cluster 2: hemi -> hemi
  m.shapes.block(1, 1) = {4, 3};
  m.hard_labels = hard;
  m.loglik_trace = {0.0};
  return m;
}

}  // namespace

TEST_CASE("identify_dmcs flags state-changing clusters only") {
  const auto m = tiny_kr_model({0, 1, 0, 1, 1});
  const auto labels = label_kr_clusters(m);
  REQUIRE(labels[0][0] == MethylationState::Hypo);
  REQUIRE(labels[0][1] == MethylationState::Hyper);
  REQUIRE(labels[1][0] == MethylationState::Hemi);
  REQUIRE(labels[1][1] == MethylationState::Hemi);
  const auto flags = identify_dmcs(m, labels);
  CHECK(flags == std::vector<std::uint8_t>{1, 0, 1, 0, 0});
}

TEST_CASE("map_dmrs basics") {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
  std::vector<GenomicPosition> pos;
  for (int i = 0; i < 6; ++i) pos.push_back({"chr1", 100 + 10 * i});

  SUBCASE("one qualifying run") {
    const std::vector<std::uint8_t> flags{1, 1, 1, 0, 1, 1};
    const auto regions = map_dmrs(flags, pos, ids, 3);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].site_count() == 3);
    CHECK(regions[0].start == 100);
    CHECK(regions[0].end == 120);
    CHECK(regions[0].cpg_ids == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("no flags, no regions") {
    const std::vector<std::uint8_t> flags(6, 0);
    CHECK(map_dmrs(flags, pos, ids, 3).empty());
  }
  SUBCASE("runs do not cross chromosomes") {
    auto pos2 = pos;
    pos2[3] = {"chr2", 5};
    pos2[4] = {"chr2", 15};
    pos2[5] = {"chr2", 25};
    const std::vector<std::uint8_t> flags{1, 1, 1, 1, 1, 1};
    const auto regions = map_dmrs(flags, pos2, ids, 3);
    REQUIRE(regions.size() == 2);
    CHECK(regions[0].chromosome == "chr1");
    CHECK(regions[1].chromosome == "chr2");
  }
  SUBCASE("unsorted positions are rejected") {
    auto pos2 = pos;
    std::swap(pos2[1], pos2[2]);
    const std::vector<std::uint8_t> flags(6, 1);
    CHECK_THROWS_AS(map_dmrs(flags, pos2, ids, 3), std::invalid_argument);
  }
  SUBCASE("min_run 1 keeps single sites") {
    const std::vector<std::uint8_t> flags{0, 1, 0, 0, 1, 0};
    CHECK(map_dmrs(flags, pos, ids, 1).size() == 2);
  }
}

TEST_CASE("map_dmrs agrees with a brute-force run scan on random flags") {
  RngStream rng(77, 0xD3);
  std::vector<std::uint8_t> flags(500);
  for (auto& f : flags) f = rng.next_unit() < 0.55;
  std::vector<GenomicPosition> pos;
  std::vector<std::string> ids;
  for (int i = 0; i < 500; ++i) {
    pos.push_back({"chrX", 1000 + 3 * i});
    ids.push_back("cg" + std::to_string(i));
  }
  const auto regions = map_dmrs(flags, pos, ids, 3);
  const auto runs = oracle::naive_runs(flags, 3);
  REQUIRE(regions.size() == runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CHECK(regions[i].start == pos[runs[i].first].coordinate);
    CHECK(regions[i].end == pos[runs[i].second - 1].coordinate);
    CHECK(regions[i].site_count() == runs[i].second - runs[i].first);
  }
  // Regions are disjoint and ordered.
  for (std::size_t i = 1; i < regions.size(); ++i)
    CHECK(regions[i].start > regions[i - 1].end);
}

TEST_CASE("ecdf") {
  SUBCASE("single value") {
    const std::vector<double> v{0.5};
    const auto steps = ecdf(v);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].first == 0.5);
    CHECK(steps[0].second == 1.0);
  }
  SUBCASE("duplicates collapse") {
    const std::vector<double> v{0.1, 0.1, 0.3};
    const auto steps = ecdf(v);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].first == 0.1);
    CHECK(steps[0].second == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(steps[1].first == 0.3);
    CHECK(steps[1].second == 1.0);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(ecdf(std::vector<double>{}), std::invalid_argument);
  }
}

TEST_CASE("hyper-state values stochastically dominate hypo-state values") {
  SimConfig config;
  config.C = 5000;
  config.seed = 41;
  const auto data = simulate(config);
  std::vector<double> hypo, hyper;
  for (std::size_t c = 0; c < config.C; ++c) {
    for (int n = 0; n < config.N; ++n) {
      if (data.truth[0][c] == 0) hypo.push_back(data.matrix.value(c, n, 0));
      if (data.truth[0][c] == 2) hyper.push_back(data.matrix.value(c, n, 0));
    }
  }
  const auto e_hypo = ecdf(hypo);
  const auto e_hyper = ecdf(hyper);
  // At every hyper step point, the hypo ECDF must already be at least as
  // large (the hyper distribution sits to the right).
  for (const auto& [x, f] : e_hyper) {
    auto it = std::lower_bound(e_hypo.begin(), e_hypo.end(), x,
                               [](const auto& p, double q) { return p.first <= q; });
    const double hypo_f = it == e_hypo.begin() ? 0.0 : std::prev(it)->second;
    REQUIRE(hypo_f >= f - 1e-12);
  }
}

TEST_CASE("DMC detection on a fitted K.R model recovers the truth") {
  SimConfig config;
  config.C = 6000;
  config.seed = 42;
  const auto data = simulate(config);
  FitConfig fc;
  fc.seed = 6;
  const auto model = fit(data.matrix, {ModelVariant::KDotR, 9, 3}, fc);
  const auto labels = label_kr_clusters(model);
  const auto flags = identify_dmcs(model, labels);

  std::size_t true_changed = 0, recovered = 0, flagged = 0;
  for (std::size_t c = 0; c < config.C; ++c) {
    const bool truth_dmc = data.truth[0][c] != data.truth[1][c];
    true_changed += truth_dmc;
    flagged += flags[c];
    if (truth_dmc && flags[c]) ++recovered;
  }
  // All state-changing sites, not only hypo<->hyper swaps.
  CHECK(static_cast<double>(recovered) / true_changed >= 0.95);

  // DMC share should track the mixing proportions of state-changing clusters.
  double tau_changed = 0.0;
  for (int k = 0; k < 9; ++k) {
    bool changes = false;
    for (int r = 1; r < model.R; ++r) changes = changes || labels[k][r] != labels[k][0];
    if (changes) tau_changed += model.tau[k];
  }
  CHECK(std::abs(static_cast<double>(flagged) / config.C - tau_changed) <= 0.01);
}
