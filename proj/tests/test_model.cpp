#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "betamix/model.hpp"
#include "oracles.hpp"

using namespace betamix;

TEST_CASE("matrix construction clamps boundary values and counts them") {
  auto m = oracle::make_matrix(2, 1, 1, {1.0, 0.4});
  CHECK(m.clamp_count() == 1);
  CHECK(m.value(0, 0, 0) == 1.0 - kClampLo);
  CHECK(m.value(1, 0, 0) == 0.4);
  CHECK_THROWS_AS(oracle::make_matrix(1, 1, 1, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(oracle::make_matrix(1, 1, 1, {-0.1}), std::invalid_argument);
}

TEST_CASE("duplicate CpG ids are rejected") {
  std::vector<double> v{0.1, 0.2};
  CHECK_THROWS_AS(MethylationMatrix(v, {"cg1", "cg1"}, {"patient1"}, {"sample1"}),
                  std::invalid_argument);
}

TEST_CASE("validate enforces the variant's sample requirement") {
  auto r1 = oracle::make_matrix(10, 4, 1, std::vector<double>(40, 0.3));
  auto r2 = oracle::make_matrix(10, 2, 2, std::vector<double>(40, 0.3));

  CHECK_NOTHROW(validate(r1, {ModelVariant::KDotDot, 3, 3}));
  CHECK_NOTHROW(validate(r1, {ModelVariant::KNDot, 3, 3}));
  CHECK_THROWS_AS(validate(r1, {ModelVariant::KDotR, 9, 3}), std::invalid_argument);
  CHECK_NOTHROW(validate(r2, {ModelVariant::KDotR, 9, 3}));
  CHECK_THROWS_AS(validate(r2, {ModelVariant::KDotDot, 3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(validate(r1, {ModelVariant::KDotDot, 11, 3}), std::invalid_argument);
}

TEST_CASE("shape parameter tying is bit-identical across tied indices") {
  SUBCASE("K.. ties everything") {
    ShapeParams s(ModelVariant::KDotDot, 3, 4, 1);
    s.block(2, 0) = {5.25, 7.75};
    for (int n = 0; n < 4; ++n) {
      CHECK(s.alpha(2, n, 0) == 5.25);
      CHECK(s.delta(2, n, 0) == 7.75);
    }
  }
  SUBCASE("KN. varies over patients only") {
    ShapeParams s(ModelVariant::KNDot, 2, 3, 1);
    s.block(1, 2) = {2.5, 3.5};
    CHECK(s.alpha(1, 2, 0) == 2.5);
    CHECK(s.alpha(1, 0, 0) == 1.0);  // untouched block keeps its default
  }
  SUBCASE("K.R varies over samples, tied over patients") {
    ShapeParams s(ModelVariant::KDotR, 9, 4, 2);
    s.block(4, 1) = {8.0, 2.0};
    for (int n = 0; n < 4; ++n) CHECK(s.alpha(4, n, 1) == 8.0);
    CHECK(s.alpha(4, 0, 0) == 1.0);
    CHECK(s.pool_size() == 4);
  }
}

TEST_CASE("default cluster counts") {
  CHECK(default_cluster_count(ModelVariant::KDotDot, 3, 1) == 3);
  CHECK(default_cluster_count(ModelVariant::KNDot, 3, 1) == 3);
  CHECK(default_cluster_count(ModelVariant::KDotR, 3, 2) == 9);
  CHECK(default_cluster_count(ModelVariant::KDotR, 3, 3) == 27);
}

TEST_CASE("extract_sample produces an R=1 view with the same ids") {
  auto m = oracle::make_matrix(3, 2, 2, {0.1, 0.2, 0.3, 0.4,
                                         0.5, 0.6, 0.7, 0.8,
                                         0.15, 0.25, 0.35, 0.45});
  const auto s1 = m.extract_sample(1);
  CHECK(s1.n_samples() == 1);
  CHECK(s1.n_patients() == 2);
  CHECK(s1.value(0, 0, 0) == m.value(0, 0, 1));
  CHECK(s1.value(2, 1, 0) == m.value(2, 1, 1));
  CHECK(s1.cpg_ids() == m.cpg_ids());
  CHECK_THROWS_AS(m.extract_sample(2), std::invalid_argument);
}

TEST_CASE("variant names round trip") {
  for (auto v : {ModelVariant::KDotDot, ModelVariant::KNDot, ModelVariant::KDotR})
    CHECK(variant_from_name(variant_name(v)) == v);
  CHECK_THROWS_AS(variant_from_name("bogus"), std::invalid_argument);
}
