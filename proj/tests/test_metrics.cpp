#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betamix/metrics.hpp"
#include "betamix/rng.hpp"

using namespace betamix;

namespace {

// Expands a contingency table (true category x assigned cluster) into two
// label vectors.
void expand(const std::vector<std::vector<int>>& table, std::vector<int>* a,
            std::vector<int>* b) {
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j)
      for (int m = 0; m < table[i][j]; ++m) {
        a->push_back(static_cast<int>(i));
        b->push_back(static_cast<int>(j));
      }
}

}  // namespace

TEST_CASE("param_count per variant") {
  CHECK(param_count({ModelVariant::KDotDot, 3, 3}, 4, 1) == 8);
  CHECK(param_count({ModelVariant::KNDot, 3, 3}, 4, 1) == 26);
  CHECK(param_count({ModelVariant::KDotR, 9, 3}, 4, 2) == 44);
}

TEST_CASE("aic and bic from the printed formulas") {
  FittedModel m;
  m.spec = {ModelVariant::KDotDot, 1, 3};  // Q = 2*1 + 0 = 2
  m.N = 1;
  m.R = 1;
  m.C = 100;
  m.loglik_trace = {0.0};  // L = 1
  m.assigned_log_post_sum = 0.0;
  const auto ic = aic_bic_icl(m, 100);
  CHECK(ic.aic == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(ic.bic == doctest::Approx(2.0 * std::log(100.0)).epsilon(1e-14));
}

TEST_CASE("one-hot responsibilities make ICL equal BIC") {
  FittedModel m;
  m.spec = {ModelVariant::KDotDot, 2, 3};
  m.N = 1;
  m.R = 1;
  m.C = 4;
  m.loglik_trace = {-10.0};
  m.responsibilities = {1, 0, 0, 1, 1, 0, 0, 1};
  const auto ic = aic_bic_icl(m, 4);
  CHECK(ic.icl == doctest::Approx(ic.bic).epsilon(1e-14));
}

TEST_CASE("ICL never exceeds BIC") {
  RngStream rng(8, 0x1C1);
  FittedModel m;
  m.spec = {ModelVariant::KDotDot, 3, 3};
  m.N = 1;
  m.R = 1;
  m.C = 50;
  m.loglik_trace = {-123.4};
  for (std::size_t c = 0; c < 50; ++c) {
    double a = rng.next_unit(), b = rng.next_unit(), cc = rng.next_unit();
    const double s = a + b + cc;
    m.responsibilities.push_back(a / s);
    m.responsibilities.push_back(b / s);
    m.responsibilities.push_back(cc / s);
  }
  const auto ic = aic_bic_icl(m, 50);
  CHECK(ic.icl <= ic.bic);
}

TEST_CASE("ari basics") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  CHECK(ari(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<int> relabeled{5, 5, 3, 3, 9, 9};
  CHECK(ari(a, relabeled) == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<int> shorter{0, 1};
  CHECK_THROWS_AS(ari(a, shorter), std::invalid_argument);
  CHECK(ari(a, relabeled) == doctest::Approx(ari(relabeled, a)).epsilon(1e-14));
}

TEST_CASE("ari of the published single-sample contingency table is 0.997") {
  std::vector<int> truth, assigned;
  expand({{0, 5866, 12},
          {0, 8, 7109},
          {7004, 0, 1}},
         &truth, &assigned);
  REQUIRE(truth.size() == 20000);
  CHECK(std::abs(ari(truth, assigned) - 0.997) <= 0.001);
}

TEST_CASE("ari of the published nine-cluster contingency table is 0.929") {
  std::vector<int> truth, assigned;
  expand({{0, 0, 0, 0, 0, 0, 1993, 14, 0},
          {0, 0, 0, 0, 0, 30, 975, 0, 0},
          {2861, 0, 5, 0, 0, 0, 0, 0, 0},
          {3, 0, 1335, 0, 661, 0, 0, 0, 0},
          {0, 7, 0, 979, 0, 0, 0, 0, 0},
          {0, 0, 0, 0, 0, 5, 2, 2967, 0},
          {0, 0, 0, 0, 0, 0, 0, 0, 3060},
          {0, 2958, 0, 1, 0, 0, 0, 0, 0},
          {0, 0, 0, 0, 0, 2140, 0, 4, 0}},
         &truth, &assigned);
  REQUIRE(truth.size() == 20000);
  CHECK(std::abs(ari(truth, assigned) - 0.929) <= 0.001);
}

TEST_CASE("uncertainty") {
  const std::vector<double> resp{1, 0, 0,
                                 0.6, 0.3, 0.1};
  const auto u = uncertainty(resp, 2, 3);
  CHECK(u[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(0.4).epsilon(1e-12));

  const std::vector<double> uniform9(9, 1.0 / 9.0);
  const auto u9 = uncertainty(uniform9, 1, 9);
  CHECK(u9[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("selection report picks minima per criterion") {
  SelectionEntry a{"a", ModelVariant::KDotDot, 3, -100.0, 8, {10.0, 20.0, 30.0}};
  SelectionEntry b{"b", ModelVariant::KNDot, 3, -90.0, 26, {12.0, 18.0, 29.0}};
  const auto report = build_selection_report({a, b});
  CHECK(report.best_by.at("aic") == "a");
  CHECK(report.best_by.at("bic") == "b");
  CHECK(report.best_by.at("icl") == "b");
}
