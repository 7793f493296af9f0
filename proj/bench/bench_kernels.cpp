// Kernel benchmark: OpenMP versions against the serial reference, and the
// closed-form shape update against the exact-score Newton solve.
//
//   ./bench_kernels [C] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "betamix/em.hpp"
#include "betamix/kernels.hpp"
#include "betamix/rng.hpp"
#include "betamix/simulator.hpp"

using namespace betamix;

namespace {

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, seconds(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t C = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const int threads = argc > 2 ? std::atoi(argv[2]) : 0;

  SimConfig config;
  config.C = C;
  config.seed = 17;
  const auto data = simulate(config);

  const auto fm = kernels::build_features(data.matrix, ModelVariant::KDotR, threads);
  ShapeParams shapes(ModelVariant::KDotR, 9, config.N, config.R);
  RngStream rng(99, 0xbe);
  std::vector<double> tau(9);
  double tsum = 0.0;
  for (int k = 0; k < 9; ++k) {
    tau[k] = 0.5 + rng.next_unit();
    tsum += tau[k];
    for (int b = 0; b < 2; ++b)
      shapes.block(k, b) = {2.0 + 30.0 * rng.next_unit(), 2.0 + 30.0 * rng.next_unit()};
  }
  for (double& t : tau) t /= tsum;
  const auto cc = kernels::digest_parameters(tau, shapes);
  std::vector<double> resp(C * 9);

  std::printf("C = %zu sites, K = 9, N = %d, R = %d\n", C, config.N, config.R);

  const double t_post_serial =
      time_best_of(3, [&] { kernels::posterior_pass_serial(fm, cc, resp); });
  const double t_post_par =
      time_best_of(3, [&] { kernels::posterior_pass(fm, cc, resp, threads); });
  std::printf("posterior pass   serial %8.4f s   parallel %8.4f s   speedup %.2fx\n",
              t_post_serial, t_post_par, t_post_serial / t_post_par);

  const double t_stats_serial =
      time_best_of(3, [&] { kernels::stats_pass_serial(fm, resp, 9); });
  const double t_stats_par =
      time_best_of(3, [&] { kernels::stats_pass(fm, resp, 9, threads); });
  std::printf("stats pass       serial %8.4f s   parallel %8.4f s   speedup %.2fx\n",
              t_stats_serial, t_stats_par, t_stats_serial / t_stats_par);

  // Shape solve: the part of the M-step the digamma bound turns into a pair
  // of exp calls. Newton solves the same score equations with exact digamma.
  std::vector<SufficientStats> stats;
  for (int i = 0; i < 1000; ++i) {
    const double a = 2.0 + 40.0 * rng.next_unit();
    const double d = 2.0 + 40.0 * rng.next_unit();
    SufficientStats st;
    st.y1 = digamma_exact(a) - digamma_exact(a + d);
    st.y2 = digamma_exact(d) - digamma_exact(a + d);
    st.weight = 1000.0;
    stats.push_back(st);
  }
  volatile double sink = 0.0;
  const double t_closed = time_best_of(5, [&] {
                            double acc = 0.0;
                            for (const auto& st : stats) acc += closed_form_shape(st).alpha;
                            sink = acc;
                          }) / stats.size();
  const double t_newton = time_best_of(5, [&] {
                            double acc = 0.0;
                            for (const auto& st : stats)
                              acc += newton_shape(st, closed_form_shape(st)).alpha;
                            sink = acc;
                          }) / stats.size();
  (void)sink;
  std::printf("shape update     closed %8.1f ns   newton %10.1f ns   ratio %.1fx\n",
              t_closed * 1e9, t_newton * 1e9, t_newton / t_closed);
  return 0;
}
