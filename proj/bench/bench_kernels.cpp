// Timing comparison of the serial reference kernels against the production
// (sorted, chunk-reduced, OpenMP) paths. Not part of the test suite; run
//   ./bench_kernels [n]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "lodreg/bootstrap.hpp"
#include "lodreg/gehan.hpp"
#include "lodreg/parallel.hpp"
#include "lodreg/pseudo.hpp"
#include "lodreg/reference.hpp"
#include "lodreg/sim.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         reps;
}

void report(const char* name, double ref_ms, double prod_ms) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.1fx\n", name, ref_ms, prod_ms,
              ref_ms / prod_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 2000;
  lodreg::SimScenario sc;
  sc.n = n;
  const lodreg::CalibratedLimit cal = lodreg::calibrate_limit(sc, 1'000'000);
  const lodreg::GeneratedData gen = lodreg::generate_dataset(sc, cal.c, 0);
  const auto& data = gen.obs;

  std::printf("n = %ld, workers = %d\n", static_cast<long>(n),
              lodreg::par::workers());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "reference", "production",
              "speedup");

  const Eigen::VectorXd alpha0 = Eigen::VectorXd::Zero(2);
  report("gehan objective",
         time_ms(5, [&] { lodreg::ref::gehan_objective(alpha0, data.v,
                                                       data.x, data.delta); }),
         time_ms(50, [&] { lodreg::gehan_objective(alpha0, data); }));
  report("gehan subgradient",
         time_ms(5, [&] { lodreg::ref::gehan_subgradient(
                        alpha0, data.v, data.x, data.delta); }),
         time_ms(50, [&] { lodreg::gehan_subgradient(alpha0, data); }));

  const lodreg::TwoStageFit fit = lodreg::fit_two_stage(data, sc.family);
  report("pseudo score",
         time_ms(5, [&] { lodreg::ref::pseudo_score(
                        fit.pseudo.theta, data, fit.nuisance, sc.family); }),
         time_ms(50, [&] { lodreg::pseudo_score(fit.pseudo.theta, data,
                                               fit.nuisance, sc.family); }));
  report("pseudo loglik",
         time_ms(2, [&] { lodreg::ref::pseudo_loglik(
                        fit.pseudo.theta, data, fit.nuisance, sc.family); }),
         time_ms(50, [&] { lodreg::pseudo_loglik(fit.pseudo.theta, data,
                                                fit.nuisance, sc.family); }));

  // bootstrap: one worker vs all workers over the replicate loop
  const int hw = lodreg::par::workers();
  lodreg::SimScenario small = sc;
  small.n = 200;
  const lodreg::GeneratedData g2 = lodreg::generate_dataset(small, cal.c, 1);
  lodreg::par::set_workers(1);
  const double boot_serial =
      time_ms(1, [&] { lodreg::bootstrap(g2.obs, sc.family, 50, 7); });
  lodreg::par::set_workers(hw);
  const double boot_par =
      time_ms(1, [&] { lodreg::bootstrap(g2.obs, sc.family, 50, 7); });
  report("bootstrap (n=200, B=50)", boot_serial, boot_par);
  return 0;
}
