// Times the SVGD gradient batch with OpenMP particle parallelism against the
// serial reference path on a realistic fit problem, and checks agreement.
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "psid/bpinn.hpp"
#include "psid/harness.hpp"

using namespace psid;

int main(int argc, char** argv) {
  const int iters = (argc > 1) ? std::atoi(argv[1]) : 50;
  const int particles = (argc > 2) ? std::atoi(argv[2]) : 30;

  ExperimentConfig cfg;
  cfg.grid = "smib";
  cfg.dynamics = "fast";
  cfg.seed = 7;
  Dataset ds = make_dataset(cfg);

  BpinnOptions opts;
  opts.particles = particles;
  opts.iters = iters;

  auto timed = [&](bool parallel) {
    opts.parallel = parallel;
    auto t0 = std::chrono::steady_clock::now();
    Posterior post = bpinn_fit(ds, opts, Rng(cfg.seed));
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::pair{s, std::move(post)};
  };

  auto [t_par, post_par] = timed(true);
  auto [t_ser, post_ser] = timed(false);

  std::cout << "svgd gradient batch, " << particles << " particles x " << iters << " iterations\n"
            << "  openmp: " << t_par << " s\n"
            << "  serial: " << t_ser << " s\n"
            << "  speedup: " << t_ser / t_par << "x\n";

  const double diff = (post_par.particles - post_ser.particles).cwiseAbs().maxCoeff();
  std::cout << "  max |parallel - serial| = " << diff << (diff == 0.0 ? " (bit-identical)" : "")
            << "\n";
  return diff == 0.0 ? 0 : 1;
}
