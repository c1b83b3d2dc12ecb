#include "psid/svgd.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "psid/common.hpp"
#include "psid/linalg.hpp"

namespace psid {

namespace {

// Gradient batch: evaluates grad_fn on every particle. The parallel and
// serial paths perform the same arithmetic on independent rows, so their
// results are bit-identical.
void gradient_batch(const Matrix& particles, const LogDensityGrad& grad_fn, Matrix& grads,
                    Vector& logp, bool parallel, int iter) {
  const int np = static_cast<int>(particles.rows());
  const auto dim = static_cast<std::size_t>(particles.cols());
  std::exception_ptr err;

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < np; ++i) {
    try {
      // Matrix is column-major by default; rows are not contiguous, so copy.
      Vector xi = particles.row(i).transpose();
      Vector g(particles.cols());
      std::span<const double> xs(xi.data(), dim);
      logp[i] = grad_fn(xs, g);
      grads.row(i) = g.transpose();
    } catch (const std::exception& e) {
#pragma omp critical
      if (!err) {
        err = std::make_exception_ptr(NumericalError(
            "svgd: gradient failed at iteration " + std::to_string(iter) + ", particle " +
            std::to_string(i) + ": " + e.what()));
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

SvgdResult svgd_run(Matrix particles, const LogDensityGrad& grad_fn, const SvgdOptions& opts) {
  const int np = static_cast<int>(particles.rows());
  const auto dim = particles.cols();
  require(np >= 1 && dim >= 1, "svgd: need at least one particle and one dimension");
  require(opts.iters >= 0, "svgd: negative iteration count");
  require(opts.step > 0.0, "svgd: step must be positive");

  SvgdResult res;
  res.logp_trace.reserve(static_cast<std::size_t>(opts.iters));

  Matrix grads(np, dim), phi(np, dim);
  Matrix mom = Matrix::Zero(np, dim), hist = Matrix::Zero(np, dim);
  Vector logp(np);
  std::vector<Vector> rows(static_cast<std::size_t>(np));

  double med2 = 0.0;
  for (int it = 0; it < opts.iters; ++it) {
    gradient_batch(particles, grad_fn, grads, logp, opts.parallel, it);
    res.logp_trace.push_back(logp.mean());

    if (np == 1) {
      phi = grads;
    } else {
      for (int i = 0; i < np; ++i) rows[static_cast<std::size_t>(i)] = particles.row(i).transpose();
      med2 = median_pairwise_sq_distance(rows);
      const double bw = (med2 > 1e-300) ? med2 / (2.0 * std::log(static_cast<double>(np) + 1.0))
                                        : 1.0;
      phi.setZero();
      for (int i = 0; i < np; ++i) {
        for (int j = 0; j < np; ++j) {
          const double d2 = (particles.row(j) - particles.row(i)).squaredNorm();
          const double k = std::exp(-d2 / bw);
          // k * grad log p(x_j) + grad_{x_j} k(x_j, x_i)
          phi.row(i) += k * grads.row(j) + (2.0 * k / bw) * (particles.row(i) - particles.row(j));
        }
      }
      phi /= static_cast<double>(np);
    }

    // Adam-style step on the particle flow
    mom = opts.beta1 * mom.array() + (1.0 - opts.beta1) * phi.array();
    hist = opts.beta2 * hist.array() + (1.0 - opts.beta2) * phi.array().square();
    const double bc1 = 1.0 - std::pow(opts.beta1, it + 1);
    const double bc2 = 1.0 - std::pow(opts.beta2, it + 1);
    particles.array() +=
        opts.step * (mom.array() / bc1) / (opts.fudge + (hist.array() / bc2).sqrt());

    if (!particles.allFinite())
      throw NumericalError("svgd: particles diverged at iteration " + std::to_string(it));
    if (opts.monitor && opts.monitor_every > 0 && (it + 1) % opts.monitor_every == 0)
      opts.monitor(it + 1, particles);
  }

  if (np >= 2) {
    for (int i = 0; i < np; ++i) rows[static_cast<std::size_t>(i)] = particles.row(i).transpose();
    res.collapsed = median_pairwise_sq_distance(rows) < 1e-20;
  }
  res.particles = std::move(particles);
  return res;
}

}  // namespace psid
