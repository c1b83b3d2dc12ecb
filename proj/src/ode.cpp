#include "psid/ode.hpp"

#include <cmath>
#include <string>

namespace psid {

std::vector<OdePoint> rk4_integrate(const DerivFn& deriv, const Vector& x0, double t0, double t1,
                                    double dt) {
  require(dt > 0.0, "rk4_integrate: dt must be positive");
  require(t1 > t0, "rk4_integrate: t1 must exceed t0");

  std::vector<OdePoint> out;
  const double span = t1 - t0;
  const auto nfull = static_cast<std::size_t>(span / dt);
  out.reserve(nfull + 2);
  out.push_back({t0, x0});

  Vector x = x0;
  std::size_t i = 0;
  double t = t0;
  const double eps = 1e-12 * std::max(1.0, std::abs(t1));
  while (t < t1 - eps) {
    double tn = t0 + static_cast<double>(i + 1) * dt;  // index-based grid, no drift
    if (tn > t1 - eps) tn = t1;
    const double h = tn - t;
    Vector k1 = deriv(t, x);
    Vector k2 = deriv(t + 0.5 * h, x + 0.5 * h * k1);
    Vector k3 = deriv(t + 0.5 * h, x + 0.5 * h * k2);
    Vector k4 = deriv(t + h, x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = tn;
    ++i;
    if (!x.allFinite()) {
      throw NumericalError("rk4_integrate: state diverged at t=" + std::to_string(t));
    }
    out.push_back({t, x});
  }
  return out;
}

}  // namespace psid
