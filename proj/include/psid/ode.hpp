#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "psid/diff.hpp"

namespace psid {

using DerivFn = std::function<Vector(double t, const Vector& x)>;

struct OdePoint {
  double t;
  Vector x;
};

// Classical fixed-step 4th-order Runge-Kutta. Output contains both endpoints;
// the last step is shortened so the final point lands exactly on t1.
std::vector<OdePoint> rk4_integrate(const DerivFn& deriv, const Vector& x0, double t0, double t1,
                                    double dt);

}  // namespace psid
