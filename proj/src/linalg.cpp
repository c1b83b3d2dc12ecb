#include "psid/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <string>

namespace psid {

Vector least_squares(const Matrix& A, const Vector& b) {
  require(A.rows() == b.size(), "least_squares: row count mismatch");
  require(A.rows() >= A.cols(), "least_squares: system must have n >= k");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0 || smax / smin > 1e12) {
    throw NumericalError("least_squares: rank-deficient or ill-conditioned matrix (cond=" +
                         std::to_string(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) + ")");
  }
  Vector x = svd.solve(b);
  if (!x.allFinite()) throw NumericalError("least_squares: non-finite solution");
  return x;
}

double median_pairwise_sq_distance(const std::vector<Vector>& points) {
  require(points.size() >= 2, "median_pairwise_sq_distance: need at least 2 points");
  std::vector<double> d2;
  d2.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      d2.push_back((points[i] - points[j]).squaredNorm());
    }
  }
  std::sort(d2.begin(), d2.end());
  const std::size_t n = d2.size();
  if (n % 2 == 1) return d2[n / 2];
  return 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
}

}  // namespace psid
