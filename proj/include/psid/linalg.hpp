#pragma once

#include <vector>

#include "psid/diff.hpp"

namespace psid {

// Minimizer of ||Ax - b||_2 via SVD. Throws NumericalError when the condition
// number exceeds 1e12 (near-collinear feature matrices).
Vector least_squares(const Matrix& A, const Vector& b);

// Median of all pairwise squared Euclidean distances; needs >= 2 points.
double median_pairwise_sq_distance(const std::vector<Vector>& points);

}  // namespace psid
