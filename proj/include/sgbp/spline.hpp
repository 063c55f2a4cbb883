#pragma once

#include <Eigen/Core>
#include <span>

namespace sgbp {

// Weights w such that the natural cubic spline through (x_k, y_k) evaluates at x as
// sum_k w_k y_k (the spline is linear in the ordinates). One knot: constant; two knots:
// a straight line; three or more: natural cubic spline with the boundary cubic pieces
// extended for points outside the knot range. Knots must be strictly increasing.
Eigen::VectorXd natural_spline_weights(std::span<const double> xs, double x);

}  // namespace sgbp
