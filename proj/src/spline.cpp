#include "sgbp/spline.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace sgbp {

namespace {

// Value at x of the natural cubic spline through (xs, ys). Outside [xs.front, xs.back]
// the first/last cubic segment is evaluated with its parameter running past [0, 1].
double natural_spline_value(std::span<const double> xs, const Eigen::VectorXd& ys, double x) {
  const int n = static_cast<int>(xs.size());
  // Second derivatives: natural boundary conditions, tridiagonal system for the interior.
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n);
  const int interior = n - 2;
  if (interior > 0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(interior, interior);
    Eigen::VectorXd rhs(interior);
    for (int i = 1; i <= interior; ++i) {
      const double h_prev = xs[i] - xs[i - 1];
      const double h_next = xs[i + 1] - xs[i];
      const int r = i - 1;
      if (r > 0) a(r, r - 1) = h_prev;
      a(r, r) = 2.0 * (xs[i + 1] - xs[i - 1]);
      if (r + 1 < interior) a(r, r + 1) = h_next;
      rhs[r] = 6.0 * ((ys[i + 1] - ys[i]) / h_next - (ys[i] - ys[i - 1]) / h_prev);
    }
    sigma.segment(1, interior) = a.colPivHouseholderQr().solve(rhs);
  }

  int s = n - 2;  // segment index; clamp to boundary segments outside the knot range
  for (int k = 0; k < n - 1; ++k) {
    if (x < xs[k + 1]) {
      s = k;
      break;
    }
  }
  const double h = xs[s + 1] - xs[s];
  const double t = (x - xs[s]) / h;
  const double u = 1.0 - t;
  return ys[s] * u + ys[s + 1] * t +
         (h * h / 6.0) * ((t * t * t - t) * sigma[s + 1] + (u * u * u - u) * sigma[s]);
}

}  // namespace

Eigen::VectorXd natural_spline_weights(std::span<const double> xs, double x) {
  const int n = static_cast<int>(xs.size());
  if (n < 1) throw std::invalid_argument("natural_spline_weights: need at least one knot");
  for (int k = 0; k + 1 < n; ++k)
    if (!(xs[k] < xs[k + 1]))
      throw std::invalid_argument("natural_spline_weights: knots must be strictly increasing");

  Eigen::VectorXd w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  if (n == 2) {
    const double t = (x - xs[0]) / (xs[1] - xs[0]);
    w[0] = 1.0 - t;
    w[1] = t;
    return w;
  }
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd basis = Eigen::VectorXd::Zero(n);
    basis[k] = 1.0;
    w[k] = natural_spline_value(xs, basis, x);
  }
  return w;
}

}  // namespace sgbp
