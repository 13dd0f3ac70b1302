#include "loopsoup/rate.hpp"

#include <cmath>
#include <limits>

#include "loopsoup/measure.hpp"

namespace loopsoup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A = V^{-1} - M_u; inside the domain exactly when A is a non-singular M-matrix.
bool in_domain(const MatrixXd& v_inv, const VectorXd& u, MatrixXd& w) {
  MatrixXd a = v_inv;
  a.diagonal() -= u;
  Eigen::EigenSolver<MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) return false;
  if (!(es.eigenvalues().real().minCoeff() > 0.0)) return false;
  w = a.inverse();
  return true;
}

bool nonpositive_entry(const VectorXd& y) { return (y.array() <= 0.0).any(); }

}  // namespace

double log_laplace_limit(const MatrixXd& v_f, const VectorXd& u) {
  MatrixXd w;
  if (!in_domain(guarded_inverse(v_f), u, w)) return kInf;
  MatrixXd m = MatrixXd::Identity(v_f.rows(), v_f.cols()) - u.asDiagonal() * v_f;
  return -std::log(determinant(m));
}

double rate_function_numerical(const MatrixXd& v_f, const VectorXd& y) {
  if (y.size() != v_f.rows()) throw Error(Errc::InvalidArgument, "y has wrong dimension");
  if (nonpositive_entry(y)) return kInf;
  const MatrixXd v_inv = guarded_inverse(v_f);
  const Index n = y.size();
  VectorXd u = VectorXd::Zero(n);
  MatrixXd w = v_f;
  for (int it = 0; it < 1000; ++it) {
    const VectorXd grad = y - w.diagonal();
    MatrixXd hess(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) hess(i, j) = w(i, j) * w(j, i);
    const VectorXd step = hess.ldlt().solve(grad);
    const double decrement = std::sqrt(std::max(0.0, grad.dot(step)));
    if (decrement < 1e-14) break;
    // damped step of a self-concordant barrier stays feasible
    double t = decrement > 0.25 ? 1.0 / (1.0 + decrement) : 1.0;
    MatrixXd w_next;
    while (!in_domain(v_inv, u + t * step, w_next)) t *= 0.5;
    u += t * step;
    w = w_next;
  }
  return u.dot(y) - log_laplace_limit(v_f, u);
}

double rate_function_closed_form(const MatrixXd& v_f, const VectorXd& y) {
  if (y.size() != v_f.rows()) throw Error(Errc::InvalidArgument, "y has wrong dimension");
  if (nonpositive_entry(y)) return kInf;
  if (y.size() == 1) {
    const double v = v_f(0, 0);
    return std::log(v / y(0)) - 1.0 + y(0) / v;
  }
  if (y.size() != 2) throw Error(Errc::InvalidArgument, "closed form needs one or two points");
  const double a = v_f(0, 0), b = v_f(1, 1), c = v_f(0, 1) * v_f(1, 0);
  const double d = a * b - c;
  const double s = std::sqrt(1.0 + 4.0 * y(0) * y(1) * c / (d * d));
  return std::log((1.0 + s) / (2.0 * y(0) * y(1))) + std::log(d) + (y(0) * b + y(1) * a) / d - 1.0 - s;
}

double rate_function(const Generator& g, const StateSet& points, const VectorXd& y) {
  require_transient(g);
  for (Index x : points)
    if (x < 0 || x >= g.size()) throw Error(Errc::InvalidSubset, "state index out of range");
  const MatrixXd v_f = potential(g).V(points, points);
  const double numeric = rate_function_numerical(v_f, y);
  if (points.size() > 2 || std::isinf(numeric)) return numeric;
  const double closed = rate_function_closed_form(v_f, y);
  if (std::abs(closed - numeric) > 1e-6)
    throw Error(Errc::DisagreementBeyondTolerance, "closed form and Legendre transform differ by " +
                                                       std::to_string(std::abs(closed - numeric)));
  return closed;
}

}  // namespace loopsoup
