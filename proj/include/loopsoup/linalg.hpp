#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "loopsoup/error.hpp"

namespace loopsoup {

using Index = Eigen::Index;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Sorted list of distinct state indices.
using StateSet = std::vector<Index>;

StateSet make_subset(StateSet states, Index n);
StateSet complement_of(const StateSet& a, Index n);
StateSet full_set(Index n);
bool contains(const StateSet& a, Index x);

inline constexpr double kMinRcond = 1e-13;

// Partial-pivot LU that refuses ill-conditioned input.
template <typename Derived>
Eigen::PartialPivLU<Mat<typename Derived::Scalar>> guarded_lu(const Eigen::MatrixBase<Derived>& a,
                                                               double min_rcond = kMinRcond) {
  using Scalar = typename Derived::Scalar;
  Eigen::PartialPivLU<Mat<Scalar>> lu(a.derived());
  const double rc = static_cast<double>(lu.rcond());
  if (!(rc >= min_rcond)) {
    throw Error(Errc::SingularSystem, "reciprocal condition estimate " + std::to_string(rc));
  }
  return lu;
}

template <typename Derived>
Mat<typename Derived::Scalar> guarded_inverse(const Eigen::MatrixBase<Derived>& a,
                                              double min_rcond = kMinRcond) {
  if (a.rows() == 0) return Mat<typename Derived::Scalar>(0, 0);
  return guarded_lu(a, min_rcond).inverse();
}

template <typename Derived>
Mat<typename Derived::Scalar> principal(const Eigen::MatrixBase<Derived>& m, const StateSet& a) {
  return m.derived()(a, a);
}

template <typename Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return typename Derived::Scalar(1);
  return m.derived().partialPivLu().determinant();
}

template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(m.derived().template cast<double>(), false);
  if (es.info() == Eigen::Success) return es.eigenvalues().cwiseAbs().maxCoeff();
  // power iteration on |m|; adequate for the non-negative matrices used here
  VectorXd v = VectorXd::Ones(m.rows()) / std::sqrt(double(m.rows()));
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    VectorXd w = m.derived().template cast<double>().cwiseAbs() * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    if (std::abs(nw - lambda) < 1e-15 * std::max(1.0, nw)) return nw;
    lambda = nw;
    v = w;
  }
  return lambda;
}

/// det(I + M_w V) by the subset expansion 1 + sum over nonempty A of prod_A w * det V_A.
template <typename Derived, typename WDerived>
typename Derived::Scalar subset_expansion(const Eigen::MatrixBase<Derived>& v,
                                          const Eigen::MatrixBase<WDerived>& w) {
  using Scalar = typename Derived::Scalar;
  StateSet support;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) != Scalar(0)) support.push_back(i);
  if (support.size() > 20) throw Error(Errc::MatrixTooLarge, "subset expansion over more than 20 states");
  const auto k = support.size();
  Scalar total(1);
  for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
    StateSet a;
    Scalar weight(1);
    for (std::size_t b = 0; b < k; ++b)
      if (mask & (1ul << b)) {
        a.push_back(support[b]);
        weight *= w(support[b]);
      }
    total += weight * determinant(principal(v, a));
  }
  return total;
}

}  // namespace loopsoup
