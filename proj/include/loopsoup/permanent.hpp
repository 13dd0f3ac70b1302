#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "loopsoup/linalg.hpp"

namespace loopsoup {

inline int cycle_count(const std::vector<Index>& sigma) {
  std::vector<char> seen(sigma.size(), 0);
  int cycles = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (std::size_t j = i; !seen[j]; j = std::size_t(sigma[j])) seen[j] = 1;
  }
  return cycles;
}

// Calls f(sigma, cycles, prod_i a(i, sigma(i))) for every permutation,
// or every derangement when zero_diagonal is set.
template <typename Derived, typename F>
void for_each_permutation_term(const Eigen::MatrixBase<Derived>& a, bool zero_diagonal, F&& f) {
  const Index n = a.rows();
  if (n != a.cols()) throw Error(Errc::NonSquare, "permanent of a non-square matrix");
  if (n > 10) throw Error(Errc::MatrixTooLarge, std::to_string(n) + " rows");
  std::vector<Index> sigma(n);
  std::iota(sigma.begin(), sigma.end(), Index(0));
  do {
    bool skip = false;
    typename Derived::Scalar prod(1);
    for (Index i = 0; i < n && !skip; ++i) {
      if (zero_diagonal && sigma[i] == i) skip = true;
      prod *= a(i, sigma[i]);
    }
    if (!skip) f(sigma, cycle_count(sigma), prod);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
}

/// Per_alpha(A) = sum_sigma alpha^{m(sigma)} prod A_{i sigma(i)}; derangements only when zero_diagonal.
template <typename Derived>
typename Derived::Scalar alpha_permanent(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar alpha,
                                         bool zero_diagonal = false) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() == 0) return Scalar(1);
  Scalar total(0);
  for_each_permutation_term(a, zero_diagonal, [&](const std::vector<Index>&, int m, Scalar prod) {
    Scalar w(1);
    for (int c = 0; c < m; ++c) w *= alpha;
    total += w * prod;
  });
  return total;
}

/// Coefficients of Per_alpha(A) as a polynomial in alpha (index = power).
template <typename Derived>
Vec<typename Derived::Scalar> alpha_permanent_polynomial(const Eigen::MatrixBase<Derived>& a,
                                                         bool zero_diagonal = false) {
  using Scalar = typename Derived::Scalar;
  Vec<Scalar> c = Vec<Scalar>::Zero(a.rows() + 1);
  if (a.rows() == 0) {
    c(0) = Scalar(1);
    return c;
  }
  for_each_permutation_term(a, zero_diagonal, [&](const std::vector<Index>&, int m, Scalar prod) { c(m) += prod; });
  return c;
}

}  // namespace loopsoup
