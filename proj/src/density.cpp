#include "loopsoup/density.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "loopsoup/measure.hpp"

namespace loopsoup {

namespace {

constexpr double kMaxTerms = 5e7;

// Partial sums of e^x up to each degree: out[k] = sum_{d<=k} x^d/d!.
std::vector<double> exp_partial_sums(double x, int m_max) {
  std::vector<double> out(std::size_t(m_max) + 1);
  double term = 1.0, acc = 1.0;
  out[0] = 1.0;
  for (int d = 1; d <= m_max; ++d) {
    term *= x / d;
    acc += term;
    out[d] = acc;
  }
  return out;
}

double balanced_sum(const MatrixXd& l, const VectorXd& rho, int m_max) {
  const Index n = l.rows();
  std::vector<std::pair<Index, Index>> cells;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) cells.emplace_back(i, j);
  std::vector<std::vector<double>> diag;
  for (Index i = 0; i < n; ++i) diag.push_back(exp_partial_sums(l(i, i) * rho(i), m_max));

  std::vector<int> row(std::size_t(n), 0), col(std::size_t(n), 0);
  double total = 0.0;
  std::function<void(std::size_t, double)> walk = [&](std::size_t c, double weight) {
    if (c == cells.size()) {
      double w = weight;
      for (Index i = 0; i < n; ++i) {
        if (row[i] != col[i]) return;
        w *= diag[i][std::size_t(m_max - row[i])];
      }
      total += w;
      return;
    }
    const auto [i, j] = cells[c];
    const double base = l(i, j) * std::sqrt(rho(i) * rho(j));
    double term = weight;
    for (int k = 0; row[i] + k <= m_max; ++k) {
      if (k > 0) {
        term *= base / k;
        if (term == 0.0) break;
      }
      row[i] += k;
      col[j] += k;
      walk(c + 1, term);
      row[i] -= k;
      col[j] -= k;
    }
  };
  walk(0, 1.0);
  return total * determinant(MatrixXd(-l));
}

}  // namespace

DensityResult density_balanced_series(const MatrixXd& l_f, const VectorXd& rho, int m_max) {
  const Index n = l_f.rows();
  const double per_row = std::tgamma(double(m_max + n)) / (std::tgamma(double(n)) * std::tgamma(double(m_max + 1)));
  if (std::pow(per_row, double(n)) > kMaxTerms) throw Error(Errc::MatrixTooLarge, "balanced-matrix series too large");
  DensityResult r;
  r.value = balanced_sum(l_f, rho, m_max);
  r.remainder = m_max > 0 ? std::abs(r.value - balanced_sum(l_f, rho, m_max - 1)) : std::abs(r.value);
  return r;
}

VectorXd power_series_det_coefficients(const MatrixXd& v, double alpha, int m_max) {
  const Index n = v.rows();
  const double size = std::pow(double(m_max + 1), double(n));
  if (size > kMaxTerms) throw Error(Errc::MatrixTooLarge, "coefficient array too large");
  const Index total = Index(size);
  // det(M_s + V) = sum_a prod_{i in a} s_i det(V restricted to the complement of a)
  const unsigned long subsets = 1ul << n;
  std::vector<double> p(subsets);
  for (unsigned long a = 0; a < subsets; ++a) {
    StateSet rest;
    for (Index i = 0; i < n; ++i)
      if (!(a & (1ul << i))) rest.push_back(i);
    p[a] = determinant(principal(v, rest));
  }
  if (!(p[0] > 0.0)) throw Error(Errc::SingularSystem, "det V is not positive");

  std::vector<Index> stride(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) stride[i] = i == 0 ? 1 : stride[i - 1] * (m_max + 1);
  VectorXd f = VectorXd::Zero(total);
  f(0) = std::pow(p[0], -alpha);
  std::vector<int> m(std::size_t(n), 0);
  for (Index lin = 1; lin < total; ++lin) {
    for (Index i = 0; i < n; ++i) {  // increment the multi-index
      if (++m[i] <= m_max) break;
      m[i] = 0;
    }
    int deg = 0;
    for (int mi : m) deg += mi;
    double acc = 0.0;
    for (unsigned long a = 1; a < subsets; ++a) {
      int size_a = 0;
      Index offset = 0;
      bool fits = true;
      for (Index i = 0; i < n && fits; ++i)
        if (a & (1ul << i)) {
          fits = m[i] >= 1;
          ++size_a;
          offset += stride[i];
        }
      if (!fits || p[a] == 0.0) continue;
      acc += p[a] * (deg - size_a + alpha * size_a) * f(lin - offset);
    }
    f(lin) = -acc / (p[0] * deg);
  }
  return f;
}

DensityResult density_coefficient_series(const MatrixXd& v_f, double alpha, const VectorXd& rho, int m_max) {
  const Index n = v_f.rows();
  const VectorXd f = power_series_det_coefficients(v_f, alpha, m_max);
  std::vector<int> m(std::size_t(n), 0);
  DensityResult r;
  for (Index lin = 0; lin < f.size(); ++lin) {
    if (lin > 0)
      for (Index i = 0; i < n; ++i) {
        if (++m[i] <= m_max) break;
        m[i] = 0;
      }
    double log_w = 0.0;
    bool outer = false;
    for (Index i = 0; i < n; ++i) {
      log_w += (m[i] + alpha - 1.0) * std::log(rho(i)) - std::lgamma(m[i] + alpha);
      outer = outer || m[i] == m_max;
    }
    const double term = f(lin) * std::exp(log_w);
    r.value += term;
    if (outer) r.remainder += term;
  }
  r.remainder = std::abs(r.remainder);
  return r;
}

DensityResult occupation_density(const Generator& g, const StateSet& f, double alpha, const VectorXd& rho,
                                 int m_max, double tolerance) {
  require_transient(g);
  if (f.empty()) throw Error(Errc::EmptySubset, "density needs at least one state");
  if (std::set<Index>(f.begin(), f.end()).size() != f.size()) throw Error(Errc::InvalidSubset, "repeated state");
  for (Index x : f)
    if (x < 0 || x >= g.size()) throw Error(Errc::InvalidSubset, "state index out of range");
  if (rho.size() != Index(f.size())) throw Error(Errc::InvalidArgument, "rho has wrong dimension");
  if (!rho.allFinite() || (rho.array() <= 0.0).any()) throw Error(Errc::NonPositiveRho, "rho must be positive");
  if (!(alpha > 0.0)) throw Error(Errc::InvalidArgument, "alpha must be positive");
  if (m_max < 0) throw Error(Errc::InvalidArgument, "mMax must be non-negative");
  const MatrixXd v_f = potential(g).V(f, f);
  const DensityResult r = alpha == 1.0 ? density_balanced_series(-guarded_inverse(v_f), rho, m_max)
                                       : density_coefficient_series(v_f, alpha, rho, m_max);
  if (tolerance > 0.0 && r.remainder > tolerance)
    throw Error(Errc::TruncationTooSmall, "remainder estimate " + std::to_string(r.remainder));
  return r;
}

}  // namespace loopsoup
