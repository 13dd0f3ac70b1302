#include "loopsoup/measure.hpp"

#include "loopsoup/loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loopsoup {

void require_transient(const Generator& g) {
  if (!g.transient()) throw Error(Errc::RequiresTransient, "rho(Q) = " + std::to_string(g.jump_radius()));
}

MatrixXd symmetrized_kernel(const MatrixXd& v, const VectorXd& chi) {
  if (chi.size() != v.rows()) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
  if (!chi.allFinite() || (chi.array() < 0.0).any()) throw Error(Errc::InvalidArgument, "chi must be finite and non-negative");
  const VectorXd s = chi.cwiseSqrt();
  return s.asDiagonal() * v * s.asDiagonal();
}

namespace {

void check_states(const Generator& g, std::span<const Index> xs) {
  for (Index x : xs)
    if (x < 0 || x >= g.size()) throw Error(Errc::InvalidArgument, "state index out of range");
}

double cyclic_product(const MatrixXd& v, std::span<const Index> xs) {
  double p = 1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) p *= v(xs[i], xs[(i + 1) % xs.size()]);
  return p;
}

}  // namespace

double discrete_loop_mass(const Generator& g, const std::vector<Index>& cycle) {
  if (cycle.empty()) throw Error(Errc::InvalidCycle, "empty cycle");
  check_states(g, cycle);
  const auto [n, primitive] = multiplicity_primitive(cycle);
  return cyclic_product(g.Q(), cycle) / double(n);
}

double multi_occupation_expectation(const Generator& g, std::span<const Index> tuple) {
  if (tuple.empty()) throw Error(Errc::EmptyTuple, "empty tuple");
  check_states(g, tuple);
  require_transient(g);
  return cyclic_product(potential(g).V, tuple);
}

double occupation_product_moment(const Generator& g, std::span<const Index> multiset) {
  const std::size_t n = multiset.size();
  if (n == 0) throw Error(Errc::EmptyTuple, "empty multiset");
  if (n > 10) throw Error(Errc::TupleTooLarge, std::to_string(n) + " points");
  check_states(g, multiset);
  require_transient(g);
  const MatrixXd v = potential(g).V;
  // cyclic products are rotation invariant, so (1/n) sum over S_n = sum with the first slot fixed
  std::vector<std::size_t> rest(n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  std::vector<Index> seq(n);
  seq[0] = multiset[0];
  double total = 0.0;
  do {
    for (std::size_t i = 0; i + 1 < n; ++i) seq[i + 1] = multiset[rest[i]];
    total += cyclic_product(v, seq);
  } while (std::next_permutation(rest.begin(), rest.end()));
  return total;
}

MeasureQueryResult loop_laplace(const Generator& g, const VectorXd& chi, std::complex<double> z) {
  require_transient(g);
  const MatrixXd k = symmetrized_kernel(potential(g).V, chi);
  MeasureQueryResult out;
  out.formula = "loop-laplace: -ln det(I - z M_sqrt(chi) V M_sqrt(chi))";
  if (k.rows() == 0 || k.isZero(0.0)) {
    out.spectral_radius = 0.0;
    out.value = 0.0;
    return out;
  }
  Eigen::EigenSolver<MatrixXd> es(k, false);
  if (es.info() != Eigen::Success) throw Error(Errc::SingularSystem, "eigenvalue computation failed");
  const VectorXcd lambda = es.eigenvalues();
  out.spectral_radius = lambda.cwiseAbs().maxCoeff();
  if (out.spectral_radius > 0.0 && !(z.real() < 1.0 / out.spectral_radius))
    throw Error(Errc::OutOfDomain, "Re z = " + std::to_string(z.real()) + " but 1/rho = " +
                                       std::to_string(1.0 / out.spectral_radius));
  // each factor 1 - t z lambda traces a segment from 1; its principal log is the continuation from t = 0
  std::complex<double> acc = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) {
    const std::complex<double> w = 1.0 - z * lambda(i);
    if (std::abs(w) == 0.0) throw Error(Errc::OutOfDomain, "det(I - zK) vanishes");
    acc -= std::log(w);
  }
  out.value = acc;
  return out;
}

std::pair<double, double> trivial_split(const Generator& g, const VectorXd& chi) {
  require_transient(g);
  const MatrixXd k = symmetrized_kernel(potential(g).V, chi);
  const VectorXd q = g.holding_rates();
  double trivial = 0.0;
  for (Index x = 0; x < g.size(); ++x) trivial += std::log1p(chi(x) / q(x));
  const double lndet = std::log(determinant(MatrixXd(MatrixXd::Identity(k.rows(), k.cols()) + k)));
  return {trivial, lndet - trivial};
}

double visit_mass(const Generator& g, const StateSet& subset) {
  require_transient(g);
  const StateSet f = make_subset(subset, g.size());
  if (f.empty()) return 0.0;
  const MatrixXd v = potential(g).V;
  double s = std::log(determinant(principal(v, f)));
  for (Index x : f) s += std::log(-g.L()(x, x));
  return std::max(0.0, s);
}

double visit_all_mass(const Generator& g, const std::vector<StateSet>& sets) {
  require_transient(g);
  const std::size_t n = sets.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "no sets given");
  if (n > 20) throw Error(Errc::MatrixTooLarge, "more than 20 sets");
  std::vector<StateSet> fs;
  for (const auto& s : sets) fs.push_back(make_subset(s, g.size()));
  const MatrixXd v = potential(g).V;
  double total = 0.0;
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    StateSet u;
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ul << i)) {
        u.insert(u.end(), fs[i].begin(), fs[i].end());
        ++bits;
      }
    u = make_subset(u, g.size());
    const double sign = bits % 2 ? -1.0 : 1.0;
    total -= sign * std::log(determinant(principal(v, u)));
  }
  for (Index x = 0; x < g.size(); ++x) {
    bool everywhere = true;
    for (const auto& f : fs) everywhere = everywhere && contains(f, x);
    if (everywhere) total += std::log(-g.L()(x, x));
  }
  return total;
}

std::pair<double, double> visited_points_moments(const Generator& g) {
  require_transient(g);
  const MatrixXd v = potential(g).V;
  double first = 0.0;
  for (Index x = 0; x < g.size(); ++x) first += std::log(-g.L()(x, x) * v(x, x));
  double second = first;
  for (Index x = 0; x < g.size(); ++x)
    for (Index y = 0; y < g.size(); ++y) {
      if (x == y) continue;
      const double dd = v(x, x) * v(y, y);
      second += std::log(dd / (dd - v(x, y) * v(y, x)));
    }
  return {first, second};
}

double truncated_loop_mass(const Generator& g, int kmax) {
  MatrixXd power = g.Q();
  double total = 0.0;
  for (int k = 2; k <= kmax; ++k) {
    power = power * g.Q();
    total += power.trace() / k;
  }
  return total;
}

namespace {

constexpr int kLaguerreCache = 64;

std::vector<std::vector<double>> build_laguerre(int kmax) {
  // (1+t)^2 f' = u f for f = e^{ut/(1+t)}: a_{k+1} = ((u - 2k) a_k - (k-1) a_{k-1}) / (k+1)
  std::vector<std::vector<double>> a(std::size_t(kmax) + 1);
  a[0] = {1.0};
  if (kmax >= 1) a[1] = {0.0, 1.0};
  for (int k = 1; k < kmax; ++k) {
    std::vector<double> next(std::size_t(k) + 2, 0.0);
    for (std::size_t m = 0; m < a[k].size(); ++m) {
      next[m + 1] += a[k][m];
      next[m] -= 2.0 * k * a[k][m];
    }
    for (std::size_t m = 0; m < a[k - 1].size(); ++m) next[m] -= (k - 1) * a[k - 1][m];
    for (double& c : next) c /= double(k + 1);
    a[k + 1] = std::move(next);
  }
  return a;
}

}  // namespace

std::vector<double> laguerre_coefficients(int k) {
  if (k < 1) throw Error(Errc::NonPositiveIndex, "k = " + std::to_string(k));
  static const std::vector<std::vector<double>> cache = build_laguerre(kLaguerreCache);
  if (k <= kLaguerreCache) return cache[k];
  return build_laguerre(k)[k];
}

double laguerre(int k, double u) {
  if (k < 1) throw Error(Errc::NonPositiveIndex, "k = " + std::to_string(k));
  double prev = 1.0, cur = u;
  for (int i = 1; i < k; ++i) {
    const double next = ((u - 2.0 * i) * cur - (i - 1) * prev) / (i + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double laguerre_covariance(const Generator& g, Index x, Index y, int j, int k) {
  if (j < 1 || k < 1) throw Error(Errc::NonPositiveIndex, "indices must be positive");
  require_transient(g);
  const Index pts[] = {x, y};
  check_states(g, pts);
  if (j != k) return 0.0;
  const MatrixXd v = potential(g).V;
  return std::pow(v(x, y) * v(y, x), k) / k;
}

}  // namespace loopsoup
