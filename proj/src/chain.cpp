#include "loopsoup/chain.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <set>

namespace loopsoup {

StateSet make_subset(StateSet states, Index n) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  for (Index x : states)
    if (x < 0 || x >= n) throw Error(Errc::InvalidSubset, "state index " + std::to_string(x) + " out of range");
  return states;
}

StateSet complement_of(const StateSet& a, Index n) {
  StateSet out;
  for (Index x = 0; x < n; ++x)
    if (!contains(a, x)) out.push_back(x);
  return out;
}

StateSet full_set(Index n) {
  StateSet out(n);
  for (Index x = 0; x < n; ++x) out[x] = x;
  return out;
}

bool contains(const StateSet& a, Index x) { return std::binary_search(a.begin(), a.end(), x); }

namespace {

std::string name_of(const std::vector<std::string>& labels, Index x) {
  return "state " + (x < Index(labels.size()) ? labels[x] : std::to_string(x));
}

Index position_in(const StateSet& a, Index x) {
  auto it = std::lower_bound(a.begin(), a.end(), x);
  if (it == a.end() || *it != x) throw Error(Errc::InvalidSubset, "state " + std::to_string(x) + " not in subset");
  return Index(it - a.begin());
}

// Solves (I - Q_{cc}) X = Q_{c,a} and returns (H over S x A, R over A x A).
std::pair<MatrixXd, MatrixXd> hit_and_return(const MatrixXd& q, const StateSet& a, const StateSet& c) {
  const Index n = q.rows();
  const Index na = Index(a.size());
  MatrixXd h = MatrixXd::Zero(n, na);
  for (Index i = 0; i < na; ++i) h(a[i], i) = 1.0;
  MatrixXd r = q(a, a);
  if (!c.empty()) {
    const MatrixXd system = MatrixXd::Identity(Index(c.size()), Index(c.size())) - q(c, c);
    const MatrixXd x = guarded_lu(system).solve(MatrixXd(q(c, a)));
    for (std::size_t i = 0; i < c.size(); ++i) h.row(c[i]) = x.row(Index(i));
    r += q(a, c) * x;
  }
  return {h, r};
}

}  // namespace

MatrixXd embedded_chain(const MatrixXd& rates) {
  const Index n = rates.rows();
  MatrixXd q = MatrixXd::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    const double hold = -rates(x, x);
    if (hold <= 0.0) {
      q(x, x) = 1.0;
      continue;
    }
    for (Index y = 0; y < n; ++y)
      if (y != x) q(x, y) = rates(x, y) / hold;
  }
  return q;
}

Generator Generator::validate(const MatrixXd& raw, std::vector<std::string> labels, const Tolerances& tol) {
  if (raw.rows() != raw.cols())
    throw Error(Errc::NonSquare, std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()) + " matrix");
  const Index n = raw.rows();
  if (labels.empty())
    for (Index x = 0; x < n; ++x) labels.push_back(std::to_string(x));
  if (Index(labels.size()) != n)
    throw Error(Errc::LabelMismatch, std::to_string(labels.size()) + " labels for " + std::to_string(n) + " states");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw Error(Errc::LabelMismatch, "labels are not distinct");
  if (!raw.allFinite()) throw Error(Errc::NonFinite, "rate matrix has non-finite entries");

  Generator g;
  g.L_ = raw;
  g.killing_ = VectorXd::Zero(n);
  for (Index x = 0; x < n; ++x) {
    const double scale = std::max(1.0, raw.row(x).cwiseAbs().maxCoeff());
    if (raw(x, x) > tol.structural * scale) throw Error(Errc::PositiveDiagonal, name_of(labels, x));
    for (Index y = 0; y < n; ++y) {
      if (y == x) continue;
      if (raw(x, y) < -tol.structural * scale) throw Error(Errc::NegativeOffDiagonal, name_of(labels, x));
      if (raw(x, y) < 0.0) g.L_(x, y) = 0.0;
    }
    if (g.L_(x, x) > 0.0) g.L_(x, x) = 0.0;
    const double row = g.L_.row(x).sum();
    if (row > tol.structural * scale) throw Error(Errc::RowSumPositive, name_of(labels, x));
    g.killing_(x) = std::max(0.0, -row);
  }
  g.Q_ = embedded_chain(g.L_);
  g.rho_Q_ = spectral_radius(g.Q_);
  g.transient_ = g.rho_Q_ < 1.0 - tol.transient_gap;
  g.labels_ = std::move(labels);
  return g;
}

Index Generator::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(Errc::InvalidArgument, "unknown state label " + label);
  return Index(it - labels_.begin());
}

std::vector<std::string> select_labels(const Generator& g, const StateSet& a) {
  std::vector<std::string> out;
  for (Index x : a) out.push_back(g.labels()[x]);
  return out;
}

Potential potential(const Generator& g, const VectorXd& chi) {
  const Index n = g.size();
  VectorXd c = chi.size() == 0 ? VectorXd::Zero(n) : chi;
  if (c.size() != n) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
  if (!c.allFinite() || (c.array() < 0.0).any()) throw Error(Errc::InvalidArgument, "chi must be finite and non-negative");
  MatrixXd m = -g.L();
  m.diagonal() += c;
  return Potential{guarded_inverse(m), c};
}

MatrixXd semigroup(const Generator& g, double t) {
  if (!(t >= 0.0)) throw Error(Errc::NegativeTime, "t = " + std::to_string(t));
  if (t == 0.0) return MatrixXd::Identity(g.size(), g.size());
  return (t * g.L()).exp();
}

HittingData hitting_return(const Generator& g, const StateSet& subset, const VectorXd& chi) {
  const StateSet a = make_subset(subset, g.size());
  if (a.empty()) throw Error(Errc::EmptySubset, "hitting set is empty");
  const StateSet c = complement_of(a, g.size());
  HittingData out;
  out.subset = a;
  std::tie(out.H, out.R) = hit_and_return(g.Q(), a, c);
  out.defect = VectorXd::Ones(g.size()) - out.H.rowwise().sum();
  if (chi.size() == 0 || chi.isZero(0.0)) {
    out.RChi = out.R;
  } else {
    if (chi.size() != g.size()) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
    MatrixXd lc = g.L();
    lc.diagonal() -= chi;
    out.RChi = hit_and_return(embedded_chain(lc), a, c).second;
  }
  return out;
}

Generator trace_generator(const Generator& g, const StateSet& subset, const Tolerances& tol) {
  const StateSet a = make_subset(subset, g.size());
  if (a.empty()) throw Error(Errc::EmptySubset, "trace set is empty");
  if (!g.transient()) throw Error(Errc::NotTransient, "trace requires a transient generator");
  const MatrixXd v = potential(g).V;
  const MatrixXd la = -guarded_inverse(principal(v, a));

  const HittingData hd = hitting_return(g, a);
  const Index na = Index(a.size());
  MatrixXd lr(na, na);
  for (Index i = 0; i < na; ++i) {
    const double lxx = g.L()(a[i], a[i]);
    for (Index j = 0; j < na; ++j) lr(i, j) = i == j ? lxx * (1.0 - hd.R(i, i)) : -lxx * hd.R(i, j);
  }
  const double gap = (la - lr).cwiseAbs().maxCoeff();
  if (gap > tol.cross * std::max(1.0, la.cwiseAbs().maxCoeff()))
    throw Error(Errc::DisagreementBeyondTolerance, "trace generator computations differ by " + std::to_string(gap));
  return Generator::validate(la, select_labels(g, a), tol);
}

Generator restrict_generator(const Generator& g, const StateSet& subset) {
  const StateSet a = make_subset(subset, g.size());
  if (a.empty()) throw Error(Errc::EmptySubset, "restriction set is empty");
  return Generator::validate(principal(g.L(), a), select_labels(g, a));
}

Generator time_change_generator(const Generator& g, const VectorXd& lambda) {
  if (lambda.size() != g.size()) throw Error(Errc::InvalidArgument, "lambda has wrong dimension");
  if (!lambda.allFinite() || (lambda.array() <= 0.0).any())
    throw Error(Errc::NonPositiveLambda, "lambda must be positive and finite");
  return Generator::validate(lambda.cwiseInverse().asDiagonal() * g.L(), g.labels());
}

bool is_excessive(const Generator& g, const VectorXd& h) {
  const VectorXd lh = -(g.L() * h);
  const double scale = std::max(1.0, g.L().cwiseAbs().maxCoeff() * h.cwiseAbs().maxCoeff());
  return (lh.array() >= -1e-12 * scale).all();
}

Generator doob_transform(const Generator& g, const VectorXd& h) {
  if (h.size() != g.size()) throw Error(Errc::InvalidArgument, "h has wrong dimension");
  if (!h.allFinite() || (h.array() <= 0.0).any()) throw Error(Errc::NonPositiveH, "h must be positive and finite");
  return Generator::validate(h.cwiseInverse().asDiagonal() * g.L() * h.asDiagonal(), g.labels());
}

double excursion_laplace(const Generator& g, const StateSet& subset, const VectorXd& chi, Index x, Index y) {
  const StateSet f = make_subset(subset, g.size());
  if (f.empty()) throw Error(Errc::EmptySubset, "excursion set is empty");
  if (chi.size() != g.size()) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
  for (Index s : f)
    if (chi(s) != 0.0) throw Error(Errc::ChiOnF, "chi is nonzero at " + g.labels()[s]);
  const Index i = position_in(f, x);
  const Index j = position_in(f, y);
  const HittingData hd = hitting_return(g, f, chi);
  if (!(hd.R(i, j) > 0.0)) throw Error(Errc::ZeroDenominator, "no excursion from " + g.labels()[x] + " to " + g.labels()[y]);
  return hd.RChi(i, j) / hd.R(i, j);
}

}  // namespace loopsoup
