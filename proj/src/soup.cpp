#include "loopsoup/soup.hpp"

#include <algorithm>
#include <cmath>

#include "loopsoup/measure.hpp"
#include "loopsoup/permanent.hpp"

namespace loopsoup {

namespace {

constexpr int kMaxLength = 200000;

std::size_t draw_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(std::size_t(it - cdf.begin()), cdf.size() - 1);
}

// Categorical draw over states with unnormalized weights w.
Index draw_weights(const VectorXd& w, Rng& rng) {
  const double total = w.sum();
  double u = uniform01(rng) * total;
  Index last = -1;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) <= 0.0) continue;
    last = i;
    if (u < w(i)) return i;
    u -= w(i);
  }
  if (last < 0) throw Error(Errc::InvalidArgument, "no positive weight");
  return last;
}

}  // namespace

LoopSampler::LoopSampler(const Generator& g, SamplerOptions opts) : g_(g), opts_(opts) {
  if (!g.transient()) throw Error(Errc::NotTransient, "rho(Q) = " + std::to_string(g.jump_radius()));
  total_ = visit_mass(g, full_set(g.size()));
  v_diag_ = potential(g).V.diagonal();
  const double rho = g.jump_radius();
  const double n = double(g.size());
  auto tail = [&](int k) { return n * std::pow(rho, k + 1) / ((k + 1) * (1.0 - rho)); };
  const double budget = opts.tail_tolerance * std::max(total_, 1e-300);
  if (opts.k_max > 0) {
    k_max_ = std::max(2, opts.k_max);
    if (total_ > 0.0 && tail(k_max_) > budget)
      throw Error(Errc::TruncationInfeasible, "kMax = " + std::to_string(k_max_) + " leaves tail " + std::to_string(tail(k_max_)));
  } else if (total_ > 0.0) {
    k_max_ = 2;
    while (tail(k_max_) >= budget) {
      if (++k_max_ > kMaxLength) throw Error(Errc::TruncationInfeasible, "loop-length cap exceeds " + std::to_string(kMaxLength));
    }
  }
  powers_.reserve(std::size_t(k_max_) + 1);
  powers_.push_back(MatrixXd::Identity(g.size(), g.size()));
  for (int k = 1; k <= k_max_; ++k) powers_.push_back(powers_.back() * g.Q());
  double acc = 0.0;
  for (int k = 2; k <= k_max_; ++k) {
    acc += powers_[k].trace() / k;
    length_cdf_.push_back(acc);
  }
  truncated_ = acc;
}

int LoopSampler::sample_length(Rng& rng) const {
  if (!(truncated_ > 0.0)) throw Error(Errc::InvalidArgument, "generator carries no non-trivial loops");
  return int(draw_cdf(length_cdf_, rng)) + 2;
}

Loop LoopSampler::sample(Rng& rng) const {
  const int k = sample_length(rng);
  const MatrixXd& q = g_.Q();
  std::vector<Index> states(static_cast<std::size_t>(k));
  states[0] = draw_weights(powers_[k].diagonal(), rng);
  for (int i = 1; i < k; ++i) {
    const Index prev = states[i - 1];
    const VectorXd w = q.row(prev).transpose().cwiseProduct(powers_[k - i].col(states[0]));
    states[i] = draw_weights(w, rng);
  }
  std::vector<double> holds(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    holds[i] = std::exponential_distribution<double>(-g_.L()(states[i], states[i]))(rng);
  return Loop(PointedLoop{std::move(states), std::move(holds)});
}

double exponential_integral_e1(double x) {
  if (!(x > 0.0)) throw Error(Errc::InvalidArgument, "E1 needs a positive argument");
  return -std::expint(-x);
}

double sample_trivial_duration(double q, double delta, Rng& rng) {
  const double a = q * delta;
  std::exponential_distribution<double> exp1(1.0);
  auto tail_draw = [&](double lo) {
    for (;;) {
      const double u = lo + exp1(rng);
      if (uniform01(rng) * u < lo) return u;
    }
  };
  if (a >= 1.0) return tail_draw(a) / q;
  const double inner = exponential_integral_e1(a) - exponential_integral_e1(1.0);
  const double outer = exponential_integral_e1(1.0);
  if (uniform01(rng) * (inner + outer) >= inner) return tail_draw(1.0) / q;
  for (;;) {
    const double u = a * std::pow(1.0 / a, uniform01(rng));
    if (uniform01(rng) < std::exp(a - u)) return u / q;
  }
}

LoopSoup sample_soup(const LoopSampler& sampler, double alpha, std::uint64_t seed, std::uint64_t replica) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(Errc::InvalidArgument, "alpha must be non-negative");
  const Generator& g = sampler.generator();
  const Index n = g.size();
  LoopSoup soup;
  soup.alpha = alpha;
  soup.states = n;
  soup.policy = sampler.options().trivial;
  soup.seed = seed;
  soup.replica = replica;
  soup.green_diagonal = sampler.green_diagonal();
  soup.trivial_occupation = VectorXd::Zero(n);
  if (alpha == 0.0) return soup;

  Rng count_rng = stream(seed, {replica, 0});
  const double mean = alpha * sampler.total_mass();
  const long count = mean > 0.0 ? std::poisson_distribution<long>(mean)(count_rng) : 0;
  soup.loops.reserve(std::size_t(count));
  for (long i = 0; i < count; ++i) {
    Rng rng = stream(seed, {replica, 1, std::uint64_t(i)});
    soup.loops.push_back(sampler.sample(rng));
  }

  const VectorXd q = g.holding_rates();
  for (Index x = 0; x < n; ++x) {
    Rng rng = stream(seed, {replica, 2, std::uint64_t(x)});
    if (soup.policy == TrivialPolicy::AggregatedGamma) {
      soup.trivial_occupation(x) = std::gamma_distribution<double>(alpha, 1.0 / q(x))(rng);
    } else {
      const double delta = sampler.options().trivial_cutoff;
      if (!(delta > 0.0)) throw Error(Errc::InvalidArgument, "explicit trivial policy needs a positive cutoff");
      const double m = alpha * exponential_integral_e1(q(x) * delta);
      const long k = std::poisson_distribution<long>(m)(rng);
      for (long j = 0; j < k; ++j) {
        const double t = sample_trivial_duration(q(x), delta, rng);
        soup.trivial_loops.emplace_back(PointedLoop{{x}, {t}});
        soup.trivial_occupation(x) += t;
      }
    }
  }
  return soup;
}

LoopSoup sample_soup(const Generator& g, double alpha, const SamplerOptions& opts, std::uint64_t seed) {
  return sample_soup(LoopSampler(g, opts), alpha, seed, 0);
}

OccupationField occupation_field(const LoopSoup& soup) {
  OccupationField f;
  f.raw = soup.trivial_occupation.size() ? soup.trivial_occupation : VectorXd::Zero(soup.states);
  for (const Loop& l : soup.loops)
    for (std::size_t i = 0; i < l.jumps(); ++i) f.raw(l.states()[i]) += l.holds()[i];
  f.centered = f.raw - soup.alpha * soup.green_diagonal;
  return f;
}

double ensemble_moment(const Generator& g, double alpha, const std::vector<Index>& tuple, bool centered) {
  if (tuple.empty()) throw Error(Errc::EmptyTuple, "empty tuple");
  if (tuple.size() > 10) throw Error(Errc::TupleTooLarge, std::to_string(tuple.size()) + " points");
  require_transient(g);
  for (Index x : tuple)
    if (x < 0 || x >= g.size()) throw Error(Errc::InvalidArgument, "state index out of range");
  const MatrixXd v = potential(g).V;
  const std::vector<Index> idx(tuple.begin(), tuple.end());
  return alpha_permanent(MatrixXd(v(idx, idx)), alpha, centered);
}

std::complex<double> ensemble_laplace(const Generator& g, double alpha, const VectorXd& chi, std::complex<double> z) {
  const MeasureQueryResult r = loop_laplace(g, chi, z);
  const std::complex<double> value = std::exp(alpha * r.value);
  if (z == std::complex<double>(-1.0, 0.0)) {
    StateSet support;
    for (Index x = 0; x < chi.size(); ++x)
      if (chi(x) != 0.0) support.push_back(x);
    if (support.size() <= 20) {
      const double alt = ensemble_laplace_subsets(g, alpha, chi);
      if (std::abs(value - alt) > 1e-9 * std::max(1.0, std::abs(alt)))
        throw Error(Errc::DisagreementBeyondTolerance, "determinant and subset forms differ");
    }
  }
  return value;
}

double ensemble_laplace_subsets(const Generator& g, double alpha, const VectorXd& chi) {
  require_transient(g);
  if (chi.size() != g.size()) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
  return std::pow(subset_expansion(potential(g).V, chi), -alpha);
}

double avoid_probability(const Generator& g, double alpha, const StateSet& f) {
  return std::exp(-alpha * visit_mass(g, f));
}

TracedSoup trace_soup(const LoopSoup& soup, const StateSet& subset) {
  TracedSoup t;
  t.subset = make_subset(subset, soup.states);
  t.jumps = MatrixXd::Zero(soup.states, soup.states);
  t.occupation = VectorXd::Zero(soup.states);
  for (const Loop& l : soup.loops) {
    const auto traced = loop_trace(l, t.subset);
    if (!traced) continue;
    t.jumps += jump_counts(*traced, soup.states).pairs;
    t.occupation += occupation_vector(*traced, soup.states);
  }
  for (Index x : t.subset) t.occupation(x) += soup.trivial_occupation(x);
  return t;
}

double conditional_laplace_rhs(const Generator& g, double alpha, const StateSet& subset, const VectorXd& chi,
                               const TracedSoup& traced) {
  require_transient(g);
  const StateSet f = make_subset(subset, g.size());
  if (f.empty()) throw Error(Errc::EmptySubset, "conditioning set is empty");
  if (chi.size() != g.size()) throw Error(Errc::InvalidArgument, "chi has wrong dimension");
  const StateSet c = complement_of(f, g.size());

  double outside = 1.0;
  if (!c.empty()) {
    const Generator gc = restrict_generator(g, c);
    outside = ensemble_laplace(gc, alpha, VectorXd(chi(c)), -1.0).real();
  }

  VectorXd chi_out = chi;
  for (Index x : f) chi_out(x) = 0.0;
  const HittingData hd = hitting_return(g, f, chi_out);

  double log_rhs = std::log(outside);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Index x = f[i];
    log_rhs -= chi(x) * traced.occupation(x);
    log_rhs += g.L()(x, x) * traced.occupation(x) * (hd.R(Index(i), Index(i)) - hd.RChi(Index(i), Index(i)));
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (i == j) continue;
      const double nxy = traced.jumps(x, f[j]);
      if (nxy == 0.0) continue;
      const double r = hd.R(Index(i), Index(j));
      if (!(r > 0.0)) throw Error(Errc::ZeroDenominator, "no excursion between traced states");
      log_rhs += nxy * std::log(hd.RChi(Index(i), Index(j)) / r);
    }
  }
  return std::exp(log_rhs);
}

}  // namespace loopsoup
