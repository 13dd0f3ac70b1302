#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "loopsoup/chain.hpp"
#include "loopsoup/loop.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

enum class TrivialPolicy { AggregatedGamma, Explicit };

struct SamplerOptions {
  int k_max = 0;  // 0 selects the length cap from tail_tolerance
  double tail_tolerance = 1e-12;
  TrivialPolicy trivial = TrivialPolicy::AggregatedGamma;
  double trivial_cutoff = 1e-6;
};

// Draws from the loop measure restricted to non-trivial loops, normalized.
class LoopSampler {
 public:
  explicit LoopSampler(const Generator& g, SamplerOptions opts = {});

  Loop sample(Rng& rng) const;
  int sample_length(Rng& rng) const;

  const Generator& generator() const { return g_; }
  const SamplerOptions& options() const { return opts_; }
  int k_max() const { return k_max_; }
  double total_mass() const { return total_; }
  double truncated_mass() const { return truncated_; }
  const VectorXd& green_diagonal() const { return v_diag_; }

 private:
  Generator g_;
  SamplerOptions opts_;
  int k_max_ = 2;
  double total_ = 0.0, truncated_ = 0.0;
  std::vector<MatrixXd> powers_;       // Q^0 .. Q^kmax
  std::vector<double> length_cdf_;     // over k = 2 .. kmax
  VectorXd v_diag_;
};

struct LoopSoup {
  double alpha = 0.0;
  Index states = 0;
  std::vector<Loop> loops;  // non-trivial, canonical
  TrivialPolicy policy = TrivialPolicy::AggregatedGamma;
  VectorXd trivial_occupation;
  std::vector<Loop> trivial_loops;  // explicit policy only
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  VectorXd green_diagonal;
};

LoopSoup sample_soup(const LoopSampler& sampler, double alpha, std::uint64_t seed, std::uint64_t replica = 0);
LoopSoup sample_soup(const Generator& g, double alpha, const SamplerOptions& opts, std::uint64_t seed);

/// Duration drawn from density proportional to e^{-qt}/t on (delta, inf).
double sample_trivial_duration(double q, double delta, Rng& rng);
/// E_1(x) = integral_x^inf e^{-u}/u du.
double exponential_integral_e1(double x);

struct OccupationField {
  VectorXd raw;
  VectorXd centered;
};

OccupationField occupation_field(const LoopSoup& soup);

double ensemble_moment(const Generator& g, double alpha, const std::vector<Index>& tuple, bool centered = false);

/// det(I - z M_sqrt(chi) V M_sqrt(chi))^{-alpha}.
std::complex<double> ensemble_laplace(const Generator& g, double alpha, const VectorXd& chi, std::complex<double> z);
/// (1 + sum_A prod chi det V_A)^{-alpha}.
double ensemble_laplace_subsets(const Generator& g, double alpha, const VectorXd& chi);

double avoid_probability(const Generator& g, double alpha, const StateSet& f);

// Jump counts and occupation of a soup traced on F, indexed by the full state space.
struct TracedSoup {
  StateSet subset;
  MatrixXd jumps;
  VectorXd occupation;
};

TracedSoup trace_soup(const LoopSoup& soup, const StateSet& f);

double conditional_laplace_rhs(const Generator& g, double alpha, const StateSet& f, const VectorXd& chi,
                               const TracedSoup& traced);

}  // namespace loopsoup
