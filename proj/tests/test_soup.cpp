#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "loopsoup/harness.hpp"
#include "loopsoup/measure.hpp"
#include "loopsoup/soup.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

Loop make_loop(std::vector<Index> s, std::vector<double> h) { return Loop(PointedLoop::make(std::move(s), std::move(h))); }

MatrixXd killed_by(const Generator& g, const VectorXd& chi) { return g.L() - MatrixXd(chi.asDiagonal()); }

}  // namespace

TEST_CASE("loop lengths on the bipartite two-state chain") {
  const LoopSampler s(two_state_chain());
  CHECK(s.total_mass() == doctest::Approx(std::log(4.0 / 3)));
  Rng rng = stream(51, {});
  const int n = 40000;
  int twos = 0;
  for (int i = 0; i < n; ++i) {
    const int k = s.sample_length(rng);
    CHECK(k % 2 == 0);
    twos += k == 2;
  }
  const double p = 0.25 / std::log(4.0 / 3);
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(twos / double(n) - p) < 3 * se);
}

TEST_CASE("sampled cycle frequencies follow discrete loop masses") {
  const Generator g = three_state_chain();
  const LoopSampler s(g);
  Rng rng = stream(52, {});
  const int n = 60000;
  std::map<std::vector<Index>, int> counts;
  for (int i = 0; i < n; ++i) {
    const Loop l = s.sample(rng);
    CHECK(l.jumps() >= 2);
    if (l.jumps() <= 3) ++counts[l.states()];
  }
  // one goodness-of-fit test over the short cycles plus a pooled remainder
  std::vector<double> obs, exp;
  double rest = 1.0;
  int counted = 0;
  for (const std::vector<Index>& c : {std::vector<Index>{0, 1}, {0, 2}, {1, 2}, {0, 1, 2}, {0, 2, 1}}) {
    const double p = discrete_loop_mass(g, c) / s.total_mass();
    obs.push_back(counts[c]);
    exp.push_back(p * n);
    rest -= p;
    counted += counts[c];
  }
  obs.push_back(n - counted);
  exp.push_back(rest * n);
  CHECK(stats::chi2_goodness_of_fit(obs, exp).p_value > 0.01);
}

TEST_CASE("sampler options") {
  CHECK_THROWS_AS(LoopSampler(Generator::validate((MatrixXd(2, 2) << -1, 1, 1, -1).finished())), Error);
  SamplerOptions o;
  o.k_max = 3;
  CHECK_THROWS_AS(LoopSampler(three_state_chain(), o), Error);
  const LoopSampler s(three_state_chain());
  const double rho = three_state_chain().jump_radius();
  const int k = s.k_max();
  CHECK(3 * std::pow(rho, k + 1) / ((k + 1) * (1 - rho)) < 1e-12 * s.total_mass());
}

TEST_CASE("soups are reproducible and zero at alpha = 0") {
  const LoopSampler s(three_state_chain());
  const LoopSoup a = sample_soup(s, 1.5, 99, 4), b = sample_soup(s, 1.5, 99, 4);
  CHECK(a.loops == b.loops);
  CHECK(a.trivial_occupation == b.trivial_occupation);
  const LoopSoup c = sample_soup(s, 1.5, 99, 5);
  CHECK(c.trivial_occupation != a.trivial_occupation);
  const LoopSoup z = sample_soup(s, 0.0, 99, 4);
  CHECK(z.loops.empty());
  CHECK(occupation_field(z).raw.isZero(0.0));
  for (const Loop& l : a.loops) CHECK_FALSE(l.trivial());
}

TEST_CASE("occupation field is additive and centered by alpha V") {
  LoopSoup s1, s2, both;
  for (LoopSoup* s : {&s1, &s2, &both}) {
    s->alpha = 2.0;
    s->states = 3;
    s->green_diagonal = VectorXd::Constant(3, 0.5);
    s->trivial_occupation = VectorXd::Zero(3);
  }
  s1.loops = {make_loop({0, 1}, {1.0, 2.0})};
  s2.loops = {make_loop({0, 2, 1}, {0.5, 0.25, 4.0})};
  s1.trivial_occupation(2) = 3.0;
  both.loops = {s1.loops[0], s2.loops[0]};
  both.trivial_occupation(2) = 3.0;
  const OccupationField f1 = occupation_field(s1), f2 = occupation_field(s2), fb = occupation_field(both);
  CHECK((fb.raw - f1.raw - f2.raw).norm() < 1e-15);
  CHECK(fb.raw(0) == doctest::Approx(1.5));
  CHECK(fb.raw(2) == doctest::Approx(3.25));
  CHECK((fb.centered - (fb.raw - VectorXd::Constant(3, 1.0))).norm() == 0.0);
}

TEST_CASE("non-trivial loop count is Poisson with the loop mass") {
  const LoopSampler s(two_state_chain());
  const double alpha = 3.0;
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 20000; ++r) counts.push_back(double(sample_soup(s, alpha, 7, r).loops.size()));
  const auto m = stats::mean_se(counts);
  CHECK(std::abs(stats::z_score(m.mean, alpha * std::log(4.0 / 3), m.stderr_)) < 3);
  CHECK(stats::poisson_dispersion(counts).p_value > 0.01);
}

TEST_CASE("marginal is Gamma(alpha, V) and alpha = 1 is exponential") {
  const Generator g = three_state_chain();
  const LoopSampler s(g);
  const double v = potential(g).V(1, 1);
  for (double alpha : {0.5, 1.0}) {
    std::vector<double> xs;
    for (std::uint64_t r = 0; r < 5000; ++r) xs.push_back(occupation_field(sample_soup(s, alpha, 8, r)).raw(1));
    const auto ks = stats::ks_one_sample(xs, [&](double x) { return stats::gamma_cdf(x, alpha, v); });
    CHECK(ks.p_value > 0.01);
    const auto m = stats::mean_se(xs);
    CHECK(std::abs(stats::z_score(m.mean, alpha * v, m.stderr_)) < 3);
    if (alpha == 1.0) {
      const auto ke = stats::ks_one_sample(xs, [&](double x) { return 1.0 - std::exp(-x / v); });
      CHECK(ke.p_value > 0.01);
    }
  }
}

TEST_CASE("ensemble moments") {
  const Generator g = two_state_chain();
  CHECK(ensemble_moment(g, 1.7, {0}) == doctest::Approx(1.7 * 2.0 / 3));
  CHECK(ensemble_moment(g, 1.7, {0}, true) == 0.0);
  const double al = 1.5;
  CHECK(ensemble_moment(g, al, {0, 1}) == doctest::Approx(4.0 / 9 * al * al + al / 9));
  CHECK(ensemble_moment(g, al, {0, 1}, true) == doctest::Approx(al / 9));
  CHECK_THROWS_AS(ensemble_moment(g, al, std::vector<Index>(11, 0)), Error);
}

TEST_CASE("ensemble moments against sampled soups") {
  const Generator g = three_state_chain();
  const LoopSampler s(g);
  const double al = 1.5;
  const std::vector<std::vector<Index>> tuples{{0}, {0, 1}, {1, 2, 2}, {0, 2}};
  std::vector<std::vector<double>> vals(tuples.size());
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const VectorXd f = occupation_field(sample_soup(s, al, 9, r)).raw;
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      double p = 1.0;
      for (Index x : tuples[t]) p *= f(x);
      vals[t].push_back(p);
    }
  }
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto m = stats::mean_se(vals[t]);
    CHECK(std::abs(stats::z_score(m.mean, ensemble_moment(g, al, tuples[t]), m.stderr_)) < 3);
  }
}

TEST_CASE("ensemble laplace") {
  const Generator g = three_state_chain();
  VectorXd chi(3);
  chi << 0.4, 1.1, 0.0;
  CHECK(std::abs(ensemble_laplace(g, 2.0, chi, 0.0) - 1.0) < 1e-15);
  const double two_forms = ensemble_laplace(g, 1.3, chi, -1.0).real();
  CHECK(two_forms == doctest::Approx(ensemble_laplace_subsets(g, 1.3, chi)).epsilon(1e-12));
  // det form written out directly
  const MatrixXd v = potential(g).V;
  const double det = (MatrixXd::Identity(3, 3) + MatrixXd(chi.asDiagonal()) * v).determinant();
  CHECK(two_forms == doctest::Approx(std::pow(det, -1.3)).epsilon(1e-12));

  Rng rng = stream(53, {});
  for (Index n = 2; n <= 6; ++n) {
    const Generator h = random_transient_generator(n, rng);
    VectorXd c(n);
    for (Index i = 0; i < n; ++i) c(i) = 3.0 * uniform01(rng);
    CHECK(ensemble_laplace(h, 0.8, c, -1.0).real() == doctest::Approx(ensemble_laplace_subsets(h, 0.8, c)).epsilon(1e-12));
  }
}

TEST_CASE("avoid probability") {
  const Generator g = two_state_chain();
  CHECK(avoid_probability(g, 1.0, {0, 1}) == doctest::Approx(0.75));
  CHECK(avoid_probability(g, 1e-12, {0, 1}) == doctest::Approx(1.0));

  const Generator g3 = three_state_chain();
  const LoopSampler s(g3);
  const int n = 20000;
  int avoid = 0;
  for (std::uint64_t r = 0; r < std::uint64_t(n); ++r) {
    const LoopSoup soup = sample_soup(s, 1.0, 10, r);
    bool hit = false;
    for (const Loop& l : soup.loops)
      for (Index x : l.states()) hit = hit || x == 2;
    avoid += !hit;
  }
  const double p = avoid_probability(g3, 1.0, {2});
  CHECK(std::abs(avoid / double(n) - p) < 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("Feynman-Kac reweighting of the loop measure") {
  // mu_L(e^{-<l,chi>}; non-trivial) equals the non-trivial mass of L - M_chi
  const Generator g = three_state_chain();
  VectorXd chi(3);
  chi << 0.3, 0.0, 1.2;
  const LoopSampler s(g);
  Rng rng = stream(54, {});
  std::vector<double> w;
  for (int i = 0; i < 40000; ++i) {
    const Loop l = s.sample(rng);
    w.push_back(std::exp(-occupation_vector(l, 3).dot(chi)));
  }
  const auto m = stats::mean_se(w);
  const double exact = visit_mass(Generator::validate(killed_by(g, chi)), full_set(3));
  CHECK(std::abs(stats::z_score(m.mean * s.total_mass(), exact, m.stderr_ * s.total_mass())) < 3);
}

TEST_CASE("explicit trivial loops") {
  CHECK(exponential_integral_e1(1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-14));
  const double q = 2.0, delta = 0.01;
  Rng rng = stream(55, {});
  std::vector<double> ts;
  for (int i = 0; i < 20000; ++i) ts.push_back(sample_trivial_duration(q, delta, rng));
  for (double t : ts) CHECK(t > delta);
  const double norm = exponential_integral_e1(q * delta);
  const auto ks = stats::ks_one_sample(ts, [&](double t) { return 1.0 - exponential_integral_e1(q * t) / norm; });
  CHECK(ks.p_value > 0.01);

  SamplerOptions o;
  o.trivial = TrivialPolicy::Explicit;
  o.trivial_cutoff = 1e-6;
  const LoopSoup soup = sample_soup(two_state_chain(), 1.0, o, 3);
  VectorXd sum = VectorXd::Zero(2);
  for (const Loop& l : soup.trivial_loops) {
    CHECK(l.trivial());
    sum(l.states()[0]) += l.duration();
  }
  CHECK((sum - soup.trivial_occupation).norm() < 1e-12);
}

TEST_CASE("largest normalized trivial loop follows the first PD(0, alpha) component") {
  // for alpha = 1 the largest share P1 has P[P1 <= x] = rho(1/x), Dickman; for x >= 1/2 this is 1 + ln x
  const double alpha = 1.0;
  SamplerOptions o;
  o.trivial = TrivialPolicy::Explicit;
  o.trivial_cutoff = 1e-9;
  const LoopSampler s(two_state_chain(), o);
  std::vector<double> largest;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    const LoopSoup soup = sample_soup(s, alpha, 12, r);
    double tot = 0.0, mx = 0.0;
    for (const Loop& l : soup.trivial_loops)
      if (l.states()[0] == 0) {
        tot += l.duration();
        mx = std::max(mx, l.duration());
      }
    if (tot > 0.0) largest.push_back(mx / tot);
  }
  // compare only the upper part of the law, where the closed form is exact
  const double above_half = double(std::count_if(largest.begin(), largest.end(), [](double x) { return x > 0.5; }));
  const double p = -std::log(0.5);
  const double n = double(largest.size());
  CHECK(std::abs(above_half / n - p) < 3 * std::sqrt(p * (1 - p) / n));
  std::vector<double> upper;
  for (double x : largest)
    if (x > 0.5) upper.push_back(x);
  const auto ks = stats::ks_one_sample(upper, [&](double x) { return (1.0 + std::log(x) - (1.0 - p)) / p; });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("conditional laplace right-hand side") {
  const Generator g = three_state_chain();
  const StateSet f{0, 1};
  const LoopSampler s(g);
  const LoopSoup soup = sample_soup(s, 1.0, 13, 0);
  const TracedSoup t = trace_soup(soup, f);
  CHECK(conditional_laplace_rhs(g, 1.0, f, VectorXd::Zero(3), t) == doctest::Approx(1.0));
  VectorXd chi(3);
  chi << 0.5, 0.2, 0.0;
  CHECK(conditional_laplace_rhs(g, 1.0, f, chi, t) ==
        doctest::Approx(std::exp(-chi(0) * t.occupation(0) - chi(1) * t.occupation(1))));

  chi << 0.5, 0.0, 0.9;
  std::vector<double> vals;
  for (std::uint64_t r = 0; r < 20000; ++r)
    vals.push_back(conditional_laplace_rhs(g, 1.0, f, chi, trace_soup(sample_soup(s, 1.0, 14, r), f)));
  const auto m = stats::mean_se(vals);
  CHECK(std::abs(stats::z_score(m.mean, ensemble_laplace(g, 1.0, chi, -1.0).real(), m.stderr_)) < 3);
}
