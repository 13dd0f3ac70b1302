#include <doctest.h>

#include <cmath>
#include <map>

#include "loopsoup/harness.hpp"
#include "loopsoup/lerw.hpp"
#include "loopsoup/reconstruct.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

DiscretePath path_of(std::vector<Index> xs) {
  DiscretePath p;
  p.states = std::move(xs);
  return p;
}

VectorXd delta(Index n, Index x) {
  VectorXd v = VectorXd::Zero(n);
  v(x) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("killed paths") {
  const Generator g = two_state_chain();
  Rng rng = stream(81, {});
  const DiscretePath trivial = sample_killed_path(g, 0, {0}, rng);
  CHECK(trivial.states == std::vector<Index>{0});

  const int n = 20000;
  int to_b = 0;
  for (int i = 0; i < n; ++i) {
    const DiscretePath p = sample_killed_path(g, 0, {}, rng);
    REQUIRE(p.states.size() >= 2);
    to_b += p.states[1] == 1;
    CHECK(p.killed);
    CHECK(p.states.back() == kCemetery);
  }
  CHECK(std::abs(to_b / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));

  MatrixXd l(3, 3);
  l << -1, 1, 0, 1, -1, 0, 0, 0, -1;
  const Generator closed = Generator::validate(l);
  try {
    sample_killed_path(closed, 0, {}, rng);
    FAIL("expected Unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unreachable);
  }
  CHECK(sample_killed_path(closed, 0, {1}, rng).states.back() == 1);
}

TEST_CASE("mean number of jumps follows the fundamental matrix") {
  const Generator g = three_state_chain();
  const MatrixXd fundamental = (MatrixXd::Identity(3, 3) - g.Q()).inverse();
  Rng rng = stream(82, {});
  Rng holds = stream(83, {});
  std::vector<double> jumps;
  for (int i = 0; i < 20000; ++i) {
    const DiscretePath p = sample_killed_path(g, 1, {}, rng, &holds);
    CHECK(p.holds.size() + 1 == p.states.size());
    jumps.push_back(double(p.states.size() - 1));
  }
  const auto m = stats::mean_se(jumps);
  CHECK(std::abs(stats::z_score(m.mean, fundamental.row(1).sum(), m.stderr_)) < 3);
}

TEST_CASE("loop erasure examples") {
  const ErasureRecord sa = loop_erase(path_of({0, 1, 2}));
  CHECK(sa.lerw == std::vector<Index>{0, 1, 2});
  CHECK(sa.erased_loops().empty());
  CHECK(sa.erased_jumps() == 0);

  const ErasureRecord r1 = loop_erase(path_of({0, 1, 0, 2}));
  CHECK(r1.lerw == std::vector<Index>{0, 2});
  REQUIRE(r1.erased_loops().size() == 1);
  CHECK(r1.erased_loops()[0].base == 0);
  CHECK(r1.erased_loops()[0].cycle() == std::vector<Index>{0, 1});

  const ErasureRecord r2 = loop_erase(path_of({0, 1, 2, 1, 0, 3}));
  CHECK(r2.lerw == std::vector<Index>{0, 3});
  REQUIRE(r2.erased_loops().size() == 1);
  CHECK(r2.erased_loops()[0].cycle() == std::vector<Index>{0, 1, 2, 1});

  const ErasureRecord r3 = loop_erase(path_of({0, 1, 2, 1, 3, kCemetery}));
  CHECK(r3.lerw == std::vector<Index>{0, 1, 3, kCemetery});
  CHECK(r3.erased_loops()[0].base == 1);
}

TEST_CASE("jump conservation and self-avoidance on random paths") {
  const Generator g = three_state_chain();
  Rng rng = stream(84, {});
  for (int i = 0; i < 2000; ++i) {
    const DiscretePath p = sample_killed_path(g, Index(i % 3), {}, rng);
    const ErasureRecord r = loop_erase(p);
    CHECK(p.states.size() - 1 == (r.lerw.size() - 1) + r.erased_jumps());
    std::vector<Index> sorted = r.lerw;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    CHECK(r.lerw.front() == p.states.front());
    CHECK(r.lerw.back() == p.states.back());
  }
}

TEST_CASE("prefix probabilities on the two-state chain") {
  const Generator g = two_state_chain();
  const VectorXd nu = delta(2, 0);
  CHECK(lerw_prefix_probability(g, nu, {0, 1}) == doctest::Approx(1.0 / 3));
  CHECK(lerw_prefix_probability(g, nu, {0, kCemetery}) == doctest::Approx(2.0 / 3));
  CHECK(lerw_prefix_probability(g, nu, {0}) == doctest::Approx(1.0));
  CHECK(lerw_prefix_probability(g, nu, {0, 1, kCemetery}) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(lerw_prefix_probability(g, nu, {0, 1, 0}), Error);
}

TEST_CASE("prefix probabilities: total probability and three formulas") {
  Rng rng = stream(85, {});
  for (int rep = 0; rep < 5; ++rep) {
    const Generator g = random_transient_generator(3 + rep % 2, rng);
    const Index n = g.size();
    VectorXd nu = VectorXd::Zero(n);
    for (Index x = 0; x < n; ++x) nu(x) = 0.1 + uniform01(rng);
    nu /= nu.sum();
    for (Index x = 0; x < n; ++x) {
      double total = lerw_prefix_probability(g, nu, {x, kCemetery});
      for (Index y = 0; y < n; ++y)
        if (y != x) total += lerw_prefix_probability(g, nu, {x, y});
      CHECK(total == doctest::Approx(nu(x)).epsilon(1e-12));
      for (Index y = 0; y < n; ++y) {
        if (y == x) continue;
        for (Index z = 0; z < n; ++z) {
          if (z == x || z == y) continue;
          const std::vector<Index> pre{x, y, z};
          const double a = lerw_prefix_probability(g, nu, pre);
          CHECK(std::abs(a - lerw_prefix_probability_bordered(g, nu, pre)) < 1e-10);
          CHECK(std::abs(a - lerw_prefix_probability_jump_chain(g, nu, pre)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("loop-erased path law against simulation") {
  const Generator g = three_state_chain();
  Rng rng = stream(86, {});
  const int n = 30000;
  std::map<std::vector<Index>, double> counts;
  for (int i = 0; i < n; ++i) counts[loop_erase(sample_killed_path(g, 0, {}, rng)).lerw] += 1;
  std::vector<double> obs, exp;
  for (const auto& [path, c] : counts) {
    obs.push_back(c);
    exp.push_back(n * lerw_prefix_probability(g, delta(3, 0), path));
  }
  double total = 0.0;
  for (double e : exp) total += e;
  CHECK(total == doctest::Approx(n).epsilon(1e-9));
  CHECK(stats::chi2_goodness_of_fit(obs, exp).p_value > 0.01);
}

TEST_CASE("spanning trees") {
  CHECK(enumerate_spanning_trees(1).size() == 1);
  // Cayley: rooted spanning trees of K_{n+1} at a fixed root
  CHECK(enumerate_spanning_trees(3).size() == 16);
  CHECK(enumerate_spanning_trees(4).size() == 125);
  CHECK_THROWS_AS(enumerate_spanning_trees(8), Error);

  const Generator g = two_state_chain();
  for (const auto& t : enumerate_spanning_trees(2)) CHECK(tree_probability(g, t) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(tree_probability(g, SpanningTree{{1, 0}}), Error);
  CHECK_THROWS_AS(tree_probability(g, SpanningTree{{kCemetery}}), Error);
  CHECK(SpanningTree{{1, kCemetery}}.encode() == "1 D");

  MatrixXd l(3, 3);
  l << -2, 1, 0, 1, -2, 1, 0, 0, -1;
  CHECK(tree_probability(Generator::validate(l), SpanningTree{{2, kCemetery, kCemetery}}) == 0.0);

  Rng rng = stream(87, {});
  for (Index n = 2; n <= 4; ++n) {
    const Generator h = random_transient_generator(n, rng);
    double total = 0.0;
    for (const auto& t : enumerate_spanning_trees(n)) total += tree_probability(h, t);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("Wilson trees") {
  MatrixXd one(1, 1);
  one << -1;
  Rng rng = stream(88, {});
  CHECK(wilson_sample(Generator::validate(one), {0}, rng).tree.parent == std::vector<Index>{kCemetery});
  CHECK_THROWS_AS(wilson_sample(two_state_chain(), {0, 0}, rng), Error);
  CHECK_THROWS_AS(wilson_sample(Generator::validate((MatrixXd(2, 2) << -1, 1, 1, -1).finished()), {0, 1}, rng), Error);

  const Generator g = two_state_chain();
  const int n = 30000;
  std::map<std::string, double> freq;
  for (int i = 0; i < n; ++i) freq[wilson_sample(g, {0, 1}, rng).tree.encode()] += 1;
  CHECK(freq.size() == 3);
  for (const auto& [k, c] : freq) CHECK(std::abs(c / n - 1.0 / 3) < 3 * std::sqrt(2.0 / 9 / n));
}

TEST_CASE("Wilson law on three states and order invariance") {
  const Generator g = three_state_chain();
  const auto trees = enumerate_spanning_trees(3);
  const int n = 30000;
  std::map<std::string, double> lex, rev;
  for (int i = 0; i < n; ++i) {
    Rng a = stream(89, {std::uint64_t(i)}), b = stream(90, {std::uint64_t(i)});
    lex[wilson_sample(g, {0, 1, 2}, a).tree.encode()] += 1;
    rev[wilson_sample(g, {2, 0, 1}, b).tree.encode()] += 1;
  }
  std::vector<double> obs, exp;
  for (const auto& t : trees) {
    const double p = tree_probability(g, t);
    if (p == 0.0) continue;
    obs.push_back(lex[t.encode()]);
    exp.push_back(p * n);
  }
  CHECK(stats::chi2_goodness_of_fit(obs, exp).p_value > 0.01);
  CHECK(stats::chi2_homogeneity(lex, rev).p_value > 0.01);
}

TEST_CASE("holding times do not change the tree") {
  const Generator g = three_state_chain();
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng a = stream(91, {i}), b = stream(91, {i}), h = stream(92, {i});
    const WilsonResult plain = wilson_sample(g, {0, 1, 2}, a);
    const WilsonResult timed = wilson_sample(g, {0, 1, 2}, b, &h);
    CHECK(plain.tree == timed.tree);
    for (const auto& rec : timed.records)
      for (const auto& seg : rec.segments) CHECK(seg.holds.size() == seg.states.size());
  }
}

TEST_CASE("GEM pieces") {
  Rng rng = stream(93, {});
  std::vector<double> first;
  for (int i = 0; i < 5000; ++i) {
    const auto pieces = gem_pieces(rng, 1e-6);
    double sum = 0.0;
    for (double p : pieces) {
      CHECK(p > 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    first.push_back(pieces.front());
  }
  CHECK(stats::ks_one_sample(first, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("reconstruction conserves occupation") {
  const Generator g = three_state_chain();
  CHECK(pd_cut_reconstruct({}, 3, *std::make_unique<Rng>(stream(94, {}))).loops.empty());
  for (std::uint64_t i = 0; i < 300; ++i) {
    Rng a = stream(95, {i}), h = stream(96, {i}), cut = stream(97, {i});
    const WilsonResult w = wilson_sample(g, {0, 1, 2}, a, &h);
    VectorXd erased = VectorXd::Zero(3);
    for (const auto& rec : w.records)
      for (const auto& seg : rec.segments)
        for (std::size_t k = 0; k + 1 < seg.states.size(); ++k) erased(seg.states[k]) += seg.holds[k];
    // the base hold at the final visit belongs to the erased loop's local time too
    for (const auto& rec : w.records)
      for (const auto& seg : rec.segments) erased(seg.base) += seg.holds.back();
    const LoopSoup s = pd_cut_reconstruct(w.records, 3, cut);
    VectorXd rebuilt = s.trivial_occupation;
    for (const Loop& l : s.loops) {
      CHECK_FALSE(l.trivial());
      rebuilt += occupation_vector(l, 3);
    }
    CHECK((rebuilt - erased).cwiseAbs().maxCoeff() < 1e-9);
  }
  Rng a = stream(98, {});
  const WilsonResult no_holds = wilson_sample(g, {0, 1, 2}, a);
  CHECK_THROWS_AS(pd_cut_reconstruct(no_holds.records, 3, a), Error);
}

TEST_CASE("reconstructed field matches a direct soup") {
  const Generator g = two_state_chain();
  const LoopSampler sampler(g);
  std::vector<double> rebuilt, direct;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    Rng a = stream(99, {i}), h = stream(100, {i}), cut = stream(101, {i});
    const LoopSoup s = pd_cut_reconstruct(wilson_sample(g, {0, 1}, a, &h).records, 2, cut);
    double x = s.trivial_occupation(0);
    for (const Loop& l : s.loops) x += occupation(l, 0);
    rebuilt.push_back(x);
    direct.push_back(occupation_field(sample_soup(sampler, 1.0, 102, i)).raw(0));
  }
  CHECK(stats::ks_two_sample(rebuilt, direct).p_value > 0.01);
}

TEST_CASE("Angel-Kozma conditioning") {
  const Generator g = three_state_chain();
  const AngelKozmaReport r = angel_kozma_check(g, 2, 0, 3, 7, 4000);
  CHECK(r.pass);
  REQUIRE(r.p_values.size() == 3);
  for (double p : r.p_values) CHECK(p > 0.01);
  for (double z : r.hit_z) CHECK(std::abs(z) < 3);
  CHECK_THROWS_AS(angel_kozma_check(g, 0, 0, 2, 7, 10), Error);

  MatrixXd l(3, 3);
  l << -1, 0.5, 0, 0.5, -1, 0, 1, 0, -2;
  try {
    angel_kozma_check(Generator::validate(l), 2, 0, 2, 7, 10);
    FAIL("expected DegenerateConditioning");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateConditioning);
  }
}
