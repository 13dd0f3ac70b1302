#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loopsoup/io.hpp"
#include "loopsoup/harness.hpp"
#include "loopsoup/loop.hpp"

using namespace loopsoup;

namespace {

Loop make_loop(std::vector<Index> s, std::vector<double> h) { return Loop(PointedLoop::make(std::move(s), std::move(h))); }

Loop random_loop(Rng& rng, Index n, std::size_t max_jumps) {
  const std::size_t p = 1 + std::size_t(rng() % max_jumps);
  std::vector<Index> s;
  std::vector<double> h;
  while (true) {
    s.clear();
    h.clear();
    for (std::size_t i = 0; i < p; ++i) {
      Index x = Index(rng() % std::uint64_t(n));
      while (i > 0 && x == s.back()) x = Index(rng() % std::uint64_t(n));
      s.push_back(x);
      h.push_back(0.1 + 2.0 * uniform01(rng));
    }
    if (p == 1 || s.front() != s.back()) break;
  }
  return make_loop(s, h);
}

// Brute force: for every cyclic shift of the tuple, sum over weakly increasing segment
// assignments of the product of simplex volumes tau^k / k! per segment.
double occupation_oracle(const Loop& l, const std::vector<Index>& pts) {
  const auto& s = l.states();
  const auto& h = l.holds();
  const std::size_t n = pts.size(), p = s.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Index> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = pts[(i + j) % n];
    std::vector<std::size_t> seg(n, 0);
    while (true) {
      bool ok = std::is_sorted(seg.begin(), seg.end());
      for (std::size_t i = 0; ok && i < n; ++i) ok = s[seg[i]] == y[i];
      if (ok) {
        double v = 1.0;
        std::size_t i = 0;
        while (i < n) {
          std::size_t k = i;
          while (k < n && seg[k] == seg[i]) ++k;
          v *= std::pow(h[seg[i]], double(k - i)) / std::tgamma(double(k - i) + 1.0);
          i = k;
        }
        total += v;
      }
      std::size_t d = 0;
      while (d < n && ++seg[d] == p) seg[d++] = 0;
      if (d == n) break;
    }
  }
  return total;
}

bool close(double a, double b, double rel = 1e-9) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("pointed loop validation") {
  CHECK_THROWS_AS(PointedLoop::make({}, {}), Error);
  CHECK_THROWS_AS(PointedLoop::make({0, 1}, {1.0}), Error);
  CHECK_THROWS_AS(PointedLoop::make({0}, {0.0}), Error);
  try {
    PointedLoop::make({0, 1, 0}, {1, 1, 1});
    FAIL("expected DegenerateLoop");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateLoop);
  }
  CHECK_NOTHROW(PointedLoop::make({0}, {1.7}));
}

TEST_CASE("canonicalize") {
  const Loop t = make_loop({0}, {1.7});
  CHECK(t.states() == std::vector<Index>{0});
  CHECK(t.holds() == std::vector<double>{1.7});

  const Loop r = make_loop({1, 0}, {1.0, 2.0});
  CHECK(r.states() == std::vector<Index>{0, 1});
  CHECK(r.holds() == std::vector<double>{2.0, 1.0});

  const PointedLoop pl = PointedLoop::make({0, 1, 0, 1}, {1, 2, 3, 4});
  for (std::size_t k = 0; k < 4; ++k) CHECK(canonicalize(pl.rotated(k)).pointed() == pl);
}

TEST_CASE("canonicalize is rotation invariant on random loops") {
  Rng rng = stream(21, {});
  for (int rep = 0; rep < 200; ++rep) {
    const Loop l = random_loop(rng, 4, 8);
    for (std::size_t k = 0; k < l.jumps(); ++k) CHECK(Loop(l.pointed().rotated(k)) == l);
  }
}

TEST_CASE("multiplicity") {
  auto [n1, p1] = multiplicity_primitive({0, 1});
  CHECK(n1 == 1);
  CHECK(p1 == std::vector<Index>{0, 1});
  auto [n2, p2] = multiplicity_primitive({0, 1, 0, 1});
  CHECK(n2 == 2);
  CHECK(p2 == std::vector<Index>{0, 1});
  CHECK(multiplicity_primitive({0, 1, 0, 2}).first == 1);
  CHECK(multiplicity_primitive({0, 1, 2, 0, 1, 2, 0, 1, 2}).first == 3);
  CHECK(multiplicity_primitive({3}).first == 1);
}

TEST_CASE("multi-occupation examples") {
  const Loop l = make_loop({0, 1, 0, 2}, {1.0, 2.0, 3.0, 4.0});
  const Index a = 0, b = 1;
  CHECK(occupation(l, a) == doctest::Approx(4.0));
  CHECK(multi_occupation(l, std::vector<Index>{a}) == doctest::Approx(4.0));

  const Loop t = make_loop({0}, {1.5});
  CHECK(multi_occupation(t, std::vector<Index>{a, a}) == doctest::Approx(1.5 * 1.5));

  CHECK_THROWS_AS(multi_occupation(l, std::vector<Index>{}), Error);
  CHECK(multi_occupation(l, std::vector<Index>{a, b}) == doctest::Approx(occupation(l, a) * occupation(l, b)));
}

TEST_CASE("multi-occupation matches brute force") {
  Rng rng = stream(22, {});
  for (int rep = 0; rep < 300; ++rep) {
    const Loop l = random_loop(rng, 3, 6);
    const std::size_t n = 1 + rng() % 4;
    std::vector<Index> pts(n);
    for (auto& x : pts) x = Index(rng() % 3);
    CHECK(close(multi_occupation(l, pts), occupation_oracle(l, pts)));
  }
}

TEST_CASE("multi-occupation is invariant under cyclic shifts of the tuple") {
  Rng rng = stream(23, {});
  for (int rep = 0; rep < 200; ++rep) {
    const Loop l = random_loop(rng, 3, 7);
    std::vector<Index> pts(1 + rng() % 4);
    for (auto& x : pts) x = Index(rng() % 3);
    const double base = multi_occupation(l, pts);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      std::vector<Index> shifted(pts);
      std::rotate(shifted.begin(), shifted.begin() + long(k), shifted.end());
      CHECK(close(multi_occupation(l, shifted), base, 1e-12));
    }
  }
}

TEST_CASE("moment identity: product equals averaged permutation sum") {
  Rng rng = stream(24, {});
  for (int rep = 0; rep < 200; ++rep) {
    const Loop l = random_loop(rng, 3, 8);
    std::vector<Index> pts(1 + rng() % 4);
    for (auto& x : pts) x = Index(rng() % 3);
    double prod = 1.0;
    for (Index x : pts) prod *= occupation(l, x);
    std::vector<std::size_t> sigma(pts.size());
    std::iota(sigma.begin(), sigma.end(), 0u);
    double sum = 0.0;
    do {
      std::vector<Index> perm;
      for (auto i : sigma) perm.push_back(pts[i]);
      sum += multi_occupation(l, perm);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    CHECK(close(prod, sum / double(pts.size())));
  }
}

TEST_CASE("shuffle identity, first-fixed form") {
  // l^{x1..xn} l^{y1..ym} = sum over interleavings starting with x1 of x in order and a rotation of y
  Rng rng = stream(25, {});
  for (int rep = 0; rep < 150; ++rep) {
    const Loop l = random_loop(rng, 3, 7);
    const std::size_t n = 1 + rng() % 2, m = 1 + rng() % (5 - n);
    std::vector<Index> xs(n), ys(m);
    for (auto& x : xs) x = Index(rng() % 3);
    for (auto& y : ys) y = Index(rng() % 3);
    double rhs = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<Index> yr(m);
      for (std::size_t i = 0; i < m; ++i) yr[i] = ys[(i + r) % m];
      // choose positions of the remaining n-1 x's among n-1+m slots after the leading x1
      const std::size_t slots = n - 1 + m;
      for (unsigned mask = 0; mask < (1u << slots); ++mask) {
        if (std::size_t(__builtin_popcount(mask)) != n - 1) continue;
        std::vector<Index> word{xs[0]};
        std::size_t xi = 1, yi = 0;
        for (std::size_t s = 0; s < slots; ++s) word.push_back(mask & (1u << s) ? xs[xi++] : yr[yi++]);
        rhs += multi_occupation(l, word);
      }
    }
    CHECK(close(multi_occupation(l, xs) * multi_occupation(l, ys), rhs));
  }
}

TEST_CASE("jump counts") {
  const Loop t = make_loop({0}, {1.0});
  JumpCounts jt = jump_counts(t, 3);
  CHECK(jt.visits(0) == 1.0);
  CHECK(jt.pairs.sum() == 0.0);

  const Loop ab = make_loop({0, 1}, {1, 1});
  JumpCounts j2 = jump_counts(ab, 2);
  CHECK(j2.pairs(0, 1) == 1.0);
  CHECK(j2.pairs(1, 0) == 1.0);
  CHECK(j2.p == 2);
  CHECK(j2.visits.sum() == 2.0);

  const Loop abac = make_loop({0, 1, 0, 2}, {1, 1, 1, 1});
  JumpCounts j4 = jump_counts(abac, 3);
  CHECK(j4.pairs(0, 1) == 1.0);
  CHECK(j4.pairs(1, 0) == 1.0);
  CHECK(j4.pairs(0, 2) == 1.0);
  CHECK(j4.pairs(2, 0) == 1.0);
  CHECK(j4.pairs(1, 2) == 0.0);
  CHECK(j4.visits(0) == 2.0);
}

TEST_CASE("loop trace") {
  const Loop l = make_loop({0, 1, 0, 2}, {1, 2, 3, 4});
  const auto tr = loop_trace(l, {0, 1});
  REQUIRE(tr.has_value());
  CHECK(tr->states() == std::vector<Index>{0, 1});
  CHECK(tr->holds()[0] == doctest::Approx(4.0));
  CHECK(tr->holds()[1] == doctest::Approx(2.0));

  CHECK(loop_trace(l, {0, 1, 2}) == l);
  CHECK_FALSE(loop_trace(make_loop({0}, {1.0}), {1}).has_value());
  const auto only_c = loop_trace(l, {2});
  REQUIRE(only_c.has_value());
  CHECK(only_c->trivial());
}

TEST_CASE("trace conserves the occupation on F") {
  Rng rng = stream(26, {});
  for (int rep = 0; rep < 200; ++rep) {
    const Loop l = random_loop(rng, 4, 8);
    const StateSet f{0, 2};
    const auto tr = loop_trace(l, f);
    const double on_f = occupation(l, 0) + occupation(l, 2);
    if (!tr) {
      CHECK(on_f == 0.0);
      continue;
    }
    CHECK(close(tr->duration(), on_f, 1e-12));
    for (Index x : tr->states()) CHECK((x == 0 || x == 2));
  }
}

TEST_CASE("loop json round trip") {
  const Generator g = three_state_chain();
  const Loop l = make_loop({2, 0, 1}, {0.25, 1.5, 3.0});
  const Json j = loop_to_json(l, g);
  CHECK(j[0][0] == "a");
  CHECK(loop_from_json(j, g) == l);
}
