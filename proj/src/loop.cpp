#include "loopsoup/loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loopsoup {

PointedLoop PointedLoop::make(std::vector<Index> states, std::vector<double> holds) {
  if (states.empty()) throw Error(Errc::InvalidArgument, "loop has no states");
  if (states.size() != holds.size()) throw Error(Errc::InvalidArgument, "states and holds differ in length");
  for (double t : holds)
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(Errc::InvalidArgument, "holding times must be positive and finite");
  for (Index x : states)
    if (x < 0) throw Error(Errc::InvalidArgument, "negative state index");
  const std::size_t p = states.size();
  if (p >= 2)
    for (std::size_t i = 0; i < p; ++i)
      if (states[i] == states[(i + 1) % p])
        throw Error(Errc::DegenerateLoop, "state " + std::to_string(states[i]) + " repeats at position " + std::to_string(i));
  return PointedLoop{std::move(states), std::move(holds)};
}

double PointedLoop::duration() const { return std::accumulate(holds.begin(), holds.end(), 0.0); }

PointedLoop PointedLoop::rotated(std::size_t k) const {
  PointedLoop out = *this;
  const std::size_t p = states.size();
  k %= p;
  std::rotate(out.states.begin(), out.states.begin() + long(k), out.states.end());
  std::rotate(out.holds.begin(), out.holds.begin() + long(k), out.holds.end());
  return out;
}

namespace {

// Three-way comparison of rotations a and b: states first, then holds.
int compare_rotations(const PointedLoop& pl, std::size_t a, std::size_t b) {
  const std::size_t p = pl.states.size();
  for (std::size_t i = 0; i < p; ++i) {
    const Index sa = pl.states[(a + i) % p], sb = pl.states[(b + i) % p];
    if (sa != sb) return sa < sb ? -1 : 1;
  }
  for (std::size_t i = 0; i < p; ++i) {
    const double ta = pl.holds[(a + i) % p], tb = pl.holds[(b + i) % p];
    if (ta != tb) return ta < tb ? -1 : 1;
  }
  return 0;
}

// Iterated occupation integral I(y) over [0, |l|) for the pointed representative.
double simplex_integral(const PointedLoop& pl, std::span<const Index> y) {
  const std::size_t n = y.size();
  std::vector<double> d(n + 1, 0.0), next(n + 1);
  d[0] = 1.0;
  for (std::size_t s = 0; s < pl.states.size(); ++s) {
    const Index state = pl.states[s];
    const double tau = pl.holds[s];
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (d[i] == 0.0) continue;
      double w = 1.0;  // tau^k / k!
      next[i] += d[i];
      for (std::size_t k = 1; i + k <= n && y[i + k - 1] == state; ++k) {
        w *= tau / double(k);
        next[i + k] += d[i] * w;
      }
    }
    d.swap(next);
  }
  return d[n];
}

}  // namespace

Loop::Loop(const PointedLoop& pl) {
  const PointedLoop checked = PointedLoop::make(pl.states, pl.holds);
  std::size_t best = 0;
  for (std::size_t r = 1; r < checked.states.size(); ++r)
    if (compare_rotations(checked, r, best) < 0) best = r;
  rep_ = checked.rotated(best);
}

Loop canonicalize(const PointedLoop& pl) { return Loop(pl); }

std::pair<int, std::vector<Index>> multiplicity_primitive(const std::vector<Index>& cycle) {
  const std::size_t k = cycle.size();
  if (k == 0) throw Error(Errc::InvalidCycle, "empty cycle");
  for (std::size_t d = 1; d <= k; ++d) {
    if (k % d) continue;
    bool periodic = true;
    for (std::size_t i = 0; i < k && periodic; ++i) periodic = cycle[i] == cycle[(i + d) % k];
    if (periodic) return {int(k / d), std::vector<Index>(cycle.begin(), cycle.begin() + long(d))};
  }
  return {1, cycle};
}

double multi_occupation(const Loop& l, std::span<const Index> points) {
  const std::size_t n = points.size();
  if (n == 0) throw Error(Errc::EmptyTuple, "multi-occupation needs at least one point");
  std::vector<Index> rotated(points.begin(), points.end());
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    total += simplex_integral(l.pointed(), rotated);
    std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  }
  return total;
}

double occupation(const Loop& l, Index x) {
  double t = 0.0;
  for (std::size_t i = 0; i < l.jumps(); ++i)
    if (l.states()[i] == x) t += l.holds()[i];
  return t;
}

VectorXd occupation_vector(const Loop& l, Index n) {
  VectorXd occ = VectorXd::Zero(n);
  for (std::size_t i = 0; i < l.jumps(); ++i) occ(l.states()[i]) += l.holds()[i];
  return occ;
}

JumpCounts jump_counts(const Loop& l, Index n) {
  JumpCounts jc;
  jc.pairs = MatrixXd::Zero(n, n);
  jc.visits = VectorXd::Zero(n);
  jc.p = l.jumps();
  if (l.trivial()) {
    jc.visits(l.states()[0]) = 1.0;
  } else {
    const auto& s = l.states();
    for (std::size_t i = 0; i < s.size(); ++i) jc.pairs(s[i], s[(i + 1) % s.size()]) += 1.0;
    jc.visits = jc.pairs.rowwise().sum();
  }
  jc.distinct = Index((jc.visits.array() > 0.0).count());
  return jc;
}

std::optional<Loop> loop_trace(const Loop& l, const StateSet& f) {
  std::vector<Index> states;
  std::vector<double> holds;
  for (std::size_t i = 0; i < l.jumps(); ++i) {
    const Index x = l.states()[i];
    if (!contains(f, x)) continue;
    if (!states.empty() && states.back() == x) {
      holds.back() += l.holds()[i];
    } else {
      states.push_back(x);
      holds.push_back(l.holds()[i]);
    }
  }
  if (states.empty()) return std::nullopt;
  if (states.size() >= 2 && states.front() == states.back()) {
    holds.front() += holds.back();
    states.pop_back();
    holds.pop_back();
  }
  return Loop(PointedLoop{std::move(states), std::move(holds)});
}

}  // namespace loopsoup
