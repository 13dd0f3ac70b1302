#include "loopsoup/lerw.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "loopsoup/measure.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

namespace {

// States from which killing or absorb can be reached along Q > 0 edges.
std::vector<char> can_finish(const Generator& g, const std::vector<char>& absorbing) {
  const Index n = g.size();
  std::vector<char> ok(std::size_t(n), 0);
  std::vector<Index> stack;
  for (Index x = 0; x < n; ++x)
    if (absorbing[x] || g.killing()(x) > 0.0) {
      ok[x] = 1;
      stack.push_back(x);
    }
  while (!stack.empty()) {
    const Index y = stack.back();
    stack.pop_back();
    for (Index x = 0; x < n; ++x)
      if (!ok[x] && x != y && g.L()(x, y) > 0.0) {
        ok[x] = 1;
        stack.push_back(x);
      }
  }
  return ok;
}

void check_reachable(const Generator& g, Index start, const std::vector<char>& absorbing) {
  const std::vector<char> ok = can_finish(g, absorbing);
  std::vector<char> seen(std::size_t(g.size()), 0);
  std::vector<Index> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const Index x = stack.back();
    stack.pop_back();
    if (!ok[x])
      throw Error(Errc::Unreachable, "from state " + g.labels()[x] + " neither killing nor the target set is reachable");
    if (absorbing[x]) continue;
    for (Index y = 0; y < g.size(); ++y)
      if (!seen[y] && y != x && g.L()(x, y) > 0.0) {
        seen[y] = 1;
        stack.push_back(y);
      }
  }
}

DiscretePath run_path(const Generator& g, Index start, const std::vector<char>& absorbing, Rng& rng,
                      Rng* hold_rng) {
  DiscretePath path;
  Index x = start;
  path.states.push_back(x);
  while (!absorbing[x]) {
    const double q = -g.L()(x, x);
    if (hold_rng) path.holds.push_back(std::exponential_distribution<double>(q)(*hold_rng));
    double u = uniform01(rng) * q;
    Index next = kCemetery;
    for (Index y = 0; y < g.size(); ++y) {
      if (y == x) continue;
      const double r = g.L()(x, y);
      if (r <= 0.0) continue;
      if (u < r) {
        next = y;
        break;
      }
      u -= r;
    }
    // u left over past the last positive rate falls to killing; guard against rounding when killing is 0
    if (next == kCemetery && g.killing()(x) <= 0.0) {
      for (Index y = g.size() - 1; y >= 0; --y)
        if (y != x && g.L()(x, y) > 0.0) {
          next = y;
          break;
        }
    }
    path.states.push_back(next);
    if (next == kCemetery) {
      path.killed = true;
      break;
    }
    x = next;
  }
  return path;
}

void check_prefix(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix) {
  require_transient(g);
  const Index n = g.size();
  if (nu.size() != n) throw Error(Errc::InvalidArgument, "initial distribution has wrong dimension");
  if (prefix.empty()) throw Error(Errc::InvalidArgument, "empty prefix");
  std::vector<char> seen(std::size_t(n), 0);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const Index x = prefix[i];
    if (x == kCemetery) {
      if (i + 1 != prefix.size() || i == 0)
        throw Error(Errc::InvalidArgument, "cemetery may only end a prefix of length >= 2");
      continue;
    }
    if (x < 0 || x >= n) throw Error(Errc::InvalidArgument, "state index out of range");
    if (seen[x]++) throw Error(Errc::NotSelfAvoiding, "state " + g.labels()[x] + " repeats");
  }
}

// Shared evaluation: rates (off-diagonal part of a generator), killing, potential.
double prefix_escape(const MatrixXd& rates, const VectorXd& kill, const MatrixXd& v, const HittingData* hd,
                     const VectorXd& nu, const std::vector<Index>& prefix) {
  const std::size_t m = prefix.size() - 1;
  const StateSet d(prefix.begin(), prefix.begin() + std::ptrdiff_t(m));
  double weight = nu(prefix.front());
  for (std::size_t k = 0; k < m; ++k) {
    const Index a = prefix[k], b = prefix[k + 1];
    weight *= b == kCemetery ? kill(a) : rates(a, b);
  }
  if (m == 0) return weight;
  const Index last = prefix.back();
  const StateSet sorted = make_subset(d, v.rows());
  double escape = 1.0;
  if (last != kCemetery) escape = std::max(0.0, hd->defect(last));
  return weight * determinant(MatrixXd(principal(v, sorted))) * escape;
}

double prefix_bordered(const MatrixXd& rates, const VectorXd& kill, const MatrixXd& v, const VectorXd& nu,
                       const std::vector<Index>& prefix) {
  const Index m = Index(prefix.size()) - 1;
  double weight = nu(prefix.front());
  for (Index k = 0; k < m; ++k) {
    const Index a = prefix[k], b = prefix[k + 1];
    weight *= b == kCemetery ? kill(a) : rates(a, b);
  }
  MatrixXd b = MatrixXd::Ones(m + 1, m + 1);
  for (Index i = 0; i <= m; ++i)
    for (Index j = 0; j < m; ++j) b(i, j) = prefix[i] == kCemetery ? 0.0 : v(prefix[i], prefix[j]);
  return weight * determinant(b);
}

}  // namespace

DiscretePath sample_killed_path(const Generator& g, Index start, const StateSet& absorb, Rng& rng, Rng* hold_rng) {
  const Index n = g.size();
  if (start < 0 || start >= n) throw Error(Errc::InvalidArgument, "start state out of range");
  std::vector<char> absorbing(std::size_t(n), 0);
  for (Index x : make_subset(absorb, n)) absorbing[x] = 1;
  check_reachable(g, start, absorbing);
  return run_path(g, start, absorbing, rng, hold_rng);
}

std::vector<ErasedSegment> ErasureRecord::erased_loops() const {
  std::vector<ErasedSegment> out;
  for (const auto& s : segments)
    if (s.has_cycle()) out.push_back(s);
  return out;
}

std::size_t ErasureRecord::erased_jumps() const {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.states.size() - 1;
  return total;
}

ErasureRecord loop_erase(const DiscretePath& path) {
  ErasureRecord rec;
  const auto& xs = path.states;
  if (xs.empty()) return rec;
  const bool with_holds = !path.holds.empty();
  std::size_t i = 0;
  while (true) {
    const Index y = xs[i];
    std::size_t last = i;
    for (std::size_t k = xs.size(); k-- > i;)
      if (xs[k] == y) {
        last = k;
        break;
      }
    rec.lerw.push_back(y);
    if (last + 1 == xs.size()) break;
    ErasedSegment seg;
    seg.base = y;
    seg.states.assign(xs.begin() + std::ptrdiff_t(i), xs.begin() + std::ptrdiff_t(last) + 1);
    if (with_holds)
      seg.holds.assign(path.holds.begin() + std::ptrdiff_t(i), path.holds.begin() + std::ptrdiff_t(last) + 1);
    rec.segments.push_back(std::move(seg));
    i = last + 1;
  }
  return rec;
}

double lerw_prefix_probability(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix) {
  check_prefix(g, nu, prefix);
  const MatrixXd v = potential(g).V;
  std::optional<HittingData> hd;
  if (prefix.size() > 1) {
    const StateSet d(prefix.begin(), prefix.end() - 1);
    hd = hitting_return(g, d);
  }
  const double escape_form = prefix_escape(g.L(), g.killing(), v, hd ? &*hd : nullptr, nu, prefix);
  const double bordered = prefix_bordered(g.L(), g.killing(), v, nu, prefix);
  if (std::abs(escape_form - bordered) > 1e-10)
    throw Error(Errc::DisagreementBeyondTolerance,
                "escape form " + std::to_string(escape_form) + " vs bordered " + std::to_string(bordered));
  return escape_form;
}

double lerw_prefix_probability_bordered(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix) {
  check_prefix(g, nu, prefix);
  return prefix_bordered(g.L(), g.killing(), potential(g).V, nu, prefix);
}

double lerw_prefix_probability_jump_chain(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix) {
  check_prefix(g, nu, prefix);
  const Index n = g.size();
  const MatrixXd& q = g.Q();
  const VectorXd kill = g.killing().cwiseQuotient(g.holding_rates());
  const MatrixXd fundamental = guarded_inverse(MatrixXd(MatrixXd::Identity(n, n) - q));
  return prefix_bordered(q, kill, fundamental, nu, prefix);
}

std::string SpanningTree::encode() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (i) os << ' ';
    if (parent[i] == kCemetery)
      os << 'D';
    else
      os << parent[i];
  }
  return os.str();
}

WilsonResult wilson_sample(const Generator& g, const std::vector<Index>& order, Rng& rng, Rng* hold_rng) {
  const Index n = g.size();
  if (!g.transient()) throw Error(Errc::NotTransient, "Wilson's algorithm needs a transient chain");
  std::vector<Index> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < n; ++i)
    if (Index(sorted.size()) != n || sorted[i] != i)
      throw Error(Errc::InvalidArgument, "order must be a permutation of the states");

  WilsonResult out;
  out.tree.parent.assign(std::size_t(n), kCemetery);
  std::vector<char> in_tree(std::size_t(n), 0);
  check_reachable(g, order.front(), in_tree);
  for (Index start : order) {
    if (in_tree[start]) continue;
    const DiscretePath path = run_path(g, start, in_tree, rng, hold_rng);
    ErasureRecord rec = loop_erase(path);
    for (std::size_t i = 0; i + 1 < rec.lerw.size(); ++i) {
      out.tree.parent[rec.lerw[i]] = rec.lerw[i + 1];
      in_tree[rec.lerw[i]] = 1;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

double tree_probability(const Generator& g, const SpanningTree& tree) {
  const Index n = g.size();
  if (Index(tree.parent.size()) != n) throw Error(Errc::NotASpanningTree, "parent array has wrong size");
  for (Index x = 0; x < n; ++x) {
    const Index p = tree.parent[x];
    if (p == x || p < kCemetery || p >= n) throw Error(Errc::NotASpanningTree, "invalid parent of " + g.labels()[x]);
  }
  for (Index x = 0; x < n; ++x) {
    Index y = x;
    for (Index steps = 0; y != kCemetery; ++steps) {
      if (steps > n) throw Error(Errc::NotASpanningTree, "cycle through " + g.labels()[x]);
      y = tree.parent[y];
    }
  }
  require_transient(g);
  double w = determinant(potential(g).V);
  for (Index x = 0; x < n; ++x) {
    const Index p = tree.parent[x];
    w *= p == kCemetery ? g.killing()(x) : g.L()(x, p);
  }
  return w;
}

std::vector<SpanningTree> enumerate_spanning_trees(Index n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "need at least one state");
  if (n > 7) throw Error(Errc::MatrixTooLarge, "tree enumeration limited to 7 states");
  std::vector<SpanningTree> out;
  std::vector<Index> parent(std::size_t(n), kCemetery);
  auto acyclic = [&] {
    for (Index x = 0; x < n; ++x) {
      Index y = x;
      for (Index steps = 0; y != kCemetery; ++steps) {
        if (steps > n) return false;
        y = parent[y];
      }
    }
    return true;
  };
  // odometer over parent choices {cemetery, 0..n-1}
  while (true) {
    bool valid = true;
    for (Index x = 0; x < n; ++x)
      if (parent[x] == x) valid = false;
    if (valid && acyclic()) out.push_back(SpanningTree{parent});
    Index k = 0;
    while (k < n && parent[k] == n - 1) parent[k++] = kCemetery;
    if (k == n) break;
    ++parent[k];
  }
  return out;
}

AngelKozmaReport angel_kozma_check(const Generator& g, Index w, Index x0, int n_max, std::uint64_t seed,
                                   std::size_t samples) {
  const Index n = g.size();
  if (w < 0 || w >= n || x0 < 0 || x0 >= n || w == x0) throw Error(Errc::InvalidArgument, "need distinct w and x0");
  if (n_max < 1 || samples < 1) throw Error(Errc::InvalidArgument, "need n_max >= 1 and samples >= 1");
  require_transient(g);
  const HittingData hd = hitting_return(g, {w});
  const double first = hd.H(x0, 0);
  const double ret = hd.R(0, 0);
  if (first < 1e-12) throw Error(Errc::DegenerateConditioning, "P[T_1 < inf] = " + std::to_string(first));

  auto encode = [&](const std::vector<Index>& xs) {
    std::string s;
    for (Index x : xs) s += g.labels()[x] + ",";
    return s;
  };
  // one run: walk until the N-th visit to w or killing
  auto collect = [&](int big_n, std::uint64_t tag) {
    std::map<std::string, double> counts;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
      Rng rng = stream(seed, {tag, std::uint64_t(big_n), s});
      DiscretePath path;
      Index x = x0;
      path.states.push_back(x);
      int visits = 0;
      while (true) {
        double u = uniform01(rng);
        Index next = kCemetery;
        for (Index y = 0; y < n; ++y) {
          const double p = g.Q()(x, y);
          if (y == x || p <= 0.0) continue;
          if (u < p) {
            next = y;
            break;
          }
          u -= p;
        }
        if (next == kCemetery) break;
        path.states.push_back(next);
        x = next;
        if (x == w && ++visits == big_n) break;
      }
      if (visits < big_n) continue;
      ++hits;
      counts[encode(loop_erase(path).lerw)] += 1.0;
    }
    return std::make_pair(counts, hits);
  };

  AngelKozmaReport rep;
  const auto [reference, ref_hits] = collect(1, 0);
  for (int big_n = 1; big_n <= n_max; ++big_n) {
    // N = 1 is compared against an independent replicate
    const auto [counts, hits] = collect(big_n, 1);
    rep.conditioned.push_back(hits);
    const double freq = double(hits) / double(samples);
    const double exact = first * std::pow(ret, big_n - 1);
    const double se = std::sqrt(exact * (1.0 - exact) / double(samples));
    rep.hit_frequency.push_back(freq);
    rep.hit_exact.push_back(exact);
    rep.hit_z.push_back(stats::z_score(freq, exact, se));
    double p = 1.0;
    if (hits > 0 && ref_hits > 0) p = stats::chi2_homogeneity(reference, counts).p_value;
    rep.p_values.push_back(p);
    if (!(p > 0.01) || std::abs(rep.hit_z.back()) >= 3.0) rep.pass = false;
  }
  return rep;
}

}  // namespace loopsoup
