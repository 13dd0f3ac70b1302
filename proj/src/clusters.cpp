#include "loopsoup/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "loopsoup/measure.hpp"

namespace loopsoup {

UnionFind::UnionFind(Index n) : parent_(std::size_t(n)), rank_(std::size_t(n), 0) {
  std::iota(parent_.begin(), parent_.end(), Index(0));
}

Index UnionFind::find(Index x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(Index a, Index b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  return true;
}

std::vector<Index> ClusterPartition::labels(Index n) const {
  std::vector<Index> out(std::size_t(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Index x : blocks[b]) out[x] = Index(b);
  return out;
}

std::string ClusterPartition::encode(Index n) const {
  std::ostringstream os;
  for (Index l : labels(n)) os << l;
  return os.str();
}

std::vector<StateSet> normalize_partition(std::vector<StateSet> blocks, Index n) {
  std::vector<int> seen(std::size_t(n), 0);
  for (auto& b : blocks) {
    if (b.empty()) throw Error(Errc::InvalidPartition, "empty block");
    for (Index x : b) {
      if (x < 0 || x >= n) throw Error(Errc::InvalidPartition, "state index out of range");
      if (seen[x]++) throw Error(Errc::InvalidPartition, "state " + std::to_string(x) + " in two blocks");
    }
    std::sort(b.begin(), b.end());
  }
  for (Index x = 0; x < n; ++x)
    if (!seen[x]) throw Error(Errc::InvalidPartition, "state " + std::to_string(x) + " not covered");
  std::sort(blocks.begin(), blocks.end(), [](const StateSet& a, const StateSet& b) { return a.front() < b.front(); });
  return blocks;
}

ClusterPartition partition_from_edges(Index n, std::vector<Edge> edges) {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  std::map<Index, StateSet> groups;
  for (Index x = 0; x < n; ++x) groups[uf.find(x)].push_back(x);
  ClusterPartition cp;
  for (auto& [root, members] : groups) cp.blocks.push_back(std::move(members));
  cp.blocks = normalize_partition(std::move(cp.blocks), n);
  cp.open_edges = std::move(edges);
  return cp;
}

ClusterPartition clusters(const LoopSoup& soup) {
  const Index n = soup.states;
  MatrixXd traversals = MatrixXd::Zero(n, n);
  for (const Loop& l : soup.loops) traversals += jump_counts(l, n).pairs;
  std::vector<Edge> edges;
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y)
      if (traversals(x, y) + traversals(y, x) > 0.0) edges.emplace_back(x, y);
  return partition_from_edges(n, std::move(edges));
}

double closed_edges_probability(const Generator& g, double alpha, const std::vector<Edge>& edges) {
  require_transient(g);
  if (edges.empty()) return 1.0;
  const Index n = g.size();
  MatrixXd lf = MatrixXd::Zero(n, n);
  StateSet a;
  for (const auto& [x, y] : edges) {
    if (x == y || x < 0 || y < 0 || x >= n || y >= n) throw Error(Errc::InvalidArgument, "invalid edge");
    lf(x, y) = g.L()(x, y);
    lf(y, x) = g.L()(y, x);
    a.push_back(x);
    a.push_back(y);
  }
  a = make_subset(a, n);
  const MatrixXd v = potential(g).V;
  const MatrixXd m = MatrixXd::Identity(Index(a.size()), Index(a.size())) + principal(lf, a) * principal(v, a);
  return std::pow(determinant(m), -alpha);
}

double finer_partition_probability(const Generator& g, double alpha, const std::vector<StateSet>& partition) {
  require_transient(g);
  const Index n = g.size();
  const std::vector<StateSet> blocks = normalize_partition(partition, n);
  if (blocks.size() <= 1) return 1.0;
  const MatrixXd& q = g.Q();
  std::vector<Index> block_of(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Index x : blocks[b]) block_of[x] = Index(b);
  auto crosses = [&](Index x) {
    for (Index y = 0; y < n; ++y)
      if (block_of[y] != block_of[x] && q(x, y) + q(y, x) > 0.0) return true;
    return false;
  };
  // boundary points in block order; K is indexed by them
  std::vector<StateSet> boundary(blocks.size());
  StateSet order;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Index x : blocks[b])
      if (crosses(x)) {
        boundary[b].push_back(x);
        order.push_back(x);
      }
  if (order.empty()) return 1.0;
  std::vector<Index> pos(std::size_t(n), -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = Index(i);

  MatrixXd k = MatrixXd::Zero(Index(order.size()), Index(order.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (boundary[i].empty()) continue;
    const StateSet outside = complement_of(blocks[i], n);
    const HittingData hd = hitting_return(g, outside);
    for (Index x : boundary[i])
      for (std::size_t col = 0; col < outside.size(); ++col) {
        const Index y = outside[col];
        if (pos[y] >= 0) k(pos[x], pos[y]) = hd.H(x, Index(col));
      }
  }
  const MatrixXd m = MatrixXd::Identity(k.rows(), k.cols()) - k;
  return std::pow(determinant(m), alpha);
}

void CircleParams::check() const {
  if (n < 3 || !(p > 0.0 && p < 1.0) || !(c > 0.0) || !std::isfinite(c))
    throw Error(Errc::BadParams, "circle needs n >= 3, p in (0,1), c > 0");
}

double CircleParams::x1() const {
  check();
  return (1.0 + c + std::sqrt((1.0 + c) * (1.0 + c) - 4.0 * p * (1.0 - p))) / 2.0;
}

double CircleParams::x2() const {
  // x1 x2 = p(1-p) avoids cancellation in the smaller root
  return p * (1.0 - p) / x1();
}

double CircleParams::kappa() const { return renewal_kappa(p, c); }

double renewal_kappa(double p, double c) {
  CircleParams{3, p, c}.check();
  const double s = std::sqrt(p * (1.0 - p));
  return (1.0 + c - 2.0 * s) / s;
}

Generator circle_chain(const CircleParams& params) {
  params.check();
  const int n = params.n;
  MatrixXd l = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    l(i, j) += params.p;
    l(j, i) += 1.0 - params.p;
    l(i, i) = -(1.0 + params.c);
  }
  std::vector<std::string> labels;
  for (int i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return Generator::validate(l, labels);
}

double circle_closed_edge_probability(const CircleParams& params, double alpha) {
  params.check();
  const double x1 = params.x1(), x2 = params.x2(), p = params.p;
  const int n = params.n;
  const double num = std::pow(std::pow(x1, n) - std::pow(x2, n), 2);
  const double den = (x1 - x2) * (std::pow(x1, n - 1) - std::pow(x2, n - 1)) *
                     (std::pow(x1, n) + std::pow(x2, n) - (std::pow(p, n) + std::pow(1.0 - p, n)));
  return std::pow(num / den, -alpha);
}

std::vector<std::vector<StateSet>> all_partitions(Index n) {
  std::vector<std::vector<StateSet>> out;
  std::vector<StateSet> current;
  std::function<void(Index)> place = [&](Index x) {
    if (x == n) {
      out.push_back(current);
      return;
    }
    for (std::size_t b = 0; b < current.size(); ++b) {
      current[b].push_back(x);
      place(x + 1);
      current[b].pop_back();
    }
    current.push_back({x});
    place(x + 1);
    current.pop_back();
  };
  place(0);
  return out;
}

std::map<std::string, double> cluster_law(const Generator& g, double alpha) {
  const Index n = g.size();
  if (n > 8) throw Error(Errc::MatrixTooLarge, "partition lattice over more than 8 states");
  auto parts = all_partitions(n);
  std::stable_sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<std::vector<Index>> block_of;
  for (const auto& p : parts) {
    std::vector<Index> b(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < p.size(); ++k)
      for (Index x : p[k]) b[x] = Index(k);
    block_of.push_back(std::move(b));
  }
  // sigma refines pi when every block of sigma sits inside one block of pi
  auto refines = [&](std::size_t sigma, std::size_t pi) {
    for (const auto& blk : parts[sigma])
      for (Index x : blk)
        if (block_of[pi][x] != block_of[pi][blk.front()]) return false;
    return true;
  };
  std::vector<double> exact(parts.size());
  std::map<std::string, double> law;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    double p = finer_partition_probability(g, alpha, parts[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (parts[j].size() > parts[i].size() && refines(j, i)) p -= exact[j];
    exact[i] = p;
    ClusterPartition cp;
    cp.blocks = normalize_partition(parts[i], n);
    law[cp.encode(n)] = p;
  }
  return law;
}

}  // namespace loopsoup
