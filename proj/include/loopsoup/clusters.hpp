#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "loopsoup/soup.hpp"

namespace loopsoup {

using Edge = std::pair<Index, Index>;  // unordered, stored with first < second

class UnionFind {
 public:
  explicit UnionFind(Index n);
  Index find(Index x);
  bool unite(Index a, Index b);

 private:
  std::vector<Index> parent_, rank_;
};

struct ClusterPartition {
  std::vector<StateSet> blocks;  // sorted by smallest element
  std::vector<Edge> open_edges;  // sorted

  /// Block label per state, blocks numbered in order of first appearance.
  std::vector<Index> labels(Index n) const;
  std::string encode(Index n) const;
};

ClusterPartition clusters(const LoopSoup& soup);
ClusterPartition partition_from_edges(Index n, std::vector<Edge> edges);
std::vector<StateSet> normalize_partition(std::vector<StateSet> blocks, Index n);

double closed_edges_probability(const Generator& g, double alpha, const std::vector<Edge>& edges);
double finer_partition_probability(const Generator& g, double alpha, const std::vector<StateSet>& partition);

struct CircleParams {
  int n = 3;
  double p = 0.5;
  double c = 1.0;

  void check() const;
  double x1() const;
  double x2() const;
  double kappa() const;
};

Generator circle_chain(const CircleParams& params);
/// Closed form as published for the closed edge {1, n}.
double circle_closed_edge_probability(const CircleParams& params, double alpha);
double renewal_kappa(double p, double c);

/// Enumerates all set partitions of {0..n-1}.
std::vector<std::vector<StateSet>> all_partitions(Index n);

/// Law of the cluster partition, keyed by ClusterPartition::encode, by Moebius inversion
/// of finer_partition_probability over the partition lattice.
std::map<std::string, double> cluster_law(const Generator& g, double alpha);

}  // namespace loopsoup
