#pragma once

#include <string>
#include <vector>

#include "loopsoup/chain.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Marker for the cemetery (killed state / tree root) inside paths and parent arrays.
inline constexpr Index kCemetery = -1;

struct DiscretePath {
  std::vector<Index> states;  // last entry may be kCemetery
  std::vector<double> holds;  // one per non-terminal position when sampled with holds, else empty
  bool killed = false;
};

/// Embedded-chain path from start until killing or first entry into absorb.
/// Holding times are drawn from hold_rng when it is given.
DiscretePath sample_killed_path(const Generator& g, Index start, const StateSet& absorb, Rng& rng,
                                Rng* hold_rng = nullptr);

// Portion of the path erased at one vertex of the loop-erased path:
// from the first to the last visit of base, both included.
struct ErasedSegment {
  Index base = 0;
  std::vector<Index> states;
  std::vector<double> holds;

  bool has_cycle() const { return states.size() > 1; }
  std::vector<Index> cycle() const { return {states.begin(), states.end() - 1}; }
};

struct ErasureRecord {
  std::vector<Index> lerw;
  std::vector<ErasedSegment> segments;  // one per non-terminal lerw vertex

  std::vector<ErasedSegment> erased_loops() const;
  std::size_t erased_jumps() const;
};

ErasureRecord loop_erase(const DiscretePath& path);

/// Probability that the loop-erased path starts with prefix. A trailing kCemetery asks for the whole path.
double lerw_prefix_probability(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix);
/// Same quantity from the bordered determinant alone.
double lerw_prefix_probability_bordered(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix);
/// Same quantity with L replaced by Q - I and V by (I - Q)^{-1}.
double lerw_prefix_probability_jump_chain(const Generator& g, const VectorXd& nu, const std::vector<Index>& prefix);

struct SpanningTree {
  std::vector<Index> parent;  // kCemetery marks the root edge

  std::string encode() const;
  friend bool operator==(const SpanningTree&, const SpanningTree&) = default;
};

struct WilsonResult {
  SpanningTree tree;
  std::vector<ErasureRecord> records;
};

WilsonResult wilson_sample(const Generator& g, const std::vector<Index>& order, Rng& rng, Rng* hold_rng = nullptr);

double tree_probability(const Generator& g, const SpanningTree& tree);
std::vector<SpanningTree> enumerate_spanning_trees(Index n);

struct AngelKozmaReport {
  std::vector<std::size_t> conditioned;  // runs with T_N finite, per N
  std::vector<double> hit_frequency;     // empirical P[T_N < inf]
  std::vector<double> hit_exact;         // P[T_1 < inf] r^{N-1}
  std::vector<double> hit_z;
  std::vector<double> p_values;          // chi-square homogeneity of LE[0,T_N] against N = 1
  bool pass = true;
};

AngelKozmaReport angel_kozma_check(const Generator& g, Index w, Index x0, int n_max, std::uint64_t seed,
                                   std::size_t samples);

}  // namespace loopsoup
