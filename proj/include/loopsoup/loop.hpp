#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "loopsoup/linalg.hpp"

namespace loopsoup {

// Alternating states and holding times, read from the base point.
struct PointedLoop {
  std::vector<Index> states;
  std::vector<double> holds;

  /// Validates shape, positivity of holds and cyclic non-degeneracy.
  static PointedLoop make(std::vector<Index> states, std::vector<double> holds);

  std::size_t jumps() const { return states.size(); }
  bool trivial() const { return states.size() == 1; }
  double duration() const;
  PointedLoop rotated(std::size_t k) const;

  friend bool operator==(const PointedLoop&, const PointedLoop&) = default;
};

/// Loop stored through its rotation-minimal representative.
class Loop {
 public:
  Loop() = default;
  explicit Loop(const PointedLoop& pl);

  const PointedLoop& pointed() const { return rep_; }
  const std::vector<Index>& states() const { return rep_.states; }
  const std::vector<double>& holds() const { return rep_.holds; }
  std::size_t jumps() const { return rep_.jumps(); }
  bool trivial() const { return rep_.trivial(); }
  double duration() const { return rep_.duration(); }

  friend bool operator==(const Loop&, const Loop&) = default;

 private:
  PointedLoop rep_;
};

Loop canonicalize(const PointedLoop& pl);

/// (n, primitive) with the cycle equal to the primitive repeated n times, n maximal.
std::pair<int, std::vector<Index>> multiplicity_primitive(const std::vector<Index>& cycle);

/// Rotation-summed iterated occupation l^{x_1..x_n}, exact.
double multi_occupation(const Loop& l, std::span<const Index> points);
double occupation(const Loop& l, Index x);
VectorXd occupation_vector(const Loop& l, Index n);

struct JumpCounts {
  MatrixXd pairs;   // N^x_y
  VectorXd visits;  // N^x
  std::size_t p = 0;
  Index distinct = 0;
};

JumpCounts jump_counts(const Loop& l, Index n);

std::optional<Loop> loop_trace(const Loop& l, const StateSet& f);

}  // namespace loopsoup
