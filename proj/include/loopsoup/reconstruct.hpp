#pragma once

#include <vector>

#include "loopsoup/lerw.hpp"
#include "loopsoup/soup.hpp"

namespace loopsoup {

/// Rebuilds an alpha = 1 soup from the erased segments of a Wilson sweep sampled with holds.
/// Each segment's local time at its base is cut by GEM(1) stick-breaking; pieces below eps are
/// merged into the last piece drawn.
LoopSoup pd_cut_reconstruct(const std::vector<ErasureRecord>& records, Index n, Rng& rng, double eps = 1e-6);

/// GEM(1) piece sizes summing to one, stopping once the remaining stick is below eps.
std::vector<double> gem_pieces(Rng& rng, double eps);

}  // namespace loopsoup
