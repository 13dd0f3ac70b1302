#include "loopsoup/reconstruct.hpp"

#include <algorithm>
#include <numeric>

namespace loopsoup {

std::vector<double> gem_pieces(Rng& rng, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0,1)");
  std::vector<double> pieces;
  double rest = 1.0;
  while (rest >= eps) {
    const double v = uniform01(rng);
    pieces.push_back(rest * v);
    rest *= 1.0 - v;
  }
  if (pieces.empty()) pieces.push_back(0.0);
  pieces.back() += rest;
  return pieces;
}

namespace {

struct Excursion {
  double departure = 0.0;  // base local time when it leaves
  std::vector<Index> states;
  std::vector<double> holds;
};

void cut_segment(const ErasedSegment& seg, Rng& rng, double eps, LoopSoup& out) {
  const Index x = seg.base;
  double local = 0.0;
  std::vector<Excursion> excursions;
  for (std::size_t i = 0; i < seg.states.size(); ++i) {
    if (seg.states[i] == x) {
      local += seg.holds[i];
      continue;
    }
    if (i == 0 || seg.states[i - 1] == x) excursions.push_back({local, {}, {}});
    excursions.back().states.push_back(seg.states[i]);
    excursions.back().holds.push_back(seg.holds[i]);
  }

  std::vector<double> sizes = gem_pieces(rng, eps);
  std::vector<std::pair<double, double>> timed;  // (uniform time, size)
  for (double s : sizes) timed.emplace_back(uniform01(rng), s);
  std::sort(timed.begin(), timed.end());

  double a = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < timed.size(); ++k) {
    const double b = k + 1 == timed.size() ? local : std::min(local, a + timed[k].second * local);
    std::vector<const Excursion*> inside;
    while (e < excursions.size() && (excursions[e].departure < b || k + 1 == timed.size())) inside.push_back(&excursions[e++]);
    if (inside.empty()) {
      if (b > a) {
        out.trivial_loops.emplace_back(PointedLoop{{x}, {b - a}});
        out.trivial_occupation(x) += b - a;
      }
    } else {
      std::vector<Index> states;
      std::vector<double> holds;
      for (std::size_t j = 0; j < inside.size(); ++j) {
        // sojourn at x before excursion j; the first one wraps around through b
        const double prev = j > 0 ? inside[j - 1]->departure : a - (b - inside.back()->departure);
        states.push_back(x);
        holds.push_back(inside[j]->departure - prev);
        states.insert(states.end(), inside[j]->states.begin(), inside[j]->states.end());
        holds.insert(holds.end(), inside[j]->holds.begin(), inside[j]->holds.end());
      }
      out.loops.emplace_back(PointedLoop::make(std::move(states), std::move(holds)));
    }
    a = b;
  }
}

}  // namespace

LoopSoup pd_cut_reconstruct(const std::vector<ErasureRecord>& records, Index n, Rng& rng, double eps) {
  LoopSoup out;
  out.alpha = 1.0;
  out.states = n;
  out.policy = TrivialPolicy::Explicit;
  out.trivial_occupation = VectorXd::Zero(n);
  out.green_diagonal = VectorXd::Zero(n);
  for (const auto& rec : records)
    for (const auto& seg : rec.segments) {
      if (seg.holds.size() != seg.states.size())
        throw Error(Errc::InvalidArgument, "reconstruction needs paths sampled with holding times");
      cut_segment(seg, rng, eps, out);
    }
  return out;
}

}  // namespace loopsoup
