#include "loopsoup/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "loopsoup/error.hpp"

namespace loopsoup::stats {

MeanEstimate mean_se(const std::vector<double>& xs) {
  MeanEstimate m;
  m.n = xs.size();
  if (xs.empty()) return m;
  // two-pass for accuracy
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stderr_ = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
  return m;
}

double z_score(double estimate, double exact, double se) {
  if (se > 0.0) return (estimate - exact) / se;
  return estimate == exact ? 0.0 : std::copysign(INFINITY, estimate - exact);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw Error(Errc::InvalidArgument, "KS test on an empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d), 0.0};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::InvalidArgument, "KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d), 0.0};
}

double chi2_survival(double x, double dof) {
  if (dof <= 0.0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

TestResult chi2_goodness_of_fit(const std::vector<double>& observed, const std::vector<double>& expected,
                                double min_expected) {
  if (observed.size() != expected.size()) throw Error(Errc::InvalidArgument, "bin count mismatch");
  // pool small bins in order
  std::vector<double> o, e;
  double po = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    po += observed[i];
    pe += expected[i];
    if (pe >= min_expected) {
      o.push_back(po);
      e.push_back(pe);
      po = pe = 0.0;
    }
  }
  if (pe > 0.0 || po > 0.0) {
    if (e.empty()) {
      o.push_back(po);
      e.push_back(pe);
    } else {
      o.back() += po;
      e.back() += pe;
    }
  }
  TestResult r;
  for (std::size_t i = 0; i < o.size(); ++i)
    if (e[i] > 0.0) r.statistic += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  r.dof = double(o.size()) - 1.0;
  r.p_value = chi2_survival(r.statistic, r.dof);
  return r;
}

TestResult chi2_homogeneity(const std::map<std::string, double>& a, const std::map<std::string, double>& b,
                            double min_expected) {
  std::set<std::string> keys;
  double na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    keys.insert(k);
    na += v;
  }
  for (const auto& [k, v] : b) {
    keys.insert(k);
    nb += v;
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::InvalidArgument, "homogeneity test with an empty sample");
  // rare categories are pooled into one cell
  std::vector<std::pair<double, double>> cells;
  std::pair<double, double> pooled{0.0, 0.0};
  for (const auto& k : keys) {
    const double ca = a.count(k) ? a.at(k) : 0.0;
    const double cb = b.count(k) ? b.at(k) : 0.0;
    const double total = ca + cb;
    if (std::min(total * na, total * nb) / (na + nb) < min_expected) {
      pooled.first += ca;
      pooled.second += cb;
    } else {
      cells.emplace_back(ca, cb);
    }
  }
  if (pooled.first + pooled.second > 0.0) cells.push_back(pooled);
  TestResult r;
  for (const auto& [ca, cb] : cells) {
    const double total = ca + cb;
    const double ea = total * na / (na + nb), eb = total * nb / (na + nb);
    r.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  r.dof = double(cells.size()) - 1.0;
  r.p_value = chi2_survival(r.statistic, r.dof);
  return r;
}

TestResult poisson_dispersion(const std::vector<double>& counts) {
  const MeanEstimate m = mean_se(counts);
  TestResult r;
  if (m.n < 2 || m.mean <= 0.0) return r;
  double ss = 0.0;
  for (double c : counts) ss += (c - m.mean) * (c - m.mean);
  r.statistic = ss / m.mean;
  r.dof = double(m.n - 1);
  boost::math::chi_squared dist(r.dof);
  const double lower = boost::math::cdf(dist, r.statistic);
  r.p_value = 2.0 * std::min(lower, 1.0 - lower);
  return r;
}

double gamma_cdf(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(Errc::InvalidArgument, "distribution size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d / 2.0;
}

}  // namespace loopsoup::stats
