#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace loopsoup::stats {

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_se(const std::vector<double>& xs);
double z_score(double estimate, double exact, double se);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
};

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_survival(double lambda);

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson goodness of fit; bins with expected count below min_expected are pooled.
TestResult chi2_goodness_of_fit(const std::vector<double>& observed, const std::vector<double>& expected,
                                double min_expected = 5.0);
/// Two-sample homogeneity over string-keyed categories.
TestResult chi2_homogeneity(const std::map<std::string, double>& a, const std::map<std::string, double>& b,
                            double min_expected = 5.0);
/// Index-of-dispersion test for Poisson counts (two-sided).
TestResult poisson_dispersion(const std::vector<double>& counts);

double chi2_survival(double x, double dof);
double gamma_cdf(double x, double shape, double scale);
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace loopsoup::stats
