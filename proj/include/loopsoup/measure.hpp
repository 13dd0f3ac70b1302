#pragma once

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loopsoup/chain.hpp"

namespace loopsoup {

struct MeasureQueryResult {
  std::complex<double> value;
  std::string formula;
  double spectral_radius = std::numeric_limits<double>::quiet_NaN();
};

double discrete_loop_mass(const Generator& g, const std::vector<Index>& cycle);

double multi_occupation_expectation(const Generator& g, std::span<const Index> tuple);
double occupation_product_moment(const Generator& g, std::span<const Index> multiset);

/// mu(e^{z<l,chi>} - 1) on Re z < 1/rho(M_sqrt(chi) V M_sqrt(chi)).
MeasureQueryResult loop_laplace(const Generator& g, const VectorXd& chi, std::complex<double> z);

/// (trivial, nontrivial) parts of mu(1 - e^{-<l,chi>}).
std::pair<double, double> trivial_split(const Generator& g, const VectorXd& chi);

double visit_mass(const Generator& g, const StateSet& f);
double visit_all_mass(const Generator& g, const std::vector<StateSet>& sets);
std::pair<double, double> visited_points_moments(const Generator& g);

/// Sum of Tr(Q^k)/k for 2 <= k <= kmax.
double truncated_loop_mass(const Generator& g, int kmax);

/// Coefficients c_0..c_k of L_k(u) = sum_m c_m u^m, from e^{ut/(1+t)} - 1.
std::vector<double> laguerre_coefficients(int k);
double laguerre(int k, double u);

/// mu((V^x_x)^j L_j(l^x/V^x_x) (V^y_y)^k L_k(l^y/V^y_y)).
double laguerre_covariance(const Generator& g, Index x, Index y, int j, int k);

// Shared by the soup formulas.
MatrixXd symmetrized_kernel(const MatrixXd& v, const VectorXd& chi);
void require_transient(const Generator& g);

}  // namespace loopsoup
