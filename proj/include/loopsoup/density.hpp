#pragma once

#include "loopsoup/chain.hpp"

namespace loopsoup {

struct DensityResult {
  double value = 0.0;
  double remainder = 0.0;  // absolute size of the outermost shell kept
};

/// Joint density of (L^x_1..L^x_n) for the soup at intensity alpha, evaluated at rho.
/// Throws TruncationTooSmall when remainder > tolerance (tolerance <= 0 disables the check).
DensityResult occupation_density(const Generator& g, const StateSet& f, double alpha, const VectorXd& rho,
                                 int m_max, double tolerance = 0.0);

// The two series behind occupation_density, exposed for cross-checks.
DensityResult density_balanced_series(const MatrixXd& l_f, const VectorXd& rho, int m_max);
DensityResult density_coefficient_series(const MatrixXd& v_f, double alpha, const VectorXd& rho, int m_max);

/// Taylor coefficients of det(M_s + V)^{-alpha} for multi-indices bounded by m_max, row-major by index.
VectorXd power_series_det_coefficients(const MatrixXd& v, double alpha, int m_max);

}  // namespace loopsoup
