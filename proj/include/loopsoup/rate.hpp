#pragma once

#include "loopsoup/chain.hpp"

namespace loopsoup {

/// Lambda(u) = ln E[exp(<u, L_1 on F>)] = -ln det(I - M_u V_F); +inf off its domain.
double log_laplace_limit(const MatrixXd& v_f, const VectorXd& u);

/// Legendre transform sup_u (<u,y> - Lambda(u)) by damped Newton.
double rate_function_numerical(const MatrixXd& v_f, const VectorXd& y);

/// Closed forms for one or two points.
double rate_function_closed_form(const MatrixXd& v_f, const VectorXd& y);

/// Rate function of (1/alpha) L_alpha on the ordered points as alpha grows.
double rate_function(const Generator& g, const StateSet& points, const VectorXd& y);

}  // namespace loopsoup
