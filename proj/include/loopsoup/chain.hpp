#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopsoup/linalg.hpp"

namespace loopsoup {

struct Tolerances {
  double structural = 1e-12;  // sign and row-sum checks on raw rates
  double identity = 1e-10;
  double cross = 1e-9;
  double transient_gap = 1e-10;
};

// Validated sub-Markovian generator: L, killing, embedded chain Q.
class Generator {
 public:
  static Generator validate(const MatrixXd& raw, std::vector<std::string> labels = {},
                            const Tolerances& tol = {});

  Index size() const { return L_.rows(); }
  const MatrixXd& L() const { return L_; }
  const VectorXd& killing() const { return killing_; }
  const MatrixXd& Q() const { return Q_; }
  VectorXd holding_rates() const { return -L_.diagonal(); }
  bool transient() const { return transient_; }
  double jump_radius() const { return rho_Q_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Index index_of(const std::string& label) const;

 private:
  MatrixXd L_, Q_;
  VectorXd killing_;
  std::vector<std::string> labels_;
  double rho_Q_ = 0.0;
  bool transient_ = false;
};

/// Embedded jump matrix of an arbitrary rate matrix; rows with zero holding rate become identity rows.
MatrixXd embedded_chain(const MatrixXd& rates);

struct Potential {
  MatrixXd V;
  VectorXd chi;
};

/// V = (M_chi - L)^{-1}; chi defaults to zero.
Potential potential(const Generator& g, const VectorXd& chi = VectorXd());

/// P_t = exp(tL).
MatrixXd semigroup(const Generator& g, double t);

struct HittingData {
  StateSet subset;
  MatrixXd H;      // rows over S, columns over subset
  MatrixXd R;      // first return over subset x subset
  MatrixXd RChi;   // same, for L - M_chi
  VectorXd defect; // probability of never reaching the subset, per state
};

HittingData hitting_return(const Generator& g, const StateSet& a, const VectorXd& chi = VectorXd());

Generator trace_generator(const Generator& g, const StateSet& a, const Tolerances& tol = {});
Generator restrict_generator(const Generator& g, const StateSet& a);
Generator time_change_generator(const Generator& g, const VectorXd& lambda);

/// True when -L h >= 0 entrywise (within the structural tolerance scaled by |L||h|).
bool is_excessive(const Generator& g, const VectorXd& h);
/// L^h = M_h^{-1} L M_h. Throws RowSumPositive through validation when h is not excessive.
Generator doob_transform(const Generator& g, const VectorXd& h);

double excursion_laplace(const Generator& g, const StateSet& f, const VectorXd& chi, Index x, Index y);

/// Generator on the listed states with the given labels subset.
std::vector<std::string> select_labels(const Generator& g, const StateSet& a);

}  // namespace loopsoup
