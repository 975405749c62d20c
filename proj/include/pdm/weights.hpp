#pragma once

#include <vector>

#include "pdm/euler.hpp"
#include "pdm/jet.hpp"
#include "pdm/wiener.hpp"

namespace pdm {

/// Gram matrix of the component gradients in H, with determinant and a
/// guarded inverse. `invertible` is false when the determinant falls under
/// the relative floor; such samples are meant to be localized away.
struct CovarianceMatrix {
  int d = 0;
  std::vector<double> sigma;  // d x d
  std::vector<double> gamma;  // d x d, valid when invertible
  double det = 0.0;
  bool invertible = false;
};

CovarianceMatrix covariance(const FunctionalState& F, const TimeGrid& grid,
                            double det_floor_rel = 1e-12);

struct WeightSample {
  double h = 0.0;
  std::vector<int> alpha;
  double localization = 1.0;
};

/// First-order integration-by-parts weight H_i(F, G), assembled as the
/// discrete divergence of gamma^{ij} G DF_j with every derivative carried
/// analytically. Requires the Hessian of F; degenerate samples are accepted
/// only when G vanishes there.
WeightSample ibp_weight_first(const FunctionalState& F, const FunctionalState& G, int i,
                              const IncrementMatrix& dW, const TimeGrid& grid);

/// Same weight from the O(n^2) trajectory contractions (scalar case).
double ibp_weight_from_contractions(const IbpContractions& c, const IncrementMatrix& dW,
                                    const TimeGrid& grid);

/// Iterated weight H_alpha(F, G) for |alpha| <= 2, computed in jet
/// arithmetic so that the inner weight carries its own derivatives.
/// F components need Taylor order |alpha| + 1.
WeightSample ibp_weight_iterated(const JetFunctional& F, const Jet& G,
                                 const std::vector<int>& alpha, const IncrementMatrix& dW,
                                 const TimeGrid& grid);

/// Ornstein-Uhlenbeck generator action LF = -divergence(DF) on one sample.
double ou_apply(const FunctionalState& F, const IncrementMatrix& dW, const TimeGrid& grid);

/// Localization statistic R = |D(F1-F2)|_H^2 (1 + |Sigma_1|_HS^2)^{(d-1)/2}
/// / det Sigma_1; +infinity on degenerate samples.
double localization_R(const FunctionalState& F1, const FunctionalState& F2, const TimeGrid& grid);

/// Smooth cutoff pair: psi falls from 1 to 0 across (1/8, 1/4), psi1 across
/// (1/4, 1/2), so psi1 = 1 wherever psi is positive.
struct CutoffSpec {
  double psi_one_until = 0.125;
  double psi_zero_from = 0.25;
  double psi1_one_until = 0.25;
  double psi1_zero_from = 0.5;
};

enum class CutoffKind { psi, psi1 };

double cutoff(const CutoffSpec& spec, CutoffKind which, double x);

inline double cutoff_psi(double x) { return cutoff(CutoffSpec{}, CutoffKind::psi, x); }
inline double cutoff_psi1(double x) { return cutoff(CutoffSpec{}, CutoffKind::psi1, x); }

}  // namespace pdm
