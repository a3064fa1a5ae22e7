#pragma once

#include "rgop/market_model.hpp"

namespace rgop {

/// Violation probability epsilon of the growth chance constraint and horizon T.
struct GrowthQuery {
  double epsilon = 0.1;
  int horizon = 1;

  void check() const;
};

struct GrowthResult {
  double growth_rate = 0.0;         // per period, decimal
  double feasibility_margin = 0.0;  // must be positive for the closed form to apply
  double persistent_risk = 0.0;     // var / (2 eps), independent of autocorrelation
  double compounding_risk = 0.0;    // -growth_rate - persistent_risk
  double rho_bar_used = 0.0;
};

/// (1 - mean) - sqrt((1 + (T-1) rho_bar) eps / ((1 - eps) T)) * sd.
double feasibility_margin(const ProjectedMoments& p, double rho_bar, const GrowthQuery& q);

/// Closed-form worst-case growth rate under a circulant autocorrelation
/// structure summarized by rho_bar. Throws PreconditionViolated when the
/// feasibility margin is not positive. The persistent/compounding split is
/// computed from the modified covariance and reconciled against -G.
GrowthResult worst_case_growth_rate(const ProjectedMoments& p, double rho_bar, const GrowthQuery& q);

/// Scalar form on portfolio mean and variance; used where no spec is at hand.
GrowthResult worst_case_growth_rate(double mean, double variance, double rho_bar, const GrowthQuery& q);
double feasibility_margin(double mean, double variance, double rho_bar, const GrowthQuery& q);

/// Same, with rho_bar aggregated from the autocorrelation carried by p (rho_bar = 0 when T = 1).
GrowthResult worst_case_growth_rate(const ProjectedMoments& p, const GrowthQuery& q);

/// Closed form evaluated at the Toeplitz aggregate rho_bar; a lower bound on
/// the exact worst-case growth rate for a general Toeplitz structure.
GrowthResult approx_growth_rate_general(const ProjectedMoments& p, const GrowthQuery& q);

/// 2 (a - b) / (|a| + |b|). Throws BothZero.
double relative_gap(double a, double b);

/// Coefficients of the two-term norm form G = (1 - ||(1 - mean + a sd, b sd)||^2) / 2.
struct GrowthNormCoefficients {
  double a = 0.0;
  double b = 0.0;
};
GrowthNormCoefficients growth_norm_coefficients(double rho_bar, const GrowthQuery& q);

}  // namespace rgop
