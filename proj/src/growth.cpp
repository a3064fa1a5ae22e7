#include "rgop/growth.hpp"

#include "rgop/errors.hpp"

#include <cmath>
#include <sstream>

namespace rgop {
namespace {

constexpr double kDecompositionTol = 1e-8;

void check_horizon(const ProjectedMoments& p, const GrowthQuery& q) {
  if (p.horizon() != q.horizon) {
    throw Error(ErrorCode::DimensionMismatch, "query horizon differs from autocorrelation horizon");
  }
}

}  // namespace

void GrowthQuery::check() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  }
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
}

GrowthNormCoefficients growth_norm_coefficients(double rho_bar, const GrowthQuery& q) {
  q.check();
  const double scale = modified_scale(rho_bar, q.horizon);
  const double t = q.horizon;
  const double excess = (t - 1.0) * (1.0 - rho_bar);
  if (excess < 0.0) throw Error(ErrorCode::InvalidArgument, "rho_bar must not exceed 1");
  return {std::sqrt((1.0 - q.epsilon) * scale / (q.epsilon * t)), std::sqrt(excess / (q.epsilon * t))};
}

double feasibility_margin(double mean, double variance, double rho_bar, const GrowthQuery& q) {
  q.check();
  const double scale = modified_scale(rho_bar, q.horizon);
  return (1.0 - mean) -
         std::sqrt(scale * q.epsilon / ((1.0 - q.epsilon) * q.horizon)) * std::sqrt(variance);
}

double feasibility_margin(const ProjectedMoments& p, double rho_bar, const GrowthQuery& q) {
  check_horizon(p, q);
  return feasibility_margin(p.mean_return(), p.variance(), rho_bar, q);
}

GrowthResult worst_case_growth_rate(double mean, double variance, double rho_bar, const GrowthQuery& q) {
  if (!(variance > 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be positive");
  const double margin = feasibility_margin(mean, variance, rho_bar, q);
  if (!(margin > 0.0)) {
    std::ostringstream os;
    os << "feasibility margin " << margin << " is not positive";
    throw Error(ErrorCode::PreconditionViolated, os.str());
  }
  const double eps = q.epsilon;
  const double t = q.horizon;
  const double sd = std::sqrt(variance);
  const double scale = modified_scale(rho_bar, q.horizon);

  const double lead = 1.0 - mean + std::sqrt((1.0 - eps) * scale / (eps * t)) * sd;
  const double tail = (t - 1.0 - (t - 1.0) * rho_bar) / (eps * t) * variance;
  const double growth = 0.5 * (1.0 - lead * lead - tail);

  // Second path: persistent risk plus compounding risk under the modified covariance.
  const double modified_variance = modified_covariance(Eigen::MatrixXd::Constant(1, 1, variance),
                                                       rho_bar, q.horizon)(0, 0);
  const double persistent = variance / (2.0 * eps);
  const double inner = 1.0 - mean + std::sqrt((1.0 - eps) / (eps * t)) * std::sqrt(modified_variance);
  const double compounding = -0.5 * (1.0 - inner * inner + modified_variance / (eps * t));

  if (std::abs(persistent + compounding + growth) > kDecompositionTol) {
    std::ostringstream os;
    os << "risk decomposition " << persistent + compounding << " does not reconcile with -G = "
       << -growth;
    throw Error(ErrorCode::InternalConsistency, os.str());
  }
  return {growth, margin, persistent, compounding, rho_bar};
}

GrowthResult worst_case_growth_rate(const ProjectedMoments& p, double rho_bar, const GrowthQuery& q) {
  check_horizon(p, q);
  return worst_case_growth_rate(p.mean_return(), p.variance(), rho_bar, q);
}

GrowthResult worst_case_growth_rate(const ProjectedMoments& p, const GrowthQuery& q) {
  const double rho_bar = p.horizon() >= 2 ? aggregate_rho(p.spec()) : 0.0;
  return worst_case_growth_rate(p, rho_bar, q);
}

GrowthResult approx_growth_rate_general(const ProjectedMoments& p, const GrowthQuery& q) {
  if (p.spec().kind() != CorrelationKind::GeneralToeplitz) {
    throw Error(ErrorCode::InvalidArgument, "approximation applies to general Toeplitz specs");
  }
  return worst_case_growth_rate(p, q);
}

double relative_gap(double a, double b) {
  const double denom = std::abs(a) + std::abs(b);
  if (!(denom > 0.0)) throw Error(ErrorCode::BothZero, "relative gap of two zeros is undefined");
  return 2.0 * (a - b) / denom;
}

}  // namespace rgop
