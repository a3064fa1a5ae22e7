#pragma once

#include <Eigen/Dense>

#include <vector>

namespace rgop {

/// Per-period mean vector and covariance of N asset returns, in decimal units.
/// Construction validates finiteness, symmetry and positive definiteness.
class MarketMoments {
 public:
  MarketMoments(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  Eigen::Index asset_count() const noexcept { return mu_.size(); }

  /// Moments restricted to a subset of assets (0-based indices).
  MarketMoments subset(const std::vector<Eigen::Index>& assets) const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
};

enum class CorrelationKind {
  /// P_{st} = rho_{(t-s) mod T}, requires rho_t = rho_{T-t}.
  CirculantSymmetric,
  /// P_{st} = rho_{|t-s|}, no wrap-around constraint.
  GeneralToeplitz,
};

/// Serial correlation structure over a horizon of T periods.
struct AutocorrelationSpec {
  int horizon = 1;
  Eigen::VectorXd rho;  // rho_0..rho_{T-1}
  CorrelationKind kind = CorrelationKind::CirculantSymmetric;

  /// rho_0 = 1 and rho_t = value for every t >= 1.
  static AutocorrelationSpec constant(int horizon, double value,
                                      CorrelationKind kind = CorrelationKind::CirculantSymmetric);
  static AutocorrelationSpec uncorrelated(int horizon);

  /// The induced T x T matrix P (no validation).
  Eigen::MatrixXd correlation_matrix() const;
};

/// An AutocorrelationSpec that passed validate(). Only validate() creates one.
class ValidatedSpec {
 public:
  const AutocorrelationSpec& spec() const noexcept { return spec_; }
  int horizon() const noexcept { return spec_.horizon; }
  const Eigen::VectorXd& rho() const noexcept { return spec_.rho; }
  CorrelationKind kind() const noexcept { return spec_.kind; }
  Eigen::MatrixXd correlation_matrix() const { return spec_.correlation_matrix(); }
  /// Smallest eigenvalue of P observed during validation.
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  friend ValidatedSpec validate(const AutocorrelationSpec&);
  ValidatedSpec(AutocorrelationSpec spec, double min_eig)
      : spec_(std::move(spec)), min_eigenvalue_(min_eig) {}

  AutocorrelationSpec spec_;
  double min_eigenvalue_;
};

/// Checks rho_0 = 1, circulant symmetry (circulant kind only) and P > 0 with
/// min eigenvalue > 1e-10 * trace(P) / T. Throws RhoZeroNotOne,
/// SymmetryViolation or NotPositiveDefinite.
ValidatedSpec validate(const AutocorrelationSpec& spec);

/// Aggregate autocorrelation rho-bar. Circulant: mean of rho_1..rho_{T-1}.
/// General Toeplitz: 2/(T(T-1)) * sum_t (T-t) rho_t. Throws HorizonTooShort if T < 2.
double aggregate_rho(const AutocorrelationSpec& spec);
double aggregate_rho(const ValidatedSpec& spec);

/// Scale factor 1 + (T-1) rho-bar; throws DegenerateScale when not positive.
double modified_scale(double rho_bar, int horizon);

/// (1 + (T-1) rho-bar) * sigma.
Eigen::MatrixXd modified_covariance(const Eigen::MatrixXd& sigma, double rho_bar, int horizon);

struct Portfolio {
  Eigen::VectorXd weights;
};

/// Moments of the portfolio return eta_t = w^T r_t.
class ProjectedMoments {
 public:
  ProjectedMoments(double mean_return, double variance, ValidatedSpec spec);

  double mean_return() const noexcept { return mean_return_; }
  double variance() const noexcept { return variance_; }
  double stddev() const;
  const ValidatedSpec& spec() const noexcept { return spec_; }
  int horizon() const noexcept { return spec_.horizon(); }

 private:
  double mean_return_;
  double variance_;
  ValidatedSpec spec_;
};

ProjectedMoments project_moments(const MarketMoments& m, const Portfolio& w, const ValidatedSpec& spec);

/// Omega(w): upper-left block var * P + mean^2 * 11^T, border mean * 1, corner 1.
Eigen::MatrixXd build_moment_matrix(const ProjectedMoments& p);

/// Unvalidated sample mean and unbiased sample covariance (K - 1 denominator).
/// Needs K >= 2; throws TooFewObservations or NonFiniteData.
struct SampleMoments {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};
SampleMoments sample_moments(const Eigen::MatrixXd& returns);

/// Sample mean and unbiased sample covariance of a K x N return matrix.
/// Throws TooFewObservations (K < N + 1), NonFiniteData, or NotPositiveDefinite
/// when the sample covariance is singular.
MarketMoments estimate_moments(const Eigen::MatrixXd& returns);

/// True iff min eigenvalue of the symmetric matrix exceeds 1e-10 * trace / n.
bool is_positive_definite(const Eigen::MatrixXd& symmetric, double* min_eigenvalue = nullptr);

}  // namespace rgop
