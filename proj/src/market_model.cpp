#include "rgop/market_model.hpp"

#include "rgop/circulant.hpp"
#include "rgop/errors.hpp"

#include <cmath>
#include <sstream>

namespace rgop {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

bool is_positive_definite(const Eigen::MatrixXd& symmetric, double* min_eigenvalue) {
  const double lo = min_symmetric_eigenvalue(symmetric);
  if (min_eigenvalue != nullptr) *min_eigenvalue = lo;
  const double threshold = kPsdTol * symmetric.trace() / static_cast<double>(symmetric.rows());
  return lo > threshold && lo > 0.0;
}

MarketMoments::MarketMoments(Eigen::VectorXd mu, Eigen::MatrixXd sigma)
    : mu_(std::move(mu)), sigma_(std::move(sigma)) {
  const Eigen::Index n = mu_.size();
  if (n < 1 || sigma_.rows() != n || sigma_.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "mu must have length N and sigma must be N x N");
  }
  if (!mu_.allFinite() || !sigma_.allFinite()) {
    throw Error(ErrorCode::NonFiniteData, "market moments contain non-finite values");
  }
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw Error(ErrorCode::NotSymmetric, "covariance matrix is not symmetric");
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
  double lo = 0.0;
  if (!is_positive_definite(sigma_, &lo)) {
    std::ostringstream os;
    os << "covariance matrix is not positive definite (min eigenvalue " << lo << ")";
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
}

MarketMoments MarketMoments::subset(const std::vector<Eigen::Index>& assets) const {
  const auto k = static_cast<Eigen::Index>(assets.size());
  Eigen::VectorXd mu(k);
  Eigen::MatrixXd sigma(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (assets[i] < 0 || assets[i] >= asset_count()) {
      throw Error(ErrorCode::DimensionMismatch, "asset index out of range");
    }
    mu[i] = mu_[assets[i]];
    for (Eigen::Index j = 0; j < k; ++j) sigma(i, j) = sigma_(assets[i], assets[j]);
  }
  return {std::move(mu), std::move(sigma)};
}

AutocorrelationSpec AutocorrelationSpec::constant(int horizon, double value, CorrelationKind kind) {
  AutocorrelationSpec spec;
  spec.horizon = horizon;
  spec.kind = kind;
  spec.rho = Eigen::VectorXd::Constant(std::max(horizon, 1), value);
  spec.rho[0] = 1.0;
  return spec;
}

AutocorrelationSpec AutocorrelationSpec::uncorrelated(int horizon) {
  return constant(horizon, 0.0);
}

Eigen::MatrixXd AutocorrelationSpec::correlation_matrix() const {
  const Eigen::Index n = horizon;
  if (rho.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "rho must have exactly T entries");
  }
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < n; ++t) {
      p(s, t) = kind == CorrelationKind::CirculantSymmetric ? rho[((t - s) % n + n) % n]
                                                            : rho[std::abs(t - s)];
    }
  }
  return p;
}

ValidatedSpec validate(const AutocorrelationSpec& spec) {
  if (spec.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
  if (spec.rho.size() != spec.horizon) {
    throw Error(ErrorCode::DimensionMismatch, "rho must have exactly T entries");
  }
  if (!spec.rho.allFinite()) throw Error(ErrorCode::NonFiniteData, "rho contains non-finite values");
  if (spec.rho[0] != 1.0) throw Error(ErrorCode::RhoZeroNotOne, "rho_0 must equal 1");

  const int n = spec.horizon;
  double lo = 0.0;
  if (spec.kind == CorrelationKind::CirculantSymmetric) {
    for (int t = 1; t < n; ++t) {
      if (std::abs(spec.rho[t] - spec.rho[n - t]) > kSymmetryTol) {
        std::ostringstream os;
        os << "rho_" << t << " = " << spec.rho[t] << " differs from rho_" << n - t << " = "
           << spec.rho[n - t];
        throw Error(ErrorCode::SymmetryViolation, os.str());
      }
    }
    lo = eigenvalues_symmetric(CirculantVector(spec.rho)).minCoeff();
  } else {
    lo = min_symmetric_eigenvalue(spec.correlation_matrix());
  }
  // trace(P) = T, so the scale-free threshold is just kPsdTol.
  if (!(lo > kPsdTol)) {
    std::ostringstream os;
    os << "autocorrelation matrix is not positive definite (min eigenvalue " << lo << ")";
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
  return ValidatedSpec(spec, lo);
}

double aggregate_rho(const AutocorrelationSpec& spec) {
  const int n = spec.horizon;
  if (n < 2) throw Error(ErrorCode::HorizonTooShort, "aggregate autocorrelation needs T >= 2");
  if (spec.rho.size() != n) throw Error(ErrorCode::DimensionMismatch, "rho must have T entries");
  double acc = 0.0;
  if (spec.kind == CorrelationKind::CirculantSymmetric) {
    for (int t = 1; t < n; ++t) acc += spec.rho[t];
    return acc / (n - 1);
  }
  for (int t = 1; t < n; ++t) acc += static_cast<double>(n - t) * spec.rho[t];
  return 2.0 * acc / (static_cast<double>(n) * (n - 1));
}

double aggregate_rho(const ValidatedSpec& spec) { return aggregate_rho(spec.spec()); }

double modified_scale(double rho_bar, int horizon) {
  const double scale = 1.0 + (horizon - 1) * rho_bar;
  if (!(scale > 0.0)) {
    std::ostringstream os;
    os << "1 + (T-1) rho_bar = " << scale << " must be positive";
    throw Error(ErrorCode::DegenerateScale, os.str());
  }
  return scale;
}

Eigen::MatrixXd modified_covariance(const Eigen::MatrixXd& sigma, double rho_bar, int horizon) {
  return modified_scale(rho_bar, horizon) * sigma;
}

ProjectedMoments::ProjectedMoments(double mean_return, double variance, ValidatedSpec spec)
    : mean_return_(mean_return), variance_(variance), spec_(std::move(spec)) {
  if (!std::isfinite(mean_return_) || !std::isfinite(variance_)) {
    throw Error(ErrorCode::NonFiniteData, "projected moments must be finite");
  }
  if (!(variance_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "projected variance must be positive");
  }
}

double ProjectedMoments::stddev() const { return std::sqrt(variance_); }

ProjectedMoments project_moments(const MarketMoments& m, const Portfolio& w, const ValidatedSpec& spec) {
  if (w.weights.size() != m.asset_count()) {
    throw Error(ErrorCode::DimensionMismatch, "portfolio length differs from asset count");
  }
  if (!w.weights.allFinite()) throw Error(ErrorCode::NonFiniteData, "portfolio weights must be finite");
  return {w.weights.dot(m.mu()), w.weights.dot(m.sigma() * w.weights), spec};
}

Eigen::MatrixXd build_moment_matrix(const ProjectedMoments& p) {
  const Eigen::Index n = p.horizon();
  const double mean = p.mean_return();
  Eigen::MatrixXd omega(n + 1, n + 1);
  omega.topLeftCorner(n, n) =
      p.variance() * p.spec().correlation_matrix() + Eigen::MatrixXd::Constant(n, n, mean * mean);
  omega.col(n).head(n).setConstant(mean);
  omega.row(n).head(n).setConstant(mean);
  omega(n, n) = 1.0;
  return omega;
}

SampleMoments sample_moments(const Eigen::MatrixXd& returns) {
  const Eigen::Index k = returns.rows();
  if (returns.cols() < 1 || k < 2) {
    std::ostringstream os;
    os << "need at least two observations, got " << k;
    throw Error(ErrorCode::TooFewObservations, os.str());
  }
  if (!returns.allFinite()) throw Error(ErrorCode::NonFiniteData, "returns contain non-finite values");
  const Eigen::RowVectorXd mean = returns.colwise().mean();
  const Eigen::MatrixXd centered = returns.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(k - 1);
  return {mean.transpose(), 0.5 * (cov + cov.transpose())};
}

MarketMoments estimate_moments(const Eigen::MatrixXd& returns) {
  const Eigen::Index k = returns.rows();
  const Eigen::Index n = returns.cols();
  if (n < 1 || k < n + 1) {
    std::ostringstream os;
    os << "need at least N+1 = " << n + 1 << " observations, got " << k;
    throw Error(ErrorCode::TooFewObservations, os.str());
  }
  auto sample = sample_moments(returns);
  return {std::move(sample.mu), std::move(sample.sigma)};
}

}  // namespace rgop
