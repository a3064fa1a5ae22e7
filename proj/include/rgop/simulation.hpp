#pragma once

#include "rgop/market_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rgop {

struct SimulationConfig {
  int scenarios = 10000;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  MarketMoments moments;
  AutocorrelationSpec spec;
  /// Worker threads for sampling; results do not depend on this.
  int threads = 1;

  int horizon() const noexcept { return spec.horizon; }

  /// Throws InvalidArgument (K < 100, epsilon outside (0, 1), threads < 1) or the
  /// validation errors of the autocorrelation spec.
  void check() const;

  /// rho_t = rho_bar for every lag t >= 1.
  static SimulationConfig constant_autocorrelation(MarketMoments moments, int horizon, double rho_bar,
                                                   double epsilon, int scenarios, std::uint64_t seed);
};

/// K x T x N decimal returns, scenario-major.
class ReturnPaths {
 public:
  ReturnPaths(int scenarios, int horizon, int assets);

  int scenarios() const noexcept { return scenarios_; }
  int horizon() const noexcept { return horizon_; }
  int assets() const noexcept { return assets_; }

  double operator()(int k, int t, int n) const { return data_[index(k, t, n)]; }
  double& operator()(int k, int t, int n) { return data_[index(k, t, n)]; }

  /// T x N block of scenario k (row t is r_t).
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> scenario(int k) const;
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> scenario(int k);

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t index(int k, int t, int n) const {
    return (static_cast<std::size_t>(k) * horizon_ + t) * assets_ + n;
  }
  int scenarios_;
  int horizon_;
  int assets_;
  std::vector<double> data_;
};

/// K draws from N(1_T (x) mu, P (x) Sigma), each formed as 1 mu^T + L_P Z L_Sigma^T with Z
/// a T x N standard normal block. Scenario k uses its own generator seeded from (seed, k).
ReturnPaths sample_paths(const SimulationConfig& cfg);

/// Portfolio returns eta_t = w^T r_t, K x T.
Eigen::MatrixXd portfolio_returns(const ReturnPaths& paths, const Eigen::VectorXd& weights);

/// Per-scenario (1/T) sum_t (eta_t - eta_t^2 / 2).
std::vector<double> growth_samples(const ReturnPaths& paths, const Eigen::VectorXd& weights);

/// The ceil(epsilon K)-th smallest value (1-based) of the sample.
double empirical_quantile(std::vector<double> values, double epsilon);

/// Empirical epsilon-quantile of the per-scenario growth.
double actual_growth_rate(const ReturnPaths& paths, const Portfolio& w, double epsilon);

/// Per-scenario mean / unbiased standard deviation of eta. Throws ZeroVariancePath.
std::vector<double> realized_sharpe(const ReturnPaths& paths, const Portfolio& w);

/// relative_gap of the actual growth rates of w_c and w_u on the same paths.
double compare_strategies(const ReturnPaths& paths, const Portfolio& w_c, const Portfolio& w_u, double epsilon);

struct OutperformanceRun {
  int horizon = 0;
  double rho_bar = 0.0;
  Portfolio aware;      // optimized with rho_bar
  Portfolio unaware;    // optimized with rho_bar = 0
  double growth_aware = 0.0;
  double growth_unaware = 0.0;
  double outperformance = 0.0;
  std::vector<double> sharpe_aware;
  std::vector<double> sharpe_unaware;
};

/// Optimizes both portfolios over the simplex, samples paths under constant
/// autocorrelation rho_bar and compares them on common random numbers.
OutperformanceRun autocorrelation_outperformance(const MarketMoments& m, int horizon, double rho_bar, double epsilon,
                                                 int scenarios, std::uint64_t seed, int threads = 1);

}  // namespace rgop
