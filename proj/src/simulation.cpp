#include "rgop/simulation.hpp"

#include "rgop/errors.hpp"
#include "rgop/growth.hpp"
#include "rgop/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace rgop {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Independent stream for scenario k: a pure function of (seed, k).
std::mt19937_64 scenario_engine(std::uint64_t seed, int k) {
  const auto kk = static_cast<std::uint64_t>(k);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kk), static_cast<std::uint32_t>(kk >> 32), 0x5eedU};
  return std::mt19937_64(seq);
}

MatrixXd lower_cholesky(const MatrixXd& a, const char* what) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, std::string(what) + " has no Cholesky factor");
  }
  return llt.matrixL();
}

void check_weights(const ReturnPaths& paths, const VectorXd& w) {
  if (w.size() != paths.assets()) throw Error(ErrorCode::DimensionMismatch, "portfolio and paths differ in assets");
}

}  // namespace

void SimulationConfig::check() const {
  if (scenarios < 100) throw Error(ErrorCode::InvalidArgument, "simulation needs at least 100 scenarios");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be positive");
  validate(spec);
}

SimulationConfig SimulationConfig::constant_autocorrelation(MarketMoments moments, int horizon, double rho_bar,
                                                            double epsilon, int scenarios, std::uint64_t seed) {
  return {scenarios, seed, epsilon, std::move(moments), AutocorrelationSpec::constant(horizon, rho_bar), 1};
}

ReturnPaths::ReturnPaths(int scenarios, int horizon, int assets)
    : scenarios_(scenarios), horizon_(horizon), assets_(assets) {
  if (scenarios < 1 || horizon < 1 || assets < 1) {
    throw Error(ErrorCode::InvalidArgument, "path tensor dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(scenarios) * horizon * assets, 0.0);
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ReturnPaths::scenario(
    int k) const {
  return {data_.data() + index(k, 0, 0), horizon_, assets_};
}

Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ReturnPaths::scenario(int k) {
  return {data_.data() + index(k, 0, 0), horizon_, assets_};
}

ReturnPaths sample_paths(const SimulationConfig& cfg) {
  cfg.check();
  const int t_len = cfg.horizon();
  const int n = static_cast<int>(cfg.moments.asset_count());
  const MatrixXd l_time = lower_cholesky(cfg.spec.correlation_matrix(), "autocorrelation matrix P");
  const MatrixXd l_assets = lower_cholesky(cfg.moments.sigma(), "covariance Sigma");
  const Eigen::RowVectorXd mu = cfg.moments.mu().transpose();

  ReturnPaths paths(cfg.scenarios, t_len, n);
  auto work = [&](int begin, int end) {
    MatrixXd z(t_len, n);
    for (int k = begin; k < end; ++k) {
      auto engine = scenario_engine(cfg.seed, k);
      std::normal_distribution<double> normal(0.0, 1.0);
      // fill row by row so the stream order is (t, n)
      for (int t = 0; t < t_len; ++t)
        for (int j = 0; j < n; ++j) z(t, j) = normal(engine);
      paths.scenario(k) = (l_time * z * l_assets.transpose()).rowwise() + mu;
    }
  };
  const int workers = std::min(cfg.threads, cfg.scenarios);
  if (workers == 1) {
    work(0, cfg.scenarios);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.scenarios + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(cfg.scenarios, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return paths;
}

MatrixXd portfolio_returns(const ReturnPaths& paths, const VectorXd& weights) {
  check_weights(paths, weights);
  MatrixXd eta(paths.scenarios(), paths.horizon());
  for (int k = 0; k < paths.scenarios(); ++k) eta.row(k) = (paths.scenario(k) * weights).transpose();
  return eta;
}

std::vector<double> growth_samples(const ReturnPaths& paths, const VectorXd& weights) {
  const MatrixXd eta = portfolio_returns(paths, weights);
  std::vector<double> g(static_cast<std::size_t>(paths.scenarios()));
  for (int k = 0; k < paths.scenarios(); ++k) {
    const auto row = eta.row(k).array();
    g[static_cast<std::size_t>(k)] = (row - 0.5 * row.square()).sum() / paths.horizon();
  }
  return g;
}

double empirical_quantile(std::vector<double> values, double epsilon) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  const double k = static_cast<double>(values.size());
  const double pos = epsilon * k;
  // eps K within rounding of an integer counts as that integer
  const double nearest = std::round(pos);
  const double rank = std::abs(pos - nearest) <= 1e-9 * std::max(1.0, pos) ? nearest : std::ceil(pos);
  const auto r = static_cast<std::size_t>(std::clamp(rank, 1.0, k));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(r - 1), values.end());
  return values[r - 1];
}

double actual_growth_rate(const ReturnPaths& paths, const Portfolio& w, double epsilon) {
  return empirical_quantile(growth_samples(paths, w.weights), epsilon);
}

std::vector<double> realized_sharpe(const ReturnPaths& paths, const Portfolio& w) {
  if (paths.horizon() < 2) throw Error(ErrorCode::InvalidArgument, "Sharpe ratio needs T >= 2");
  const MatrixXd eta = portfolio_returns(paths, w.weights);
  std::vector<double> out(static_cast<std::size_t>(paths.scenarios()));
  for (int k = 0; k < paths.scenarios(); ++k) {
    const double mean = eta.row(k).mean();
    const double sd = std::sqrt((eta.row(k).array() - mean).square().sum() / (paths.horizon() - 1));
    if (sd == 0.0 || sd <= 1e-12 * std::abs(mean)) {
      throw Error(ErrorCode::ZeroVariancePath, "scenario " + std::to_string(k) + " has constant portfolio returns");
    }
    out[static_cast<std::size_t>(k)] = mean / sd;
  }
  return out;
}

double compare_strategies(const ReturnPaths& paths, const Portfolio& w_c, const Portfolio& w_u, double epsilon) {
  return relative_gap(actual_growth_rate(paths, w_c, epsilon), actual_growth_rate(paths, w_u, epsilon));
}

OutperformanceRun autocorrelation_outperformance(const MarketMoments& m, int horizon, double rho_bar, double epsilon,
                                                 int scenarios, std::uint64_t seed, int threads) {
  const GrowthQuery q{epsilon, horizon};
  const auto set = PortfolioConstraintSet::simplex(m.asset_count());
  OutperformanceRun run;
  run.horizon = horizon;
  run.rho_bar = rho_bar;
  run.aware = robust_growth_portfolio(m, rho_bar, q, set).portfolio;
  run.unaware = robust_growth_portfolio(m, 0.0, q, set).portfolio;

  auto cfg = SimulationConfig::constant_autocorrelation(m, horizon, rho_bar, epsilon, scenarios, seed);
  cfg.threads = threads;
  const ReturnPaths paths = sample_paths(cfg);
  run.growth_aware = actual_growth_rate(paths, run.aware, epsilon);
  run.growth_unaware = actual_growth_rate(paths, run.unaware, epsilon);
  run.outperformance = relative_gap(run.growth_aware, run.growth_unaware);
  run.sharpe_aware = realized_sharpe(paths, run.aware);
  run.sharpe_unaware = realized_sharpe(paths, run.unaware);
  return run;
}

}  // namespace rgop
