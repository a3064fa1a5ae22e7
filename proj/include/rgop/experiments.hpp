#pragma once

#include "rgop/conic.hpp"
#include "rgop/growth.hpp"
#include "rgop/market_model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace rgop {

/// Random symmetric circulant spec: rho_k = rho_{T-k} ~ U[-a, a] with a ~ U[0, 1],
/// redrawn until P is positive definite.
AutocorrelationSpec random_circulant_spec(int horizon, std::mt19937_64& rng);

/// Random Toeplitz spec with rho_t ~ U[lo, hi] for t >= 1, redrawn until P is positive definite.
AutocorrelationSpec random_toeplitz_spec(int horizon, double lo, double hi, std::mt19937_64& rng);

struct VerifyInstance {
  int horizon = 0;
  double epsilon = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double rho_bar = 0.0;
  double closed_form = 0.0;
  double sdp = 0.0;
  double socp = 0.0;
  /// Objective change and worst residual after compound-symmetric projection of the SOCP optimizer.
  double projection_objective_shift = 0.0;
  double projection_residual = 0.0;
};

struct VerifyOptions {
  int instances = 10;
  int min_horizon = 2;
  int max_horizon = 10;
  double epsilon_lo = 0.05, epsilon_hi = 0.5;
  double mean_lo = 0.0, mean_hi = 0.3;
  double sd_lo = 0.01, sd_hi = 0.3;
  SolverOptions solver{1e-9, 150};
};

/// Draws feasible random circulant instances (positive margin) and solves each by
/// closed form, SDP and SOCP.
std::vector<VerifyInstance> verify_random_instances(const VerifyOptions& options, std::mt19937_64& rng);

struct ApproxErrorRow {
  int horizon = 0;
  std::vector<double> approx;          // closed form at the Toeplitz rho_bar, per repetition
  std::vector<double> exact;           // SDP values, empty when T exceeds the SDP limit
  std::vector<double> relative_error;  // relative_gap(approx, exact)
  bool exact_available() const noexcept { return !exact.empty(); }
};

struct ApproxErrorOptions {
  std::vector<int> horizons;
  int repetitions = 20;
  double rho_lo = 0.0, rho_hi = 0.2;
  double epsilon = 0.15;
  double mean = 0.15;
  double sd = 0.20;
  ExactGrowthOptions exact;
};

/// Approximation error of the aggregate closed form on random Toeplitz structures.
std::vector<ApproxErrorRow> approx_error_sweep(const ApproxErrorOptions& options, std::mt19937_64& rng);

/// Linear-interpolation quantile of a sample (p in [0, 1]); used for summary tables.
double summary_quantile(std::vector<double> values, double p);

}  // namespace rgop
