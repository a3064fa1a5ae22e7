#pragma once

#include "rgop/growth.hpp"
#include "rgop/market_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rgop {

enum class Relation { LessEqual, GreaterEqual, Equal };

/// coefficients . x  (relation)  bound
struct LinearConstraint {
  Eigen::VectorXd coefficients;
  Relation relation = Relation::LessEqual;
  double bound = 0.0;
  std::string label;
};

enum class ConeKind {
  /// u_0 >= ||u_{1:}||
  Plain,
  /// u_0 * u_1 >= ||u_{2:}||^2, u_0 >= 0, u_1 >= 0
  Rotated,
};

/// Membership of the affine vector u = coefficients * x + offset in a cone.
struct SocConstraint {
  ConeKind kind = ConeKind::Plain;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd offset;
  std::string label;
};

/// value * x[variable] added at (row, col) and, off the diagonal, at (col, row).
struct PsdTerm {
  int variable = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// constant + sum of terms must be positive semidefinite.
struct PsdConstraint {
  int dim = 0;
  Eigen::MatrixXd constant;
  std::vector<PsdTerm> terms;
  std::string label;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

/// Maximize objective . x over the intersection of the listed constraints.
struct ConicProblem {
  int variable_count = 0;
  Eigen::VectorXd objective;
  std::vector<std::string> variable_names;
  std::vector<LinearConstraint> linear_constraints;
  std::vector<SocConstraint> soc_constraints;
  std::vector<PsdConstraint> psd_constraints;

  /// Throws InvalidArgument on out-of-range references or size mismatches.
  void check() const;
  std::size_t constraint_count() const {
    return linear_constraints.size() + soc_constraints.size() + psd_constraints.size();
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
std::string to_string(SolveStatus status);

struct IterationRecord {
  int iteration = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double step = 0.0;
};

struct ConicSolution {
  Eigen::VectorXd variables;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Largest constraint violation at `variables`, recomputed from the problem data.
  double max_residual = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace;

  /// Multipliers of the cone constraints in solver order; kept for diagnostics.
  Eigen::VectorXd dual_cone;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 100;
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding,
/// Nesterov-Todd scaling over nonnegative x second-order x PSD cones.
ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {});

struct ResidualEntry {
  std::string label;
  std::string kind;  // "linear", "soc", "psd"
  double violation = 0.0;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double max_violation = 0.0;
  double objective_value = 0.0;
  bool feasible(double tol) const { return max_violation <= tol; }
};

/// Recomputes every constraint at x directly from the problem data. PSD
/// violations are the negated minimum eigenvalue when negative.
ResidualReport check_certificate(const Eigen::VectorXd& x, const ConicProblem& problem);
ResidualReport check_certificate(const ConicSolution& solution, const ConicProblem& problem);

/// JSON description of the problem (schema documented in README).
std::string to_json(const ConicProblem& problem);

// ---------------------------------------------------------------------------
// Worst-case growth rate as a conic program.

/// Variable layout of build_sdp: lower triangle of M (column-major), beta, gamma.
struct SdpLayout {
  int horizon = 0;
  int beta = 0;
  int gamma = 0;
  int m_index(int i, int j) const;  // i, j in [0, T]
  int m_count() const { return (horizon + 1) * (horizon + 2) / 2; }
};

/// max gamma s.t. beta + <Omega, M>/eps <= 0, M >= 0,
/// M - [[I/2, -1/2], [-1/2^T, gamma T - beta]] >= 0.
ConicProblem build_sdp(const Eigen::MatrixXd& omega, const GrowthQuery& q);
SdpLayout sdp_layout(int horizon);

/// Variable layout of build_socp: m_0..m_{T+1}, beta, gamma.
struct SocpLayout {
  int horizon = 0;
  int m(int t) const { return t; }
  int beta() const { return horizon + 2; }
  int gamma() const { return horizon + 3; }
  int count() const { return horizon + 4; }
};

/// Circulant reduction of the SDP: linear constraints, two hyperbolic
/// constraints as rotated cones, cosine inequalities and the moment inequality.
/// Throws NotCirculant for general Toeplitz specs.
ConicProblem build_socp(const ProjectedMoments& p, const GrowthQuery& q);

/// Replace m_0..m_{T-1} of an SOCP point by the compound-symmetric point with
/// the same sum (m_0 - 1/2 = m_1 = ... = m_{T-1}); m_T, m_{T+1}, beta, gamma kept.
Eigen::VectorXd compound_symmetric_projection(const Eigen::VectorXd& socp_point, int horizon);

struct ExactGrowthOptions {
  int max_sdp_horizon = 16;
  SolverOptions solver;
};

/// Worst-case growth rate from the SDP for any valid spec (circulant or Toeplitz).
/// Throws HorizonTooLargeForSDP for T > max_sdp_horizon and NumericalFailure if
/// the solver does not reach an optimal certificate.
double exact_growth_rate(const ProjectedMoments& p, const GrowthQuery& q,
                         const ExactGrowthOptions& options = {});
double exact_growth_rate(const MarketMoments& m, const Portfolio& w, const ValidatedSpec& spec,
                         const GrowthQuery& q, const ExactGrowthOptions& options = {});

/// Worst-case growth rate from the SOCP reduction (circulant specs only).
double socp_growth_rate(const ProjectedMoments& p, const GrowthQuery& q,
                        const SolverOptions& options = {});

}  // namespace rgop
