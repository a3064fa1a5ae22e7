#pragma once

#include "rgop/conic.hpp"
#include "rgop/growth.hpp"
#include "rgop/market_model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rgop {

/// coefficients . w <= bound
struct LinearInequality {
  Eigen::VectorXd coefficients;
  double bound = 0.0;
};

/// Polyhedral set W = {w : lower <= w <= upper, sum w = 1, extra rows hold}.
class PortfolioConstraintSet {
 public:
  PortfolioConstraintSet(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<LinearInequality> extra = {});

  /// Long-only, fully invested: the probability simplex.
  static PortfolioConstraintSet simplex(Eigen::Index assets);

  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }
  const std::vector<LinearInequality>& extra() const noexcept { return extra_; }
  Eigen::Index asset_count() const noexcept { return lower_.size(); }

  /// True when no extra rows are present, so W is a box intersected with the budget plane.
  bool box_only() const noexcept { return extra_.empty(); }
  bool is_simplex() const;

  /// Largest violation of any constraint at w (0 when w is in W).
  double violation(const Eigen::VectorXd& w) const;

  /// Euclidean projection onto the box-and-budget part of W.
  Eigen::VectorXd project_box_budget(const Eigen::VectorXd& w) const;

  /// Appends the rows of W to a conic problem whose first asset_count() variables are w.
  void append_to(ConicProblem& prob) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<LinearInequality> extra_;
};

enum class OptimizerMethod { Auto, Conic, ProjectedGradient };

struct OptimizerOptions {
  OptimizerMethod method = OptimizerMethod::Auto;
  SolverOptions solver{1e-9, 150};
  int gradient_iterations = 50000;
  double gradient_tol = 1e-13;
  /// Vertex enumeration for the precondition is skipped above this many vertices.
  long max_certified_vertices = 1L << 16;
};

struct RgopResult {
  Portfolio portfolio;
  GrowthResult growth;
  /// True when the feasibility margin was verified positive on every vertex of W.
  bool precondition_certified = false;
  /// Smallest margin found over the enumerated vertices (or at the solution when not enumerated).
  double worst_vertex_margin = 0.0;
  std::string method;
};

/// Maximizes the closed-form worst-case growth rate over W through the cone program
///   min t  s.t.  ||(1 - mu^T w + a v, b v)|| <= t,  ||L^T w|| <= v,  w in W,
/// with Sigma = L L^T and (a, b) from growth_norm_coefficients. Throws
/// PreconditionViolated when the margin fails at the solution, InfeasibleConstraints
/// when W is empty and ConvergenceFailure when no method reaches an optimum.
RgopResult robust_growth_portfolio(const MarketMoments& m, double rho_bar, const GrowthQuery& q, const PortfolioConstraintSet& w,
                const OptimizerOptions& options = {});

/// Closed-form growth at w under rho_bar (scalar path, no spec needed).
GrowthResult portfolio_growth(const MarketMoments& m, const Portfolio& w, double rho_bar, const GrowthQuery& q);

struct FrontierPoint {
  Portfolio portfolio;
  double expected_return = 0.0;
  double variance = 0.0;
  double growth_rate = 0.0;  // filled by annotate_growth
};

struct FrontierOptions {
  SolverOptions solver{1e-10, 150};
};

/// Minimum-variance portfolio over W.
Portfolio min_variance_portfolio(const MarketMoments& m, const PortfolioConstraintSet& w,
                                 const FrontierOptions& options = {});

/// min w^T Sigma w s.t. mu^T w = r, w in W, for `points` targets spaced evenly from the
/// minimum-variance return to the largest attainable return.
std::vector<FrontierPoint> efficient_frontier(const MarketMoments& m, const PortfolioConstraintSet& w, int points,
                                              const FrontierOptions& options = {});

/// Copies the frontier with growth_rate set from the closed form. Throws
/// PreconditionViolated naming the first offending point.
std::vector<FrontierPoint> annotate_growth(const std::vector<FrontierPoint>& frontier, double rho_bar,
                                           const GrowthQuery& q);

}  // namespace rgop
