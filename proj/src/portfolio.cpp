#include "rgop/portfolio.hpp"

#include "rgop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rgop {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kBudgetTol = 1e-9;

void check_assets(const MarketMoments& m, const PortfolioConstraintSet& w) {
  if (m.asset_count() != w.asset_count()) {
    throw Error(ErrorCode::DimensionMismatch, "constraint set and moments disagree on the number of assets");
  }
}

MatrixXd cholesky_factor(const MatrixXd& sigma) {
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "covariance has no Cholesky factor");
  return llt.matrixL();
}

std::string describe(const ConicSolution& sol) {
  std::ostringstream os;
  os << to_string(sol.status) << " after " << sol.iterations << " iterations";
  if (!sol.trace.empty()) {
    const auto& r = sol.trace.back();
    os << " (gap " << r.gap << ", pres " << r.primal_residual << ", dres " << r.dual_residual << ")";
  }
  return os.str();
}

void check_box_feasible(const PortfolioConstraintSet& w) {
  if ((w.lower().array() > w.upper().array()).any() || w.lower().sum() > 1.0 + kBudgetTol ||
      w.upper().sum() < 1.0 - kBudgetTol) {
    throw Error(ErrorCode::InfeasibleConstraints, "bounds are incompatible with full investment");
  }
}

// Vertices of {l <= w <= u, sum w = 1}: every coordinate but one at a bound.
// Calls visit(vertex) for each; returns false if the count would exceed the limit.
template <class Visit>
bool for_each_box_budget_vertex(const PortfolioConstraintSet& set, long limit, Visit&& visit) {
  const Index n = set.asset_count();
  if (set.is_simplex()) {
    for (Index i = 0; i < n; ++i) visit(VectorXd::Unit(n, i));
    return true;
  }
  if (n > 40 || static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(n - 1)) > static_cast<double>(limit)) {
    return false;
  }
  const VectorXd& lo = set.lower();
  const VectorXd& hi = set.upper();
  VectorXd v(n);
  for (Index free = 0; free < n; ++free) {
    const unsigned long combos = 1UL << (n - 1);
    for (unsigned long mask = 0; mask < combos; ++mask) {
      double rest = 0.0;
      Index bit = 0;
      for (Index i = 0; i < n; ++i) {
        if (i == free) continue;
        v[i] = (mask >> bit++) & 1UL ? hi[i] : lo[i];
        rest += v[i];
      }
      v[free] = 1.0 - rest;
      if (v[free] >= lo[free] - kBudgetTol && v[free] <= hi[free] + kBudgetTol) visit(v);
    }
  }
  return true;
}

double objective_norm(const VectorXd& w, const VectorXd& mu, const MatrixXd& sigma, const GrowthNormCoefficients& k) {
  const double s = std::sqrt(std::max(0.0, w.dot(sigma * w)));
  const double u = 1.0 - mu.dot(w) + k.a * s;
  const double v = k.b * s;
  return 0.5 * (u * u + v * v);
}

// Projected gradient with Barzilai-Borwein trial steps and backtracking on
// 0.5 ||(1 - mu^T w + a s, b s)||^2, s = sqrt(w^T Sigma w).
VectorXd projected_gradient(const MarketMoments& m, const GrowthNormCoefficients& k, const PortfolioConstraintSet& set,
                            const OptimizerOptions& options) {
  const VectorXd& mu = m.mu();
  const MatrixXd& sigma = m.sigma();
  auto value = [&](const VectorXd& w) { return objective_norm(w, mu, sigma, k); };
  auto gradient = [&](const VectorXd& w) {
    const VectorXd sw = sigma * w;
    const double s = std::sqrt(std::max(w.dot(sw), 1e-300));
    const double u = 1.0 - mu.dot(w) + k.a * s;
    return VectorXd(-u * mu + (k.a * u + k.b * k.b * s) / s * sw);
  };

  const Index n = set.asset_count();
  VectorXd w = set.project_box_budget(VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
  VectorXd g = gradient(w);
  double f = value(w);
  double step = 1.0 / std::max(1e-12, sigma.norm() + mu.squaredNorm());
  for (int it = 0; it < options.gradient_iterations; ++it) {
    double t = step;
    VectorXd w_next;
    double f_next = 0.0;
    for (int back = 0; back < 60; ++back) {
      w_next = set.project_box_budget(w - t * g);
      f_next = value(w_next);
      if (f_next <= f + g.dot(w_next - w) + 0.5 / t * (w_next - w).squaredNorm() + 1e-16) break;
      t *= 0.5;
    }
    const VectorXd dw = w_next - w;
    const VectorXd g_next = gradient(w_next);
    const VectorXd dg = g_next - g;
    const double moved = dw.lpNorm<Eigen::Infinity>();
    w = w_next;
    g = g_next;
    f = f_next;
    if (moved <= options.gradient_tol) return w;
    const double curv = dw.dot(dg);
    step = curv > 0.0 ? std::clamp(dw.squaredNorm() / curv, 1e-12, 1e12) : 2.0 * t;
  }
  throw Error(ErrorCode::ConvergenceFailure, "projected gradient did not converge");
}

ConicProblem growth_program(const MarketMoments& m, const GrowthNormCoefficients& k,
                            const PortfolioConstraintSet& set) {
  const Index n = m.asset_count();
  const int nv = static_cast<int>(n) + 2;
  const int v = static_cast<int>(n);
  const int t = v + 1;
  const MatrixXd l = cholesky_factor(m.sigma());

  ConicProblem prob;
  prob.variable_count = nv;
  prob.objective = VectorXd::Zero(nv);
  prob.objective[t] = -1.0;
  for (Index i = 0; i < n; ++i) prob.variable_names.push_back("w" + std::to_string(i));
  prob.variable_names.push_back("v");
  prob.variable_names.push_back("t");

  SocConstraint outer{ConeKind::Plain, MatrixXd::Zero(3, nv), VectorXd::Zero(3), "growth norm"};
  outer.coefficients(0, t) = 1.0;
  outer.coefficients.block(1, 0, 1, n) = -m.mu().transpose();
  outer.coefficients(1, v) = k.a;
  outer.offset[1] = 1.0;
  outer.coefficients(2, v) = k.b;
  prob.soc_constraints.push_back(std::move(outer));

  SocConstraint risk{ConeKind::Plain, MatrixXd::Zero(n + 1, nv), VectorXd::Zero(n + 1), "risk epigraph"};
  risk.coefficients(0, v) = 1.0;
  risk.coefficients.block(1, 0, n, n) = l.transpose();
  prob.soc_constraints.push_back(std::move(risk));

  set.append_to(prob);
  return prob;
}

// Variance program over W, optionally pinned to a target return.
ConicProblem variance_program(const MarketMoments& m, const PortfolioConstraintSet& set, const double* target) {
  const Index n = m.asset_count();
  const int nv = static_cast<int>(n) + 1;
  const int t = static_cast<int>(n);
  const MatrixXd l = cholesky_factor(m.sigma());

  ConicProblem prob;
  prob.variable_count = nv;
  prob.objective = VectorXd::Zero(nv);
  prob.objective[t] = -1.0;
  for (Index i = 0; i < n; ++i) prob.variable_names.push_back("w" + std::to_string(i));
  prob.variable_names.push_back("variance");

  // t * 1 >= ||L^T w||^2
  SocConstraint cone{ConeKind::Rotated, MatrixXd::Zero(n + 2, nv), VectorXd::Zero(n + 2), "variance epigraph"};
  cone.coefficients(0, t) = 1.0;
  cone.offset[1] = 1.0;
  cone.coefficients.block(2, 0, n, n) = l.transpose();
  prob.soc_constraints.push_back(std::move(cone));

  set.append_to(prob);
  if (target != nullptr) {
    VectorXd row = VectorXd::Zero(nv);
    row.head(n) = m.mu();
    prob.linear_constraints.push_back({row, Relation::Equal, *target, "target return"});
  }
  return prob;
}

VectorXd clean_weights(const VectorXd& w, const PortfolioConstraintSet& set) {
  return set.box_only() ? set.project_box_budget(w) : w;
}

// Exact solve of min w^T Sigma w over a box-and-budget set (optionally with
// mu^T w = target) on the active set guessed from an interior-point solution.
// Returns w0 unchanged when the guess fails the KKT sign conditions.
VectorXd polish_variance(const MarketMoments& m, const PortfolioConstraintSet& set, const double* target,
                         const VectorXd& w0) {
  if (!set.box_only()) return w0;
  const Index n = w0.size();
  const MatrixXd& sigma = m.sigma();
  const double activity = 1e-6;
  std::vector<Index> free_idx;
  VectorXd w = w0;
  for (Index i = 0; i < n; ++i) {
    if (w0[i] - set.lower()[i] <= activity) w[i] = set.lower()[i];
    else if (set.upper()[i] - w0[i] <= activity) w[i] = set.upper()[i];
    else free_idx.push_back(i);
  }
  const Index f = static_cast<Index>(free_idx.size());
  const Index eqs = target != nullptr ? 2 : 1;
  if (f == 0) return w0;
  // [2 S_ff  -E^T] [w_f]   [-2 S_fb w_b]
  // [E        0  ] [nu ] = [rhs - E_b w_b]
  MatrixXd kkt = MatrixXd::Zero(f + eqs, f + eqs);
  VectorXd rhs = VectorXd::Zero(f + eqs);
  VectorXd fixed = w;
  for (Index a = 0; a < f; ++a) fixed[free_idx[a]] = 0.0;
  const VectorXd sigma_fixed = sigma * fixed;
  for (Index a = 0; a < f; ++a) {
    for (Index b = 0; b < f; ++b) kkt(a, b) = 2.0 * sigma(free_idx[a], free_idx[b]);
    kkt(a, f) = -1.0;
    kkt(f, a) = 1.0;
    if (target != nullptr) {
      kkt(a, f + 1) = -m.mu()[free_idx[a]];
      kkt(f + 1, a) = m.mu()[free_idx[a]];
    }
    rhs[a] = -2.0 * sigma_fixed[free_idx[a]];
  }
  rhs[f] = 1.0 - fixed.sum();
  if (target != nullptr) rhs[f + 1] = *target - m.mu().dot(fixed);
  const Eigen::FullPivLU<MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return w0;
  const VectorXd sol = lu.solve(rhs);
  for (Index a = 0; a < f; ++a) w[free_idx[a]] = sol[a];
  if ((w.array() < set.lower().array() - 1e-12).any() || (w.array() > set.upper().array() + 1e-12).any()) return w0;
  // reduced gradient must push bound coordinates outward
  VectorXd grad = 2.0 * sigma * w - sol[f] * VectorXd::Ones(n);
  if (target != nullptr) grad -= sol[f + 1] * m.mu();
  const double scale = 1e-9 * std::max(1.0, grad.cwiseAbs().maxCoeff());
  for (Index i = 0; i < n; ++i) {
    if (std::find(free_idx.begin(), free_idx.end(), i) != free_idx.end()) continue;
    if (w[i] == set.lower()[i] && grad[i] < -scale) return w0;
    if (w[i] == set.upper()[i] && grad[i] > scale) return w0;
  }
  if (w.dot(sigma * w) > w0.dot(sigma * w0) + 1e-12) return w0;
  return w;
}

}  // namespace

PortfolioConstraintSet::PortfolioConstraintSet(VectorXd lower, VectorXd upper, std::vector<LinearInequality> extra)
    : lower_(std::move(lower)), upper_(std::move(upper)), extra_(std::move(extra)) {
  if (lower_.size() < 1 || lower_.size() != upper_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bounds must be nonempty vectors of equal length");
  }
  if (!lower_.allFinite() || !upper_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "bounds must be finite so that W is bounded");
  }
  for (const auto& row : extra_) {
    if (row.coefficients.size() != lower_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "extra inequality has the wrong length");
    }
    if (!row.coefficients.allFinite() || !std::isfinite(row.bound)) {
      throw Error(ErrorCode::NonFiniteData, "extra inequality has non-finite entries");
    }
  }
}

PortfolioConstraintSet PortfolioConstraintSet::simplex(Index assets) {
  return {VectorXd::Zero(assets), VectorXd::Ones(assets)};
}

bool PortfolioConstraintSet::is_simplex() const {
  return box_only() && (lower_.array() == 0.0).all() && (upper_.array() >= 1.0).all();
}

double PortfolioConstraintSet::violation(const VectorXd& w) const {
  if (w.size() != lower_.size()) throw Error(ErrorCode::DimensionMismatch, "portfolio has the wrong length");
  double worst = std::abs(w.sum() - 1.0);
  worst = std::max(worst, (lower_ - w).maxCoeff());
  worst = std::max(worst, (w - upper_).maxCoeff());
  for (const auto& row : extra_) worst = std::max(worst, row.coefficients.dot(w) - row.bound);
  return std::max(0.0, worst);
}

VectorXd PortfolioConstraintSet::project_box_budget(const VectorXd& w) const {
  if (w.size() != lower_.size()) throw Error(ErrorCode::DimensionMismatch, "portfolio has the wrong length");
  check_box_feasible(*this);
  // sum clamp(w - shift, l, u) is nonincreasing in shift; bisect for the budget.
  auto mass = [&](double shift) { return (w.array() - shift).max(lower_.array()).min(upper_.array()).sum(); };
  double lo = (w - upper_).minCoeff() - 1.0;
  double hi = (w - lower_).maxCoeff() + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  VectorXd out = (w.array() - 0.5 * (lo + hi)).max(lower_.array()).min(upper_.array()).matrix();
  // put the last rounding residue on a coordinate away from its bounds
  const double residue = 1.0 - out.sum();
  for (Index i = 0; i < out.size(); ++i) {
    if (out[i] + residue >= lower_[i] && out[i] + residue <= upper_[i] && out[i] > lower_[i] && out[i] < upper_[i]) {
      out[i] += residue;
      break;
    }
  }
  return out;
}

void PortfolioConstraintSet::append_to(ConicProblem& prob) const {
  const Index n = asset_count();
  const int nv = prob.variable_count;
  VectorXd budget = VectorXd::Zero(nv);
  budget.head(n).setOnes();
  prob.linear_constraints.push_back({budget, Relation::Equal, 1.0, "budget"});
  for (Index i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(nv);
    e[i] = 1.0;
    prob.linear_constraints.push_back({e, Relation::GreaterEqual, lower_[i], "lower w" + std::to_string(i)});
    // an upper bound at or above 1 - sum of other lower bounds is implied
    const double implied = 1.0 - (lower_.sum() - lower_[i]);
    if (upper_[i] < implied) {
      prob.linear_constraints.push_back({e, Relation::LessEqual, upper_[i], "upper w" + std::to_string(i)});
    }
  }
  int k = 0;
  for (const auto& row : extra_) {
    VectorXd a = VectorXd::Zero(nv);
    a.head(n) = row.coefficients;
    prob.linear_constraints.push_back({a, Relation::LessEqual, row.bound, "extra " + std::to_string(k++)});
  }
}

GrowthResult portfolio_growth(const MarketMoments& m, const Portfolio& w, double rho_bar, const GrowthQuery& q) {
  if (w.weights.size() != m.asset_count()) throw Error(ErrorCode::DimensionMismatch, "portfolio has the wrong length");
  return worst_case_growth_rate(m.mu().dot(w.weights), w.weights.dot(m.sigma() * w.weights), rho_bar, q);
}

RgopResult robust_growth_portfolio(const MarketMoments& m, double rho_bar, const GrowthQuery& q, const PortfolioConstraintSet& set,
                const OptimizerOptions& options) {
  check_assets(m, set);
  const GrowthNormCoefficients k = growth_norm_coefficients(rho_bar, q);
  if (set.box_only()) check_box_feasible(set);

  RgopResult result;
  VectorXd w;
  std::string conic_failure;
  if (options.method != OptimizerMethod::ProjectedGradient) {
    const ConicProblem prob = growth_program(m, k, set);
    const ConicSolution sol = solve(prob, options.solver);
    if (sol.status == SolveStatus::Infeasible) {
      throw Error(ErrorCode::InfeasibleConstraints, "constraint set W is empty");
    }
    if (sol.status == SolveStatus::Optimal) {
      w = clean_weights(sol.variables.head(m.asset_count()), set);
      result.method = "conic";
    } else {
      conic_failure = describe(sol);
    }
  }
  if (w.size() == 0) {
    if (options.method == OptimizerMethod::Conic || !set.box_only()) {
      throw Error(ErrorCode::ConvergenceFailure, "growth cone program: " + conic_failure);
    }
    w = projected_gradient(m, k, set, options);
    result.method = "projected-gradient";
  }

  result.portfolio = {w};
  result.growth = portfolio_growth(m, result.portfolio, rho_bar, q);  // throws PreconditionViolated

  double worst = result.growth.feasibility_margin;
  bool complete = false;
  if (set.box_only()) {
    complete = for_each_box_budget_vertex(set, options.max_certified_vertices, [&](const VectorXd& v) {
      worst = std::min(worst, feasibility_margin(m.mu().dot(v), v.dot(m.sigma() * v), rho_bar, q));
    });
  }
  result.worst_vertex_margin = worst;
  result.precondition_certified = complete && worst > 0.0;
  return result;
}

Portfolio min_variance_portfolio(const MarketMoments& m, const PortfolioConstraintSet& set,
                                 const FrontierOptions& options) {
  check_assets(m, set);
  if (set.box_only()) check_box_feasible(set);
  const ConicSolution sol = solve(variance_program(m, set, nullptr), options.solver);
  if (sol.status == SolveStatus::Infeasible) throw Error(ErrorCode::InfeasibleConstraints, "constraint set W is empty");
  if (sol.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::ConvergenceFailure, "minimum-variance program: " + describe(sol));
  }
  return {polish_variance(m, set, nullptr, clean_weights(sol.variables.head(m.asset_count()), set))};
}

std::vector<FrontierPoint> efficient_frontier(const MarketMoments& m, const PortfolioConstraintSet& set, int points,
                                              const FrontierOptions& options) {
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "a frontier needs at least two points");
  const Index n = m.asset_count();
  const Portfolio minvar = min_variance_portfolio(m, set, options);
  const double r_min = m.mu().dot(minvar.weights);

  // Largest attainable return: an LP over W.
  ConicProblem lp;
  lp.variable_count = static_cast<int>(n);
  lp.objective = m.mu();
  set.append_to(lp);
  const ConicSolution best = solve(lp, options.solver);
  if (best.status == SolveStatus::Infeasible) throw Error(ErrorCode::InfeasibleConstraints, "constraint set W is empty");
  if (best.status != SolveStatus::Optimal) throw Error(ErrorCode::ConvergenceFailure, "max-return LP: " + describe(best));
  const VectorXd w_max = clean_weights(best.variables, set);
  const double r_max = std::max(r_min, m.mu().dot(w_max));

  auto make_point = [&](const VectorXd& w) {
    return FrontierPoint{{w}, m.mu().dot(w), w.dot(m.sigma() * w), std::numeric_limits<double>::quiet_NaN()};
  };
  std::vector<FrontierPoint> out;
  out.reserve(static_cast<std::size_t>(points));
  out.push_back(make_point(minvar.weights));
  const double span = r_max - r_min;
  for (int i = 1; i < points; ++i) {
    const double r = r_min + span * static_cast<double>(i) / static_cast<double>(points - 1);
    if (span <= 1e-14 * std::max(1.0, std::abs(r_max))) {
      out.push_back(make_point(minvar.weights));
      continue;
    }
    const ConicSolution sol = solve(variance_program(m, set, &r), options.solver);
    if (sol.status == SolveStatus::Optimal) {
      out.push_back(make_point(polish_variance(m, set, &r, clean_weights(sol.variables.head(n), set))));
    } else if (i == points - 1) {
      // The top target may leave no interior (a single optimal vertex); use the LP
      // solution there.
      out.push_back(make_point(w_max));
    } else {
      throw Error(ErrorCode::ConvergenceFailure, "frontier point " + std::to_string(i) + ": " + describe(sol));
    }
  }
  return out;
}

std::vector<FrontierPoint> annotate_growth(const std::vector<FrontierPoint>& frontier, double rho_bar,
                                           const GrowthQuery& q) {
  std::vector<FrontierPoint> out = frontier;
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      out[i].growth_rate = worst_case_growth_rate(out[i].expected_return, out[i].variance, rho_bar, q).growth_rate;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PreconditionViolated) throw;
      throw Error(ErrorCode::PreconditionViolated, "frontier point " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rgop
