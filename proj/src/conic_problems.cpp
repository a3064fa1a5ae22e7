#include "rgop/conic.hpp"
#include "rgop/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace rgop {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string relation_symbol(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
    case Relation::Equal: return "==";
  }
  return "?";
}

LinearConstraint make_linear(int n, Relation rel, double bound, std::string label) {
  return {VectorXd::Zero(n), rel, bound, std::move(label)};
}

// Symmetric M entries (i, j) of an SDP variable matrix added to a PSD expression.
void add_matrix_variable(PsdConstraint& c, const SdpLayout& layout) {
  const int d = layout.horizon + 1;
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) c.terms.push_back({layout.m_index(i, j), i, j, 1.0});
  }
}

double unit_root_cos(long k, long horizon) {
  const long r = ((k % horizon) + horizon) % horizon;
  return std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(horizon));
}

}  // namespace

MatrixXd PsdConstraint::evaluate(const VectorXd& x) const {
  MatrixXd value = constant;
  for (const auto& t : terms) {
    value(t.row, t.col) += t.value * x[t.variable];
    if (t.row != t.col) value(t.col, t.row) += t.value * x[t.variable];
  }
  return value;
}

void ConicProblem::check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (variable_count < 1) fail("conic problem needs at least one variable");
  if (objective.size() != variable_count) fail("objective length differs from variable count");
  if (constraint_count() == 0) fail("conic problem needs at least one constraint");
  for (const auto& lc : linear_constraints) {
    if (lc.coefficients.size() != variable_count) fail("linear constraint '" + lc.label + "' has wrong length");
  }
  for (const auto& soc : soc_constraints) {
    const auto rows = soc.coefficients.rows();
    if (soc.coefficients.cols() != variable_count || soc.offset.size() != rows) {
      fail("cone constraint '" + soc.label + "' has inconsistent dimensions");
    }
    if (rows < (soc.kind == ConeKind::Plain ? 1 : 2)) fail("cone constraint '" + soc.label + "' too short");
  }
  for (const auto& psd : psd_constraints) {
    if (psd.dim < 1 || psd.constant.rows() != psd.dim || psd.constant.cols() != psd.dim) {
      fail("PSD constraint '" + psd.label + "' has inconsistent dimensions");
    }
    for (const auto& t : psd.terms) {
      if (t.variable < 0 || t.variable >= variable_count || t.row < 0 || t.row >= psd.dim || t.col < 0 ||
          t.col >= psd.dim) {
        fail("PSD constraint '" + psd.label + "' references an out-of-range index");
      }
    }
  }
}

ResidualReport check_certificate(const VectorXd& x, const ConicProblem& problem) {
  ResidualReport report;
  report.objective_value = problem.objective.dot(x);
  auto add = [&](const std::string& label, const char* kind, double violation) {
    violation = std::max(0.0, violation);
    report.entries.push_back({label, kind, violation});
    report.max_violation = std::max(report.max_violation, violation);
  };
  for (const auto& lc : problem.linear_constraints) {
    const double lhs = lc.coefficients.dot(x);
    switch (lc.relation) {
      case Relation::LessEqual: add(lc.label, "linear", lhs - lc.bound); break;
      case Relation::GreaterEqual: add(lc.label, "linear", lc.bound - lhs); break;
      case Relation::Equal: add(lc.label, "linear", std::abs(lhs - lc.bound)); break;
    }
  }
  for (const auto& soc : problem.soc_constraints) {
    const VectorXd u = soc.coefficients * x + soc.offset;
    const auto k = u.size();
    if (soc.kind == ConeKind::Plain) {
      add(soc.label, "soc", u.tail(k - 1).norm() - u[0]);
    } else {
      // distance-like violation of the equivalent plain cone (u0+u1, u0-u1, 2 u_rest)
      VectorXd rest(k - 1);
      rest[0] = u[0] - u[1];
      rest.tail(k - 2) = 2.0 * u.tail(k - 2);
      add(soc.label, "soc", 0.5 * (rest.norm() - (u[0] + u[1])));
    }
  }
  for (const auto& psd : problem.psd_constraints) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(psd.evaluate(x), Eigen::EigenvaluesOnly);
    add(psd.label, "psd", -es.eigenvalues().minCoeff());
  }
  return report;
}

ResidualReport check_certificate(const ConicSolution& solution, const ConicProblem& problem) {
  return check_certificate(solution.variables, problem);
}

std::string to_json(const ConicProblem& problem) {
  using nlohmann::json;
  auto sparse = [](const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] != 0.0) out.push_back({i, v[i]});
    }
    return out;
  };
  json doc;
  doc["schema_version"] = 1;
  doc["sense"] = "maximize";
  doc["variable_count"] = problem.variable_count;
  doc["variables"] = problem.variable_names;
  doc["objective"] = sparse(problem.objective);
  doc["linear"] = json::array();
  for (const auto& lc : problem.linear_constraints) {
    doc["linear"].push_back({{"label", lc.label},
                             {"coefficients", sparse(lc.coefficients)},
                             {"relation", relation_symbol(lc.relation)},
                             {"bound", lc.bound}});
  }
  doc["soc"] = json::array();
  for (const auto& soc : problem.soc_constraints) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < soc.coefficients.rows(); ++r) {
      rows.push_back({{"coefficients", sparse(soc.coefficients.row(r).transpose())},
                      {"constant", soc.offset[r]}});
    }
    doc["soc"].push_back(
        {{"label", soc.label}, {"kind", soc.kind == ConeKind::Plain ? "plain" : "rotated"}, {"rows", rows}});
  }
  doc["psd"] = json::array();
  for (const auto& psd : problem.psd_constraints) {
    json constant = json::array();
    for (int i = 0; i < psd.dim; ++i) {
      json row = json::array();
      for (int j = 0; j < psd.dim; ++j) row.push_back(psd.constant(i, j));
      constant.push_back(row);
    }
    json terms = json::array();
    for (const auto& t : psd.terms) terms.push_back({t.variable, t.row, t.col, t.value});
    doc["psd"].push_back({{"label", psd.label}, {"dim", psd.dim}, {"constant", constant}, {"terms", terms}});
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------

int SdpLayout::m_index(int i, int j) const {
  const int d = horizon + 1;
  if (i < j) std::swap(i, j);
  return j * d - j * (j - 1) / 2 + (i - j);
}

SdpLayout sdp_layout(int horizon) {
  SdpLayout layout;
  layout.horizon = horizon;
  layout.beta = layout.m_count();
  layout.gamma = layout.m_count() + 1;
  return layout;
}

ConicProblem build_sdp(const MatrixXd& omega, const GrowthQuery& q) {
  q.check();
  if (omega.rows() != omega.cols() || omega.rows() != q.horizon + 1) {
    throw Error(ErrorCode::DimensionMismatch, "moment matrix must be (T+1) x (T+1)");
  }
  const int t_len = q.horizon;
  const int d = t_len + 1;
  const SdpLayout layout = sdp_layout(t_len);
  const int n = layout.gamma + 1;

  ConicProblem prob;
  prob.variable_count = n;
  prob.objective = VectorXd::Zero(n);
  prob.objective[layout.gamma] = 1.0;
  prob.variable_names.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) {
      prob.variable_names[static_cast<std::size_t>(layout.m_index(i, j))] =
          "M[" + std::to_string(i) + "," + std::to_string(j) + "]";
    }
  }
  prob.variable_names[static_cast<std::size_t>(layout.beta)] = "beta";
  prob.variable_names[static_cast<std::size_t>(layout.gamma)] = "gamma";

  // beta + <Omega, M> / eps <= 0
  LinearConstraint moment = make_linear(n, Relation::LessEqual, 0.0, "moment");
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) {
      moment.coefficients[layout.m_index(i, j)] = (i == j ? 1.0 : 2.0) * omega(i, j) / q.epsilon;
    }
  }
  moment.coefficients[layout.beta] = 1.0;
  prob.linear_constraints.push_back(std::move(moment));

  PsdConstraint m_psd{d, MatrixXd::Zero(d, d), {}, "M psd"};
  add_matrix_variable(m_psd, layout);
  prob.psd_constraints.push_back(std::move(m_psd));

  // M - [[I/2, -1/2], [-1/2^T, gamma T - beta]] >= 0
  PsdConstraint shifted{d, MatrixXd::Zero(d, d), {}, "M shifted psd"};
  shifted.constant.topLeftCorner(t_len, t_len) = -0.5 * MatrixXd::Identity(t_len, t_len);
  shifted.constant.col(t_len).head(t_len).setConstant(0.5);
  shifted.constant.row(t_len).head(t_len).setConstant(0.5);
  add_matrix_variable(shifted, layout);
  shifted.terms.push_back({layout.gamma, t_len, t_len, -static_cast<double>(t_len)});
  shifted.terms.push_back({layout.beta, t_len, t_len, 1.0});
  prob.psd_constraints.push_back(std::move(shifted));
  return prob;
}

ConicProblem build_socp(const ProjectedMoments& p, const GrowthQuery& q) {
  q.check();
  if (p.spec().kind() != CorrelationKind::CirculantSymmetric) {
    throw Error(ErrorCode::NotCirculant, "the SOCP reduction needs a circulant autocorrelation spec");
  }
  if (p.horizon() != q.horizon) throw Error(ErrorCode::DimensionMismatch, "horizon mismatch");
  const int t_len = q.horizon;
  const SocpLayout layout{t_len};
  const int n = layout.count();
  const double mean = p.mean_return();
  const double var = p.variance();
  const double root_t = std::sqrt(static_cast<double>(t_len));

  ConicProblem prob;
  prob.variable_count = n;
  prob.objective = VectorXd::Zero(n);
  prob.objective[layout.gamma()] = 1.0;
  for (int t = 0; t <= t_len + 1; ++t) prob.variable_names.push_back("m" + std::to_string(t));
  prob.variable_names.push_back("beta");
  prob.variable_names.push_back("gamma");

  const int corner = layout.m(t_len + 1);
  const int border = layout.m(t_len);

  LinearConstraint corner_nonneg = make_linear(n, Relation::GreaterEqual, 0.0, "m_{T+1} >= 0");
  corner_nonneg.coefficients[corner] = 1.0;
  prob.linear_constraints.push_back(std::move(corner_nonneg));

  LinearConstraint shifted_corner = make_linear(n, Relation::GreaterEqual, 0.0, "m_{T+1} - gamma T + beta >= 0");
  shifted_corner.coefficients[corner] = 1.0;
  shifted_corner.coefficients[layout.gamma()] = -t_len;
  shifted_corner.coefficients[layout.beta()] = 1.0;
  prob.linear_constraints.push_back(std::move(shifted_corner));

  for (int t = 1; t < t_len - t; ++t) {
    LinearConstraint link = make_linear(n, Relation::Equal, 0.0, "m_" + std::to_string(t) + " = m_" +
                                                                    std::to_string(t_len - t));
    link.coefficients[layout.m(t)] = 1.0;
    link.coefficients[layout.m(t_len - t)] = -1.0;
    prob.linear_constraints.push_back(std::move(link));
  }

  // m_{T+1} * sum m_t >= T m_T^2
  SocConstraint first{ConeKind::Rotated, MatrixXd::Zero(3, n), VectorXd::Zero(3), "hyperbolic M"};
  first.coefficients(0, corner) = 1.0;
  for (int t = 0; t < t_len; ++t) first.coefficients(1, layout.m(t)) = 1.0;
  first.coefficients(2, border) = root_t;
  prob.soc_constraints.push_back(std::move(first));

  // (m_{T+1} - gamma T + beta) (sum m_t - 1/2) >= T (m_T + 1/2)^2
  SocConstraint second{ConeKind::Rotated, MatrixXd::Zero(3, n), VectorXd::Zero(3), "hyperbolic shifted M"};
  second.coefficients(0, corner) = 1.0;
  second.coefficients(0, layout.gamma()) = -t_len;
  second.coefficients(0, layout.beta()) = 1.0;
  for (int t = 0; t < t_len; ++t) second.coefficients(1, layout.m(t)) = 1.0;
  second.offset[1] = -0.5;
  second.coefficients(2, border) = root_t;
  second.offset[2] = 0.5 * root_t;
  prob.soc_constraints.push_back(std::move(second));

  for (int j = 1; j < t_len; ++j) {
    LinearConstraint cosine = make_linear(n, Relation::GreaterEqual, 0.5, "cosine j=" + std::to_string(j));
    cosine.coefficients[layout.m(0)] = 1.0;
    for (int t = 1; t < t_len; ++t) cosine.coefficients[layout.m(t)] = unit_root_cos(static_cast<long>(j) * t, t_len);
    prob.linear_constraints.push_back(std::move(cosine));
  }

  LinearConstraint moment = make_linear(n, Relation::LessEqual, 0.0, "moment");
  moment.coefficients[layout.beta()] = q.epsilon;
  const auto& rho = p.spec().rho();
  for (int t = 0; t < t_len; ++t) moment.coefficients[layout.m(t)] = t_len * (rho[t] * var + mean * mean);
  moment.coefficients[border] = 2.0 * t_len * mean;
  moment.coefficients[corner] = 1.0;
  prob.linear_constraints.push_back(std::move(moment));
  return prob;
}

VectorXd compound_symmetric_projection(const VectorXd& socp_point, int horizon) {
  const SocpLayout layout{horizon};
  if (socp_point.size() != layout.count()) {
    throw Error(ErrorCode::DimensionMismatch, "SOCP point has the wrong length");
  }
  VectorXd out = socp_point;
  const double total = socp_point.head(horizon).sum();
  const double shared = (total - 0.5) / horizon;
  out[layout.m(0)] = shared + 0.5;
  for (int t = 1; t < horizon; ++t) out[layout.m(t)] = shared;
  return out;
}

namespace {

double solve_for_gamma(const ConicProblem& prob, const SolverOptions& options, const char* what) {
  const ConicSolution sol = solve(prob, options);
  if (sol.status != SolveStatus::Optimal) {
    std::ostringstream os;
    os << what << " solve ended with status " << to_string(sol.status) << " after " << sol.iterations
       << " iterations";
    for (const auto& rec : sol.trace) {
      os << "\n  it " << rec.iteration << " pobj " << rec.primal_objective << " gap " << rec.gap << " pres "
         << rec.primal_residual << " dres " << rec.dual_residual << " step " << rec.step;
    }
    throw Error(ErrorCode::NumericalFailure, os.str());
  }
  return sol.objective_value;
}

}  // namespace

double exact_growth_rate(const ProjectedMoments& p, const GrowthQuery& q, const ExactGrowthOptions& options) {
  if (q.horizon > options.max_sdp_horizon) {
    std::ostringstream os;
    os << "T = " << q.horizon << " exceeds the SDP limit " << options.max_sdp_horizon;
    throw Error(ErrorCode::HorizonTooLargeForSDP, os.str());
  }
  if (p.horizon() != q.horizon) throw Error(ErrorCode::DimensionMismatch, "horizon mismatch");
  return solve_for_gamma(build_sdp(build_moment_matrix(p), q), options.solver, "SDP");
}

double exact_growth_rate(const MarketMoments& m, const Portfolio& w, const ValidatedSpec& spec,
                         const GrowthQuery& q, const ExactGrowthOptions& options) {
  return exact_growth_rate(project_moments(m, w, spec), q, options);
}

double socp_growth_rate(const ProjectedMoments& p, const GrowthQuery& q, const SolverOptions& options) {
  return solve_for_gamma(build_socp(p, q), options, "SOCP");
}

}  // namespace rgop
