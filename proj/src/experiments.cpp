#include "rgop/experiments.hpp"

#include "rgop/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rgop {
namespace {

double draw(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

bool try_validate(const AutocorrelationSpec& s) {
  try {
    validate(s);
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    return false;
  }
}

constexpr int kMaxRedraws = 100000;

}  // namespace

AutocorrelationSpec random_circulant_spec(int horizon, std::mt19937_64& rng) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    AutocorrelationSpec s;
    s.horizon = horizon;
    s.rho = Eigen::VectorXd::Zero(horizon);
    s.rho[0] = 1.0;
    const double amp = draw(rng, 0.0, 1.0);
    for (int k = 1; k <= horizon / 2; ++k) {
      s.rho[k] = draw(rng, -amp, amp);
      s.rho[horizon - k] = s.rho[k];
    }
    if (try_validate(s)) return s;
  }
  throw Error(ErrorCode::ConvergenceFailure, "no positive definite circulant draw found");
}

AutocorrelationSpec random_toeplitz_spec(int horizon, double lo, double hi, std::mt19937_64& rng) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "empty correlation range");
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    AutocorrelationSpec s;
    s.horizon = horizon;
    s.kind = CorrelationKind::GeneralToeplitz;
    s.rho = Eigen::VectorXd::Zero(horizon);
    s.rho[0] = 1.0;
    for (int k = 1; k < horizon; ++k) s.rho[k] = draw(rng, lo, hi);
    if (try_validate(s)) return s;
  }
  throw Error(ErrorCode::ConvergenceFailure, "no positive definite Toeplitz draw found");
}

std::vector<VerifyInstance> verify_random_instances(const VerifyOptions& o, std::mt19937_64& rng) {
  if (o.instances < 1 || o.min_horizon < 1 || o.max_horizon < o.min_horizon) {
    throw Error(ErrorCode::InvalidArgument, "bad verify options");
  }
  std::vector<VerifyInstance> out;
  while (static_cast<int>(out.size()) < o.instances) {
    VerifyInstance v;
    v.horizon = std::uniform_int_distribution<int>(o.min_horizon, o.max_horizon)(rng);
    v.epsilon = draw(rng, o.epsilon_lo, o.epsilon_hi);
    const auto spec = random_circulant_spec(v.horizon, rng);
    v.mean = draw(rng, o.mean_lo, o.mean_hi);
    v.sd = draw(rng, o.sd_lo, o.sd_hi);
    const ProjectedMoments p(v.mean, v.sd * v.sd, validate(spec));
    const GrowthQuery q{v.epsilon, v.horizon};
    v.rho_bar = v.horizon > 1 ? aggregate_rho(spec) : 0.0;
    if (feasibility_margin(p, v.rho_bar, q) <= 0.0) continue;

    v.closed_form = worst_case_growth_rate(p, q).growth_rate;
    v.sdp = exact_growth_rate(p, q, {16, o.solver});
    const auto prob = build_socp(p, q);
    const auto sol = solve(prob, o.solver);
    if (sol.status != SolveStatus::Optimal) {
      throw Error(ErrorCode::NumericalFailure, "SOCP solve ended with status " + to_string(sol.status));
    }
    v.socp = sol.objective_value;
    const Eigen::VectorXd proj = compound_symmetric_projection(sol.variables, v.horizon);
    v.projection_objective_shift = std::abs(prob.objective.dot(proj) - sol.objective_value);
    v.projection_residual = check_certificate(proj, prob).max_violation;
    out.push_back(v);
  }
  return out;
}

std::vector<ApproxErrorRow> approx_error_sweep(const ApproxErrorOptions& o, std::mt19937_64& rng) {
  if (o.horizons.empty() || o.repetitions < 1) throw Error(ErrorCode::InvalidArgument, "bad approx-error options");
  std::vector<ApproxErrorRow> rows;
  for (int t : o.horizons) {
    const GrowthQuery q{o.epsilon, t};
    q.check();
    ApproxErrorRow row;
    row.horizon = t;
    const bool with_exact = t <= o.exact.max_sdp_horizon;
    for (int rep = 0; rep < o.repetitions; ++rep) {
      const ProjectedMoments p(o.mean, o.sd * o.sd, validate(random_toeplitz_spec(t, o.rho_lo, o.rho_hi, rng)));
      const double approx = approx_growth_rate_general(p, q).growth_rate;
      row.approx.push_back(approx);
      if (with_exact) {
        const double exact = exact_growth_rate(p, q, o.exact);
        row.exact.push_back(exact);
        row.relative_error.push_back(relative_gap(approx, exact));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double summary_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace rgop
