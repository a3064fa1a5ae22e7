#include "rgop/conic.hpp"
#include "rgop/errors.hpp"
#include "rgop/growth.hpp"

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace rgop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ProjectedMoments scalar_moments(double mean, double var, const AutocorrelationSpec& spec) {
  return ProjectedMoments(mean, var, validate(spec));
}

}  // namespace

TEST_CASE("LP with a single bound") {
  ConicProblem p;
  p.variable_count = 1;
  p.objective = VectorXd::Ones(1);
  p.linear_constraints.push_back({VectorXd::Ones(1), Relation::LessEqual, 5.0, "cap"});
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("LP box with equality") {
  // max x + 2y s.t. x + y = 1, 0 <= x, y <= 0.7
  ConicProblem p;
  p.variable_count = 2;
  p.objective = (VectorXd(2) << 1.0, 2.0).finished();
  p.linear_constraints.push_back({VectorXd::Ones(2), Relation::Equal, 1.0, "sum"});
  for (int i = 0; i < 2; ++i) {
    VectorXd e = VectorXd::Zero(2);
    e[i] = 1.0;
    p.linear_constraints.push_back({e, Relation::GreaterEqual, 0.0, "lo"});
    p.linear_constraints.push_back({e, Relation::LessEqual, 0.7, "hi"});
  }
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.variables[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(sol.variables[1] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("infeasible and unbounded LPs") {
  ConicProblem p;
  p.variable_count = 1;
  p.objective = VectorXd::Ones(1);
  p.linear_constraints.push_back({VectorXd::Ones(1), Relation::LessEqual, 0.0, "a"});
  p.linear_constraints.push_back({VectorXd::Ones(1), Relation::GreaterEqual, 1.0, "b"});
  CHECK(solve(p).status == SolveStatus::Infeasible);

  ConicProblem u;
  u.variable_count = 1;
  u.objective = VectorXd::Ones(1);
  u.linear_constraints.push_back({VectorXd::Ones(1), Relation::GreaterEqual, 0.0, "a"});
  CHECK(solve(u).status == SolveStatus::Unbounded);
}

TEST_CASE("plain and rotated cones") {
  // max x + y s.t. ||(x, y)|| <= 1  ->  sqrt(2)
  ConicProblem p;
  p.variable_count = 2;
  p.objective = VectorXd::Ones(2);
  SocConstraint c{ConeKind::Plain, MatrixXd::Zero(3, 2), VectorXd::Zero(3), "ball"};
  c.offset[0] = 1.0;
  c.coefficients(1, 0) = 1.0;
  c.coefficients(2, 1) = 1.0;
  p.soc_constraints.push_back(c);
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));

  // max x s.t. 1 * 2 >= x^2 (rotated)  ->  sqrt(2)
  ConicProblem r;
  r.variable_count = 1;
  r.objective = VectorXd::Ones(1);
  SocConstraint rc{ConeKind::Rotated, MatrixXd::Zero(3, 1), VectorXd::Zero(3), "hyp"};
  rc.offset << 1.0, 2.0, 0.0;
  rc.coefficients(2, 0) = 1.0;
  r.soc_constraints.push_back(rc);
  sol = solve(r);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("small SDP: largest eigenvalue as min over t I - A >= 0") {
  // max -t s.t. t I - A >= 0, A = [[2, 1], [1, 2]] -> lambda_max = 3
  ConicProblem p;
  p.variable_count = 1;
  p.objective = -VectorXd::Ones(1);
  PsdConstraint c{2, MatrixXd::Zero(2, 2), {}, "lmi"};
  c.constant << -2.0, -1.0, -1.0, -2.0;
  c.terms.push_back({0, 0, 0, 1.0});
  c.terms.push_back({0, 1, 1, 1.0});
  p.psd_constraints.push_back(c);
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(-3.0).epsilon(1e-7));
}

TEST_CASE("SDP and SOCP agree with the closed form on an uncorrelated horizon") {
  const auto pm = scalar_moments(0.01, 0.0016, AutocorrelationSpec::uncorrelated(12));
  const GrowthQuery q{0.2, 12};
  const double closed = worst_case_growth_rate(pm, q).growth_rate;
  CHECK(closed == doctest::Approx(-0.016846).epsilon(1e-4));
  CHECK(exact_growth_rate(pm, q) == doctest::Approx(closed).epsilon(1e-5));
  CHECK(socp_growth_rate(pm, q) == doctest::Approx(closed).epsilon(1e-5));
}

namespace {

AutocorrelationSpec random_valid_circulant(int t) {
  for (;;) {
    AutocorrelationSpec s;
    s.horizon = t;
    s.rho = VectorXd::Zero(t);
    s.rho[0] = 1.0;
    const double amp = rgop::testing::uniform(0.0, 1.0);
    for (int k = 1; k <= t / 2; ++k) {
      s.rho[k] = rgop::testing::uniform(-amp, amp);
      s.rho[t - k] = s.rho[k];
    }
    try {
      validate(s);
      return s;
    } catch (const Error&) {
    }
  }
}

AutocorrelationSpec random_toeplitz(int t, double hi) {
  for (;;) {
    AutocorrelationSpec s;
    s.horizon = t;
    s.kind = CorrelationKind::GeneralToeplitz;
    s.rho = VectorXd::Zero(t);
    s.rho[0] = 1.0;
    for (int k = 1; k < t; ++k) s.rho[k] = rgop::testing::uniform(0.0, hi);
    try {
      validate(s);
      return s;
    } catch (const Error&) {
    }
  }
}

}  // namespace

TEST_CASE("SDP builder dimensions") {
  const auto p1 = build_sdp(build_moment_matrix(ProjectedMoments(0.0, 1.0, validate(AutocorrelationSpec::uncorrelated(1)))),
                            {0.2, 1});
  CHECK(p1.variable_count == 5);
  CHECK(p1.psd_constraints.size() == 2);
  CHECK(p1.psd_constraints[0].dim == 2);
  const auto p2 = build_sdp(build_moment_matrix(ProjectedMoments(0.0, 1.0, validate(AutocorrelationSpec::uncorrelated(2)))),
                            {0.2, 2});
  CHECK(sdp_layout(2).m_count() == 6);
  CHECK(p2.psd_constraints[1].dim == 3);
  CHECK_ERROR_CODE(build_sdp(Eigen::MatrixXd::Identity(3, 3), {0.2, 3}), ErrorCode::DimensionMismatch);
}

TEST_CASE("SOCP builder structure") {
  const ProjectedMoments p2(0.01, 0.0016, validate(AutocorrelationSpec::uncorrelated(2)));
  const auto s2 = build_socp(p2, {0.2, 2});
  int cosine_rows = 0;
  for (const auto& lc : s2.linear_constraints) {
    if (lc.label.rfind("cosine", 0) != 0) continue;
    ++cosine_rows;
    CHECK(lc.coefficients[0] == 1.0);
    CHECK(lc.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(lc.bound == 0.5);
  }
  CHECK(cosine_rows == 1);

  const ProjectedMoments p4(0.01, 0.0016, validate(AutocorrelationSpec::uncorrelated(4)));
  const auto s4 = build_socp(p4, {0.2, 4});
  bool linked = false;
  for (const auto& lc : s4.linear_constraints) {
    if (lc.relation == Relation::Equal && lc.coefficients[1] == 1.0 && lc.coefficients[3] == -1.0) linked = true;
    if (lc.label == "moment") {
      CHECK(lc.coefficients[0] == doctest::Approx(4 * (0.0016 + 1e-4)).epsilon(1e-14));
      for (int t = 1; t < 4; ++t) CHECK(lc.coefficients[t] == doctest::Approx(4 * 1e-4).epsilon(1e-14));
    }
  }
  CHECK(linked);

  AutocorrelationSpec g = AutocorrelationSpec::uncorrelated(4);
  g.kind = CorrelationKind::GeneralToeplitz;
  CHECK_ERROR_CODE(build_socp(ProjectedMoments(0.01, 0.0016, validate(g)), {0.2, 4}), ErrorCode::NotCirculant);
}

TEST_CASE("certificate check on a hand-built T=1 point") {
  // eps = 0.5, mean 0, var 1: M = diag(big) feasible with very negative gamma and beta
  const ProjectedMoments p(0.0, 1.0, validate(AutocorrelationSpec::uncorrelated(1)));
  const auto prob = build_sdp(build_moment_matrix(p), {0.5, 1});
  const auto layout = sdp_layout(1);
  VectorXd x = VectorXd::Zero(prob.variable_count);
  x[layout.m_index(0, 0)] = 1.0;
  x[layout.m_index(1, 1)] = 1.0;
  x[layout.beta] = -10.0;   // beta + (1 + 1) / 0.5 = -6 <= 0
  x[layout.gamma] = -20.0;  // corner 1 - (-20) - (-10) huge
  const auto rep = check_certificate(x, prob);
  CHECK(rep.max_violation == 0.0);
  CHECK(rep.entries.size() == 3);
}

TEST_CASE("certificate check flags a perturbed optimum") {
  const ProjectedMoments p(0.01, 0.0016, validate(AutocorrelationSpec::uncorrelated(4)));
  const GrowthQuery q{0.2, 4};
  const auto prob = build_sdp(build_moment_matrix(p), q);
  const auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(check_certificate(sol, prob).max_violation <= 1e-7);
  VectorXd x = sol.variables;
  x[sdp_layout(4).m_index(1, 0)] += 1e-2;
  CHECK(check_certificate(x, prob).max_violation > 1e-4);
}

TEST_CASE("SDP is invariant under the time-reversal and shift symmetrization") {
  // averaging the optimal M over cyclic shifts keeps it feasible with the same gamma
  const auto spec = random_valid_circulant(6);
  const ProjectedMoments p(0.02, 0.01, validate(spec));
  const GrowthQuery q{0.2, 6};
  const auto prob = build_sdp(build_moment_matrix(p), q);
  const auto sol = solve(prob);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const auto layout = sdp_layout(6);
  Eigen::MatrixXd m(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) m(i, j) = sol.variables[layout.m_index(i, j)];
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(7, 7);
  for (int shift = 0; shift < 6; ++shift) {
    for (int flip = 0; flip < 2; ++flip) {
      Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(7, 7);
      for (int t = 0; t < 6; ++t) perm(t, flip ? (6 - t + shift) % 6 : (t + shift) % 6) = 1.0;
      perm(6, 6) = 1.0;
      avg += perm * m * perm.transpose();
    }
  }
  avg /= 12.0;
  VectorXd x = sol.variables;
  for (int j = 0; j < 7; ++j)
    for (int i = j; i < 7; ++i) x[layout.m_index(i, j)] = avg(i, j);
  CHECK(check_certificate(x, prob).max_violation <= 1e-7);
  CHECK(prob.objective.dot(x) == doctest::Approx(sol.objective_value).epsilon(1e-12));
  // the averaged M is circulant in its upper-left block
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(std::abs(avg(i, j) - avg(0, (j - i + 6) % 6)) < 1e-9);
}

TEST_CASE("property: SDP, SOCP and closed form agree on random circulant instances") {
  int checked = 0;
  while (checked < 25) {
    const int t = rgop::testing::uniform_int(2, 10);
    const double eps = rgop::testing::uniform(0.05, 0.5);
    const auto spec = random_valid_circulant(t);
    const ProjectedMoments p(rgop::testing::uniform(0.0, 0.3), std::pow(rgop::testing::uniform(0.01, 0.3), 2),
                             validate(spec));
    const GrowthQuery q{eps, t};
    if (feasibility_margin(p, aggregate_rho(spec), q) <= 0.0) continue;
    const double closed = worst_case_growth_rate(p, q).growth_rate;
    const double sdp = exact_growth_rate(p, q);
    const auto socp_prob = build_socp(p, q);
    const auto socp = solve(socp_prob);
    REQUIRE(socp.status == SolveStatus::Optimal);
    INFO("T=" << t << " eps=" << eps << " closed=" << closed);
    CHECK(std::abs(closed - sdp) <= 1e-5 * std::max(1.0, std::abs(closed)));
    CHECK(std::abs(socp.objective_value - sdp) <= 1e-5);
    const VectorXd proj = compound_symmetric_projection(socp.variables, t);
    CHECK(std::abs(socp_prob.objective.dot(proj) - socp.objective_value) <= 1e-12);
    CHECK(check_certificate(proj, socp_prob).max_violation <= 1e-6);
    ++checked;
  }
}

TEST_CASE("property: exact SDP value bounds the Toeplitz approximation from above") {
  for (int t : {4, 8}) {
    for (int rep = 0; rep < 5; ++rep) {
      const ProjectedMoments p(0.15, 0.04, validate(random_toeplitz(t, 0.2)));
      const GrowthQuery q{0.15, t};
      const double approx = approx_growth_rate_general(p, q).growth_rate;
      const double exact = exact_growth_rate(p, q);
      CHECK(exact >= approx - 1e-7);
    }
  }
}

TEST_CASE("exact growth horizon limit and Toeplitz constant case") {
  const ProjectedMoments p(0.01, 0.0016, validate(AutocorrelationSpec::uncorrelated(17)));
  CHECK_ERROR_CODE(exact_growth_rate(p, {0.2, 17}), ErrorCode::HorizonTooLargeForSDP);
  const auto c = validate(AutocorrelationSpec::constant(5, 0.15));
  const auto g = validate(AutocorrelationSpec::constant(5, 0.15, CorrelationKind::GeneralToeplitz));
  const GrowthQuery q{0.2, 5};
  CHECK(exact_growth_rate(ProjectedMoments(0.02, 0.01, g), q) ==
        doctest::Approx(exact_growth_rate(ProjectedMoments(0.02, 0.01, c), q)).epsilon(1e-6));
}

TEST_CASE("problem check and JSON dump") {
  ConicProblem bad;
  bad.variable_count = 2;
  bad.objective = VectorXd::Ones(2);
  CHECK_ERROR_CODE(bad.check(), ErrorCode::InvalidArgument);
  bad.linear_constraints.push_back({VectorXd::Ones(3), Relation::LessEqual, 1.0, "x"});
  CHECK_ERROR_CODE(bad.check(), ErrorCode::InvalidArgument);

  const ProjectedMoments p(0.01, 0.0016, validate(AutocorrelationSpec::uncorrelated(2)));
  const std::string js = to_json(build_socp(p, {0.2, 2}));
  CHECK(js.find("\"schema_version\"") != std::string::npos);
  CHECK(js.find("rotated") != std::string::npos);
}
