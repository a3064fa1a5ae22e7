#include "rgop/market_model.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <cmath>

using namespace rgop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AutocorrelationSpec circulant(std::initializer_list<double> rho) {
  AutocorrelationSpec s;
  s.horizon = static_cast<int>(rho.size());
  s.rho.resize(s.horizon);
  int i = 0;
  for (double r : rho) s.rho[i++] = r;
  return s;
}

AutocorrelationSpec toeplitz(std::initializer_list<double> rho) {
  auto s = circulant(rho);
  s.kind = CorrelationKind::GeneralToeplitz;
  return s;
}

}  // namespace

TEST_CASE("validate") {
  CHECK_NOTHROW(validate(circulant({1, 0, 0, 0})));
  CHECK_ERROR_CODE(validate(circulant({1, 0.1, 0.2, 0.3})), ErrorCode::SymmetryViolation);
  CHECK_ERROR_CODE(validate(circulant({0.99, 0, 0, 0})), ErrorCode::RhoZeroNotOne);
  CHECK_ERROR_CODE(validate(circulant({1, -0.6, -0.6})), ErrorCode::NotPositiveDefinite);
  CHECK_NOTHROW(validate(toeplitz({1, 0.1, 0.2, 0.3})));
  CHECK_ERROR_CODE(validate(toeplitz({1, 0.9, 0.0})), ErrorCode::NotPositiveDefinite);
}

TEST_CASE("validate reports the same minimum eigenvalue as a dense solver") {
  const auto spec = circulant({1, -0.45, -0.45});
  const auto v = validate(spec);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(spec.correlation_matrix());
  CHECK(v.min_eigenvalue() == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-12));
  CHECK(v.min_eigenvalue() == doctest::Approx(0.1).epsilon(1e-12));  // 1 + 2(-0.45) = 0.1
}

TEST_CASE("correlation matrices") {
  const MatrixXd pc = circulant({1, 0.2, 0.2, 0.2}).correlation_matrix();
  CHECK(pc(0, 3) == 0.2);
  const MatrixXd pt = toeplitz({1, 0.1, 0.2, 0.3}).correlation_matrix();
  CHECK(pt(0, 3) == 0.3);
  CHECK(pt(3, 0) == 0.3);
  CHECK(pt(1, 2) == 0.1);
}

TEST_CASE("aggregate_rho") {
  CHECK(aggregate_rho(circulant({1, 0.1, 0.2, 0.1})) == doctest::Approx(0.4 / 3.0).epsilon(1e-14));
  CHECK(aggregate_rho(toeplitz({1, 0.1, 0.2, 0.1})) == doctest::Approx(0.133333333333333).epsilon(1e-12));
  CHECK(aggregate_rho(AutocorrelationSpec::uncorrelated(9)) == 0.0);
  CHECK_ERROR_CODE(aggregate_rho(AutocorrelationSpec::uncorrelated(1)), ErrorCode::HorizonTooShort);
}

TEST_CASE("modified_covariance") {
  CHECK(modified_covariance(MatrixXd::Identity(2, 2), 0.1, 11).isApprox(2.0 * MatrixXd::Identity(2, 2), 1e-14));
  MatrixXd s(2, 2);
  s << 2.0, 0.3, 0.3, 1.0;
  CHECK(modified_covariance(s, 0.0, 7) == s);
  CHECK(modified_covariance(MatrixXd::Identity(3, 3), -1.0 / 5, 5).isApprox(MatrixXd::Identity(3, 3) / 5, 1e-14));
  CHECK_ERROR_CODE(modified_covariance(s, -0.25, 5), ErrorCode::DegenerateScale);
}

TEST_CASE("MarketMoments validation") {
  CHECK_ERROR_CODE(MarketMoments(VectorXd::Zero(2), MatrixXd::Identity(3, 3)), ErrorCode::DimensionMismatch);
  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.1;
  CHECK_ERROR_CODE(MarketMoments(VectorXd::Zero(2), asym), ErrorCode::NotSymmetric);
  MatrixXd singular = MatrixXd::Ones(2, 2);
  CHECK_ERROR_CODE(MarketMoments(VectorXd::Zero(2), singular), ErrorCode::NotPositiveDefinite);
  VectorXd bad = VectorXd::Zero(2);
  bad[1] = std::nan("");
  CHECK_ERROR_CODE(MarketMoments(bad, MatrixXd::Identity(2, 2)), ErrorCode::NonFiniteData);
}

TEST_CASE("project_moments") {
  const auto spec = validate(AutocorrelationSpec::uncorrelated(3));
  const MarketMoments m((VectorXd(2) << 0.01, 0.02).finished(), MatrixXd::Identity(2, 2));
  auto p = project_moments(m, {(VectorXd(2) << 1, 0).finished()}, spec);
  CHECK(p.mean_return() == 0.01);
  CHECK(p.variance() == 1.0);
  const MarketMoments z(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  p = project_moments(z, {(VectorXd(2) << 0.5, 0.5).finished()}, spec);
  CHECK(p.mean_return() == 0.0);
  CHECK(p.variance() == doctest::Approx(0.5));
  CHECK_ERROR_CODE(project_moments(m, {VectorXd::Ones(3)}, spec), ErrorCode::DimensionMismatch);

  const MarketMoments single((VectorXd(1) << 0.0085).finished(), MatrixXd::Constant(1, 1, 0.0344 * 0.0344));
  p = project_moments(single, {VectorXd::Ones(1)}, spec);
  CHECK(p.mean_return() == 0.0085);
  CHECK(p.variance() == doctest::Approx(0.0344 * 0.0344).epsilon(1e-15));
  CHECK_ERROR_CODE(project_moments(z, {VectorXd::Zero(2)}, spec), ErrorCode::InvalidArgument);
}

TEST_CASE("build_moment_matrix") {
  const ProjectedMoments zero(0.0, 1.0, validate(AutocorrelationSpec::uncorrelated(4)));
  CHECK(build_moment_matrix(zero) == MatrixXd::Identity(5, 5));

  const ProjectedMoments p(0.1, 0.04, validate(circulant({1, 0.5})));
  MatrixXd expected(3, 3);
  expected << 0.05, 0.03, 0.1, 0.03, 0.05, 0.1, 0.1, 0.1, 1.0;
  CHECK(build_moment_matrix(p).isApprox(expected, 1e-14));
  CHECK_ERROR_CODE(ProjectedMoments(1.0, 0.0, validate(AutocorrelationSpec::uncorrelated(2))),
                   ErrorCode::InvalidArgument);
}

TEST_CASE("estimate_moments") {
  MatrixXd r(2, 2);
  r << 0.0, 0.0, 0.02, 0.02;
  // two observations of two assets is below K >= N + 1
  CHECK_ERROR_CODE(estimate_moments(r), ErrorCode::TooFewObservations);
  MatrixXd r3(3, 2);
  r3 << 0.0, 0.01, 0.02, 0.02, 0.01, 0.0;
  const auto m = estimate_moments(r3);
  CHECK(m.mu()[0] == doctest::Approx(0.01));
  CHECK(m.sigma()(0, 0) == doctest::Approx(0.0001).epsilon(1e-12));
  CHECK(m.sigma()(0, 1) == doctest::Approx(0.00005).epsilon(1e-12));
  MatrixXd same(3, 2);
  same << 0.01, 0.02, 0.01, 0.02, 0.01, 0.02;
  CHECK_ERROR_CODE(estimate_moments(same), ErrorCode::NotPositiveDefinite);
  r3(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_ERROR_CODE(estimate_moments(r3), ErrorCode::NonFiniteData);
}

TEST_CASE("two-point sample covariance") {
  MatrixXd r(2, 2);
  r << 0.0, 0.0, 0.02, 0.02;
  const auto s = sample_moments(r);
  CHECK(s.mu.isApprox(VectorXd::Constant(2, 0.01), 1e-14));
  CHECK(s.sigma.isApprox(MatrixXd::Constant(2, 2, 0.0002), 1e-12));
  CHECK_ERROR_CODE(sample_moments(r.topRows(1)), ErrorCode::TooFewObservations);
}

TEST_CASE("property: aggregate_rho invariant under symmetric permutations") {
  for (int rep = 0; rep < 50; ++rep) {
    const int n = testing::uniform_int(3, 15);
    const int half = n / 2;
    std::vector<double> lags(static_cast<std::size_t>(half));
    for (auto& x : lags) x = testing::uniform(-0.5 / n, 0.5 / n);
    auto build = [&](const std::vector<double>& l) {
      AutocorrelationSpec s;
      s.horizon = n;
      s.rho = VectorXd::Zero(n);
      s.rho[0] = 1.0;
      for (int t = 1; t <= half; ++t) {
        s.rho[t] = l[static_cast<std::size_t>(t - 1)];
        s.rho[n - t] = l[static_cast<std::size_t>(t - 1)];
      }
      return s;
    };
    const auto a = build(lags);
    // with even T the middle lag is unpaired, so only the paired lags move
    std::shuffle(lags.begin(), lags.begin() + (n - 1) / 2, testing::rng());
    const auto b = build(lags);
    CHECK(aggregate_rho(validate(a)) == doctest::Approx(aggregate_rho(validate(b))).epsilon(1e-14));
  }
}

TEST_CASE("property: modified covariance ordered in rho_bar") {
  for (int rep = 0; rep < 50; ++rep) {
    const int n = testing::uniform_int(1, 5);
    const int t = testing::uniform_int(2, 30);
    MatrixXd a = MatrixXd::NullaryExpr(n, n, [] { return testing::uniform(-1.0, 1.0); });
    const MatrixXd s = a * a.transpose();
    const double lo = testing::uniform(-1.0 / (t - 1) + 1e-6, 1.0);
    const double hi = testing::uniform(lo, 1.0);
    const MatrixXd diff = modified_covariance(s, hi, t) - modified_covariance(s, lo, t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(diff);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + s.norm()));
  }
}

TEST_CASE("property: moment matrix symmetric positive definite") {
  for (int rep = 0; rep < 30; ++rep) {
    const int t = testing::uniform_int(1, 64);
    const auto spec = validate(AutocorrelationSpec::constant(t, testing::uniform(-0.5 / t, 0.5)));
    const ProjectedMoments p(testing::uniform(-0.1, 0.3), testing::uniform(1e-4, 0.1), spec);
    const MatrixXd om = build_moment_matrix(p);
    CHECK(om.isApprox(om.transpose(), 0.0));
    CHECK(is_positive_definite(om));
  }
}

TEST_CASE("property: projection quadratic in w") {
  const auto spec = validate(AutocorrelationSpec::uncorrelated(2));
  MatrixXd a = MatrixXd::NullaryExpr(4, 4, [] { return testing::uniform(-1.0, 1.0); });
  const MarketMoments m(VectorXd::NullaryExpr(4, [] { return testing::uniform(0.0, 0.02); }),
                        a * a.transpose() + 0.1 * MatrixXd::Identity(4, 4));
  for (int rep = 0; rep < 20; ++rep) {
    const VectorXd w = VectorXd::NullaryExpr(4, [] { return testing::uniform(0.0, 1.0); });
    const double c = testing::uniform(0.1, 5.0);
    const auto p1 = project_moments(m, {w}, spec);
    const auto pc = project_moments(m, {c * w}, spec);
    CHECK(pc.variance() == doctest::Approx(c * c * p1.variance()).epsilon(1e-12));
    CHECK(pc.mean_return() == doctest::Approx(c * p1.mean_return()).epsilon(1e-12));
  }
}
