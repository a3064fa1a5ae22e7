// Acceptance harness: one PASS/FAIL line per criterion.
//   rgop_acceptance [--strict] [--deep] [--report <file>]
// Exit status is 0 once every criterion has a verdict; --strict also fails on any FAIL.
// --deep adds a large-sample run that estimates the population trend behind criterion 7.

#include "rgop/circulant.hpp"
#include "rgop/conic.hpp"
#include "rgop/errors.hpp"
#include "rgop/experiments.hpp"
#include "rgop/growth.hpp"
#include "rgop/io.hpp"
#include "rgop/portfolio.hpp"
#include "rgop/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace rgop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

const std::filesystem::path kSource = RGOP_SOURCE_DIR;

// ---- 1 and 2 share the instances ----
std::vector<VerifyInstance> verify_instances() {
  static const std::vector<VerifyInstance> inst = [] {
    std::mt19937_64 rng(20260214);
    VerifyOptions o;
    o.instances = 50;
    o.min_horizon = 2;
    o.max_horizon = 10;
    return verify_random_instances(o, rng);
  }();
  return inst;
}

Verdict closed_form_vs_sdp() {
  double worst = 0.0;
  for (const auto& v : verify_instances()) {
    worst = std::max(worst, std::abs(v.closed_form - v.sdp) / std::max(1.0, std::abs(v.closed_form)));
  }
  return {worst <= 1e-5, "50 instances, max |G - SDP| / max(1,|G|) = " + fmt("%.3g", worst) + " (tol 1e-5)", {}};
}

Verdict socp_chain() {
  double gap = 0.0, shift = 0.0, residual = 0.0;
  for (const auto& v : verify_instances()) {
    gap = std::max(gap, std::abs(v.socp - v.sdp));
    shift = std::max(shift, v.projection_objective_shift);
    residual = std::max(residual, v.projection_residual);
  }
  return {gap <= 1e-5 && shift <= 1e-6 && residual <= 1e-6,
          "max |SOCP - SDP| = " + fmt("%.3g", gap) + " (tol 1e-5); projection objective shift " + fmt("%.3g", shift) +
              ", residual " + fmt("%.3g", residual) + " (tol 1e-6)",
          {}};
}

// ---- 3 ----
Verdict zero_lag_sum() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const int t = std::uniform_int_distribution<int>(3, 24)(rng);
    AutocorrelationSpec s = random_circulant_spec(t, rng);
    const double mean_lag = s.rho.tail(t - 1).mean();
    s.rho.tail(t - 1).array() -= mean_lag;  // keeps rho_k = rho_{T-k}
    try {
      validate(s);
    } catch (const Error&) {
      continue;
    }
    const double eps = uniform(rng, 0.05, 0.5);
    const double mu = uniform(rng, 0.0, 0.3), sd = uniform(rng, 0.01, 0.3);
    const GrowthQuery q{eps, t};
    const ProjectedMoments p(mu, sd * sd, validate(s));
    const ProjectedMoments p0(mu, sd * sd, validate(AutocorrelationSpec::uncorrelated(t)));
    if (feasibility_margin(p0, 0.0, q) <= 0.0) continue;
    worst = std::max(worst, std::abs(worst_case_growth_rate(p, q).growth_rate - worst_case_growth_rate(p0, q).growth_rate));
    ++done;
  }
  return {worst <= 1e-9, "100 zero-sum circulant rho, max |G(rho) - G(0)| = " + fmt("%.3g", worst) + " (tol 1e-9)", {}};
}

// ---- 4 ----
Verdict toeplitz_sign() {
  std::mt19937_64 rng(4);
  ApproxErrorOptions o;
  o.horizons = {4, 8, 12};
  o.repetitions = 20;
  const auto rows = approx_error_sweep(o, rng);
  bool ok = true;
  std::vector<double> all;
  Verdict v;
  std::string per_t;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.exact.size(); ++k) ok = ok && r.exact[k] >= r.approx[k] - 1e-7;
    all.insert(all.end(), r.relative_error.begin(), r.relative_error.end());
    per_t += " T=" + std::to_string(r.horizon) + ":" + fmt("%.3g", summary_quantile(r.relative_error, 0.5));
  }
  const double worst = *std::max_element(all.begin(), all.end());
  v.pass = ok && all.size() == 60;
  v.detail = "60 Toeplitz draws, exact >= approx - 1e-7 in every case: " + std::string(ok ? "yes" : "no") +
             "; median relative error " + fmt("%.3g", summary_quantile(all, 0.5)) + " (largest " + fmt("%.3g", worst) + ")";
  v.notes.push_back("median relative error per horizon:" + per_t);
  return v;
}

// ---- 5 ----
Verdict decomposition() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    const int t = std::uniform_int_distribution<int>(1, 400)(rng);
    const double rho_bar = t > 1 ? uniform(rng, -1.0 / (t - 1) + 1e-6, 0.9) : 0.0;
    const GrowthQuery q{uniform(rng, 0.01, 0.5), t};
    const double mean = uniform(rng, -0.05, 0.2), var = std::pow(uniform(rng, 0.0, 0.3), 2);
    if (feasibility_margin(mean, var, rho_bar, q) <= 0.0) continue;
    const auto g = worst_case_growth_rate(mean, var, rho_bar, q);
    worst = std::max(worst, std::abs(g.persistent_risk + g.compounding_risk + g.growth_rate));
    ++done;
  }
  return {worst <= 1e-10, "1000 instances, max |persistent + compounding + G| = " + fmt("%.3g", worst) + " (tol 1e-10)", {}};
}

// ---- 6 ----
Verdict fixture_sweep() {
  const auto table = parse_returns_csv(kSource / "data" / "ten_industry_fixture.csv");
  const MarketMoments m = estimate_moments(table.returns);
  // four lowest-variance assets of the fixture
  std::vector<int> order(10);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return m.sigma()(a, a) < m.sigma()(b, b); });
  std::vector<int> low(order.begin(), order.begin() + 4);

  const GrowthQuery q{0.2, 360};
  const auto set = PortfolioConstraintSet::simplex(10);
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::string vars;
  VectorXd last;
  for (double rb : {0.0, 0.05, 0.10, 0.15, 0.20}) {
    const VectorXd w = robust_growth_portfolio(m, rb, q, set).portfolio.weights;
    const double var = w.dot(m.sigma() * w);
    monotone = monotone && var <= prev + 1e-12;
    prev = var;
    vars += " " + fmt("%.6g", var);
    last = w;
  }
  double mass = 0.0;
  for (int i : low) mass += last[i];
  std::string names;
  for (int i : low) names += " " + table.labels[static_cast<std::size_t>(i)];
  return {monotone && mass >= 0.99,
          "variance over rho_bar 0..0.2:" + vars + " (non-increasing: " + (monotone ? "yes" : "no") +
              "); weight on lowest-variance assets{" + names + " } at 0.20 = " + fmt("%.8f", mass) + " (need >= 0.99)",
          {}};
}

// ---- 7 ----
RunConfig simulate_config(std::uint64_t seed) {
  auto cfg = RunConfig::load(kSource / "configs" / "simulate.json");
  cfg.command = "simulate";
  cfg.seed = seed;
  cfg.params["sharpe_samples"] = false;
  return cfg;
}

std::vector<double> outperformance(const RunConfig& cfg) {
  const auto rec = run_command(cfg);
  std::vector<double> out;
  for (const auto& r : rec.outputs["runs"]) out.push_back(r["outperformance"].get<double>());
  return out;
}

bool trend_holds(const std::vector<double>& o) {
  bool ok = true;
  for (std::size_t i = 0; i < o.size(); ++i) ok = ok && o[i] > 0.0 && (i == 0 || o[i] <= o[i - 1]);
  return ok;
}

Verdict outperformance_trend(bool deep) {
  // seed 1 is the published configuration seed, fixed before any run
  const auto o = outperformance(simulate_config(1));
  const bool positive = std::all_of(o.begin(), o.end(), [](double x) { return x > 0.0; });
  const bool monotone = o[1] <= o[0] && o[2] <= o[1];
  Verdict v;
  v.pass = trend_holds(o);
  v.detail = "seed 1, K=10000, outperformance T=12/24/48: " + fmt("%.5f", o[0]) + " " + fmt("%.5f", o[1]) + " " +
             fmt("%.5f", o[2]) + " (positive: " + (positive ? "yes" : "no") +
             ", non-increasing: " + (monotone ? "yes" : "no") + ")";

  // diagnostic: how often the seeded check passes and the seed-to-seed spread
  const int seeds = 20;
  int pass = 0, pos = 0;
  std::vector<std::vector<double>> by_t(3);
  for (int s = 1; s <= seeds; ++s) {
    const auto os = outperformance(simulate_config(static_cast<std::uint64_t>(s)));
    pass += trend_holds(os);
    pos += std::all_of(os.begin(), os.end(), [](double x) { return x > 0.0; });
    for (int i = 0; i < 3; ++i) by_t[i].push_back(os[i]);
  }
  std::string spread;
  for (int i = 0; i < 3; ++i) {
    const double mean = std::accumulate(by_t[i].begin(), by_t[i].end(), 0.0) / seeds;
    double ss = 0.0;
    for (double x : by_t[i]) ss += (x - mean) * (x - mean);
    spread += " " + fmt("%.5f", mean) + "+-" + fmt("%.4f", std::sqrt(ss / (seeds - 1)));
  }
  v.notes.push_back("seeds 1..20: positive at all T in " + std::to_string(pos) + "/20, full check passes in " +
                    std::to_string(pass) + "/20; mean+-sd per T:" + spread);
  v.notes.push_back("differences between the per-T means are smaller than the single-run spread at K=10000, so the "
                    "monotonicity part is not resolvable at this sample size (rerun with --deep for K=1e6)");
  if (deep) {
    std::string line = "K=1e6, 4 seeds:";
    for (int t : {12, 24, 48}) {
      const auto m = estimate_moments(parse_returns_csv(kSource / "data" / "ten_industry_fixture.csv").returns)
                         .subset({0, 6, 7, 8});
      double s = 0.0;
      for (std::uint64_t seed = 101; seed < 105; ++seed) {
        s += autocorrelation_outperformance(m, t, -1.0 / t, 0.1, 1000000, seed, 4).outperformance;
      }
      line += " T=" + std::to_string(t) + ":" + fmt("%.5f", s / 4);
    }
    v.notes.push_back(line);
  }
  return v;
}

// ---- 8 ----
Verdict circulant_checks() {
  std::mt19937_64 rng(8);
  double worst_eig = 0.0;  // in units of 1 + ||c||
  for (int t : {2, 3, 4, 8, 16, 64}) {
    for (int rep = 0; rep < 100; ++rep) {
      VectorXd c(t);
      c[0] = uniform(rng, -1.0, 1.0);
      for (int k = 1; k <= t / 2; ++k) c[k] = c[t - k] = uniform(rng, -1.0, 1.0);
      MatrixXd dense(t, t);
      for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) dense(i, j) = c[((j - i) % t + t) % t];
      VectorXd ref = Eigen::SelfAdjointEigenSolver<MatrixXd>(dense, Eigen::EigenvaluesOnly).eigenvalues();
      VectorXd got = eigenvalues_symmetric(CirculantVector(c));
      std::sort(got.data(), got.data() + got.size());
      std::sort(ref.data(), ref.data() + ref.size());
      worst_eig = std::max(worst_eig, (got - ref).cwiseAbs().maxCoeff() / (1.0 + c.norm()));
    }
  }
  double worst_cos = 0.0;  // in units of T
  for (long t = 1; t <= 1024; ++t)
    for (long j = 0; j < t; ++j) {
      worst_cos = std::max(worst_cos, std::abs(cosine_sum(j, t) - (j == 0 ? static_cast<double>(t) : 0.0)) / t);
    }
  return {worst_eig <= 1e-9 && worst_cos <= 1e-10,
          "eigenvalue error / (1+||c||) = " + fmt("%.3g", worst_eig) + " (tol 1e-9); cosine sum error / T = " +
              fmt("%.3g", worst_cos) + " (tol 1e-10)",
          {}};
}

// ---- 9 ----
Verdict quantile_checks() {
  bool ok = true;
  std::vector<double> g(10);
  for (int i = 0; i < 10; ++i) g[i] = 0.001 * (i + 1);
  ok = ok && std::abs(empirical_quantile(g, 0.25) - 0.003) <= 1e-15;

  ReturnPaths zero(100, 4, 1);
  ok = ok && actual_growth_rate(zero, Portfolio{VectorXd::Ones(1)}, 0.1) == 0.0;
  ReturnPaths flat(100, 4, 1);
  for (int k = 0; k < 100; ++k)
    for (int t = 0; t < 4; ++t) flat(k, t, 0) = 0.02;
  ok = ok && std::abs(actual_growth_rate(flat, Portfolio{VectorXd::Ones(1)}, 0.37) - (0.02 - 0.0002)) <= 1e-15;

  std::mt19937_64 rng(9);
  std::vector<double> sample(1000);
  for (double& x : sample) x = uniform(rng, -1.0, 1.0);
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  int shuffles = 0;
  for (double eps : {0.1, 0.25}) {
    const double expected = sorted[static_cast<std::size_t>(std::lround(eps * 1000)) - 1];
    for (int rep = 0; rep < 100; ++rep, ++shuffles) {
      std::shuffle(sample.begin(), sample.end(), rng);
      ok = ok && empirical_quantile(sample, eps) == expected;
    }
  }
  return {ok, "K=10 example gives 0.003, constant samples exact, " + std::to_string(shuffles) +
                  " shuffles return the same order statistic",
          {}};
}

// ---- 10 ----
Verdict cli_determinism() {
  const auto work = std::filesystem::temp_directory_path() / "rgop_acceptance_determinism";
  std::filesystem::remove_all(work);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + RGOPKIT_PATH + "\" simulate --config \"" +
                            (kSource / "configs" / "simulate.json").string() + "\" --out \"" + (work / run).string() +
                            "\" --format csv > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "rgopkit simulate exited with an error", {}};
  }
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  int files = 0;
  std::size_t bytes = 0;
  bool same = true;
  for (const auto& e : std::filesystem::directory_iterator(work / "a")) {
    if (e.path().extension() != ".csv") continue;
    const auto a = slurp(e.path());
    const auto b = slurp(work / "b" / e.path().filename());
    same = same && a == b;
    bytes += a.size();
    ++files;
  }
  std::filesystem::remove_all(work);
  return {same && files == 3, std::to_string(files) + " CSV files (" + std::to_string(bytes) +
                                  " bytes) byte-identical across two runs: " + (same ? "yes" : "no"),
          {}};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false, deep = false;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--strict") strict = true;
    else if (a == "--deep") deep = true;
    else if (a == "--report" && i + 1 < argc) report_path = argv[++i];
    else {
      std::cerr << "usage: rgop_acceptance [--strict] [--deep] [--report <file>]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    double time_limit;  // seconds, 0 when none
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, 60.0, closed_form_vs_sdp},
      {2, 0.0, socp_chain},
      {3, 0.0, zero_lag_sum},
      {4, 0.0, toeplitz_sign},
      {5, 0.0, decomposition},
      {6, 30.0, fixture_sweep},
      {7, 300.0, [deep] { return outperformance_trend(deep); }},
      {8, 0.0, circulant_checks},
      {9, 0.0, quantile_checks},
      {10, 0.0, cli_determinism},
  };

  std::ostringstream report;
  int failures = 0, verdicts = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      v.pass = false;
      v.detail += "; exceeded the " + fmt("%.0f", c.time_limit) + " s budget";
    }
    std::ostringstream line;
    line << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << v.detail << " [" << fmt("%.1f", secs)
         << " s]\n";
    for (const auto& n : v.notes) line << "     note: " << n << "\n";
    std::cout << line.str() << std::flush;
    report << line.str();
    failures += !v.pass;
    ++verdicts;
  }
  const std::string summary = "acceptance summary: " + std::to_string(verdicts) + " criteria evaluated, " +
                              std::to_string(verdicts - failures) + " PASS, " + std::to_string(failures) + " FAIL\n";
  std::cout << summary;
  report << summary;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report.str();
  }
  return strict && failures > 0 ? 1 : 0;
}
