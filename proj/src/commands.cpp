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
#include <ctime>
#include <functional>
#include <map>
#include <set>

#ifndef RGOP_VERSION
#define RGOP_VERSION "unknown"
#endif

namespace rgop {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

// Typed, key-checked view of one JSON object in the parameter block.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail("unknown key '" + k + "'");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const {
    if (!has(k)) fail("missing required key '" + k + "'");
    return j_.at(k);
  }
  Reader sub(const std::string& k) const { return Reader(raw(k), where_ + "." + k); }

  double number(const std::string& k, std::optional<double> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) fail("missing required key '" + k + "'");
      return *def;
    }
    if (!j_[k].is_number()) fail("'" + k + "' must be a number");
    const double v = j_[k].get<double>();
    if (!std::isfinite(v)) fail("'" + k + "' must be finite");
    return v;
  }

  int integer(const std::string& k, std::optional<int> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) fail("missing required key '" + k + "'");
      return *def;
    }
    if (!j_[k].is_number_integer()) fail("'" + k + "' must be an integer");
    return j_[k].get<int>();
  }

  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_[k].is_boolean()) fail("'" + k + "' must be true or false");
    return j_[k].get<bool>();
  }

  std::string string(const std::string& k, std::optional<std::string> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) fail("missing required key '" + k + "'");
      return *def;
    }
    if (!j_[k].is_string()) fail("'" + k + "' must be a string");
    return j_[k].get<std::string>();
  }

  VectorXd vector(const std::string& k) const { return to_vector(raw(k), k); }

  MatrixXd matrix(const std::string& k) const {
    const json& a = raw(k);
    if (!a.is_array() || a.empty()) fail("'" + k + "' must be a non-empty array of rows");
    MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const VectorXd row = to_vector(a[i], k);
      if (row.size() != m.cols()) fail("'" + k + "' has ragged rows");
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
  }

  std::vector<int> integers(const std::string& k) const {
    const json& a = raw(k);
    if (!a.is_array() || a.empty()) fail("'" + k + "' must be a non-empty array of integers");
    std::vector<int> out;
    for (const auto& v : a) {
      if (!v.is_number_integer()) fail("'" + k + "' must be a non-empty array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { invalid(where_ + ": " + msg); }
  const std::string& where() const { return where_; }

 private:
  VectorXd to_vector(const json& a, const std::string& k) const {
    if (!a.is_array() || a.empty()) fail("'" + k + "' must be a non-empty array of numbers");
    VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number() || !std::isfinite(a[i].get<double>())) fail("'" + k + "' must hold finite numbers");
      v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    }
    return v;
  }

  const json& j_;
  std::string where_;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json_vector(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json to_json_matrix(const MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json_vector(m.row(i).transpose()));
  return a;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::filesystem::path resolve(const RunConfig& cfg, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = cfg.base_dir / path;
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::IoError, "referenced file does not exist: " + path.string());
  return path;
}

// ---- shared parameter blocks ----

struct LabeledMoments {
  MarketMoments moments;
  std::vector<std::string> labels;
};

LabeledMoments read_moments(const Reader& r, const RunConfig& cfg) {
  r.allow({"csv", "mean", "covariance", "sd", "correlation", "units", "labels", "assets"});
  std::vector<std::string> labels;
  std::optional<MarketMoments> full;
  if (r.has("csv")) {
    if (r.has("mean") || r.has("covariance") || r.has("sd")) r.fail("give either 'csv' or inline moments");
    const auto table = parse_returns_csv(resolve(cfg, r.string("csv")));
    full.emplace(estimate_moments(table.returns));
    labels = table.labels;
  } else {
    const std::string units = r.string("units", "decimal");
    if (units != "decimal" && units != "percent") r.fail("'units' must be \"decimal\" or \"percent\"");
    const double scale = units == "percent" ? 0.01 : 1.0;
    const VectorXd mu = r.vector("mean") * scale;
    const auto n = mu.size();
    MatrixXd sigma;
    if (r.has("covariance")) {
      if (r.has("sd") || r.has("correlation")) r.fail("give either 'covariance' or 'sd' and 'correlation'");
      sigma = r.matrix("covariance") * scale * scale;
    } else {
      const VectorXd sd = r.vector("sd") * scale;
      if (sd.size() != n) r.fail("'sd' and 'mean' differ in length");
      MatrixXd corr;
      if (r.raw("correlation").is_number()) {
        corr = MatrixXd::Constant(n, n, r.number("correlation"));
        corr.diagonal().setOnes();
      } else {
        corr = r.matrix("correlation");
      }
      if (corr.rows() != n || corr.cols() != n) r.fail("'correlation' has the wrong shape");
      sigma = sd.asDiagonal() * corr * sd.asDiagonal();
    }
    if (sigma.rows() != n || sigma.cols() != n) r.fail("covariance shape does not match the mean");
    full.emplace(mu, sigma);
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back("asset" + std::to_string(i + 1));
  }
  if (r.has("labels")) {
    const json& l = r.raw("labels");
    if (!l.is_array() || l.size() != labels.size()) r.fail("'labels' must name every asset");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i].is_string()) r.fail("'labels' must be strings");
      labels[i] = l[i].get<std::string>();
    }
  }
  if (!r.has("assets")) return {*full, labels};

  const json& a = r.raw("assets");
  if (!a.is_array() || a.empty()) r.fail("'assets' must be a non-empty array");
  std::vector<Eigen::Index> idx;
  std::vector<std::string> picked;
  for (const auto& v : a) {
    Eigen::Index i = -1;
    if (v.is_number_integer()) {
      i = v.get<Eigen::Index>();
    } else if (v.is_string()) {
      const auto it = std::find(labels.begin(), labels.end(), v.get<std::string>());
      if (it == labels.end()) r.fail("unknown asset label '" + v.get<std::string>() + "'");
      i = it - labels.begin();
    }
    if (i < 0 || i >= static_cast<Eigen::Index>(labels.size())) r.fail("asset reference out of range");
    idx.push_back(i);
    picked.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return {full->subset(idx), picked};
}

VectorXd bound_vector(const Reader& r, const std::string& k, Eigen::Index n, double def) {
  if (!r.has(k)) return VectorXd::Constant(n, def);
  if (r.raw(k).is_number()) return VectorXd::Constant(n, r.number(k));
  VectorXd v = r.vector(k);
  if (v.size() != n) r.fail("'" + k + "' must have one entry per asset");
  return v;
}

PortfolioConstraintSet read_constraints(const Reader& parent, Eigen::Index n) {
  if (!parent.has("constraints")) return PortfolioConstraintSet::simplex(n);
  const Reader r = parent.sub("constraints");
  r.allow({"lower", "upper", "inequalities"});
  std::vector<LinearInequality> extra;
  if (r.has("inequalities")) {
    const json& arr = r.raw("inequalities");
    if (!arr.is_array()) r.fail("'inequalities' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Reader row(arr[i], r.where() + ".inequalities[" + std::to_string(i) + "]");
      row.allow({"coefficients", "bound"});
      LinearInequality li{row.vector("coefficients"), row.number("bound")};
      if (li.coefficients.size() != n) row.fail("'coefficients' must have one entry per asset");
      extra.push_back(std::move(li));
    }
  }
  return {bound_vector(r, "lower", n, 0.0), bound_vector(r, "upper", n, 1.0), std::move(extra)};
}

GrowthQuery read_query(const Reader& r, std::optional<double> eps_default = std::nullopt) {
  GrowthQuery q{r.number("epsilon", eps_default), r.integer("horizon")};
  q.check();
  return q;
}

// Horizon list: an array of integers or {"from", "to", "step"}.
std::vector<int> read_horizons(const Reader& r, const std::string& k, std::vector<int> def) {
  std::vector<int> out;
  if (!r.has(k)) {
    out = std::move(def);
  } else if (r.raw(k).is_object()) {
    const Reader g = r.sub(k);
    g.allow({"from", "to", "step"});
    const int from = g.integer("from"), to = g.integer("to"), step = g.integer("step", 1);
    if (step < 1 || to < from) g.fail("need from <= to and step >= 1");
    for (int t = from; t <= to; t += step) out.push_back(t);
  } else {
    out = r.integers(k);
  }
  for (int t : out)
    if (t < 1) r.fail("horizons must be positive");
  return out;
}

ResultTable weights_table(const std::vector<std::string>& labels, const std::vector<std::pair<std::string, VectorXd>>& cols) {
  ResultTable t{"weights", {{"asset", ""}}, {}};
  for (const auto& [name, w] : cols) t.columns.push_back({name, "fraction"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<json> row{labels[i]};
    for (const auto& [name, w] : cols) row.push_back(num(w[static_cast<Eigen::Index>(i)]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

json weights_json(const std::vector<std::string>& labels, const VectorXd& w) {
  json o = json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) o[labels[i]] = num(w[static_cast<Eigen::Index>(i)]);
  return o;
}

// ---- commands: parse() validates, run() executes ----

struct Command {
  std::function<void(const RunConfig&)> validate;
  std::function<void(const RunConfig&, ResultRecord&)> run;
};

// growth
struct GrowthParams {
  GrowthQuery q;
  double mean = 0.0, variance = 0.0;
  std::optional<AutocorrelationSpec> spec;
  double rho_bar = 0.0;
  bool exact = false;
};

GrowthParams parse_growth(const RunConfig& cfg) {
  const Reader r(cfg.params, "growth");
  r.allow({"epsilon", "horizon", "rho", "rho_bar", "kind", "projected", "moments", "weights", "exact"});
  GrowthParams p;
  p.q = read_query(r);
  if (r.has("projected")) {
    if (r.has("moments") || r.has("weights")) r.fail("give either 'projected' or 'moments' and 'weights'");
    const Reader pr = r.sub("projected");
    pr.allow({"mean", "variance", "sd"});
    p.mean = pr.number("mean");
    if (pr.has("variance") == pr.has("sd")) pr.fail("give exactly one of 'variance' and 'sd'");
    p.variance = pr.has("variance") ? pr.number("variance") : std::pow(pr.number("sd"), 2);
    if (p.variance < 0.0) pr.fail("variance must be nonnegative");
  } else {
    const auto m = read_moments(r.sub("moments"), cfg);
    const VectorXd w = r.vector("weights");
    if (w.size() != m.moments.asset_count()) r.fail("'weights' must have one entry per asset");
    p.mean = m.moments.mu().dot(w);
    p.variance = w.dot(m.moments.sigma() * w);
  }
  const std::string kind = r.string("kind", "circulant");
  if (kind != "circulant" && kind != "toeplitz") r.fail("'kind' must be \"circulant\" or \"toeplitz\"");
  if (r.has("rho") && r.has("rho_bar")) r.fail("give at most one of 'rho' and 'rho_bar'");
  if (r.has("rho")) {
    AutocorrelationSpec s;
    s.horizon = p.q.horizon;
    s.rho = r.vector("rho");
    s.kind = kind == "toeplitz" ? CorrelationKind::GeneralToeplitz : CorrelationKind::CirculantSymmetric;
    if (s.rho.size() != p.q.horizon) r.fail("'rho' must list rho_0..rho_{T-1}");
    validate(s);
    p.rho_bar = p.q.horizon > 1 ? aggregate_rho(s) : 0.0;
    p.spec = s;
  } else {
    if (kind != "circulant") r.fail("'kind' needs an explicit 'rho'");
    p.rho_bar = r.number("rho_bar", 0.0);
    modified_scale(p.rho_bar, p.q.horizon);
  }
  p.exact = r.boolean("exact", false);
  if (p.exact && p.q.horizon > 16) r.fail("'exact' needs horizon <= 16");
  return p;
}

void run_growth(const RunConfig& cfg, ResultRecord& rec) {
  const auto p = parse_growth(cfg);
  GrowthResult g;
  std::string method = "closed-form";
  std::optional<ProjectedMoments> pm;
  if (p.spec) {
    pm.emplace(p.mean, p.variance, validate(*p.spec));
    if (p.spec->kind == CorrelationKind::GeneralToeplitz) {
      g = approx_growth_rate_general(*pm, p.q);
      method = "toeplitz-aggregate-approximation";
    } else {
      g = worst_case_growth_rate(*pm, p.q);
    }
  } else {
    g = worst_case_growth_rate(p.mean, p.variance, p.rho_bar, p.q);
  }
  rec.outputs = {{"growth_rate", num(g.growth_rate)},
                 {"feasibility_margin", num(g.feasibility_margin)},
                 {"persistent_risk", num(g.persistent_risk)},
                 {"compounding_risk", num(g.compounding_risk)},
                 {"rho_bar", num(g.rho_bar_used)},
                 {"mean", num(p.mean)},
                 {"variance", num(p.variance)},
                 {"method", method}};
  ResultTable t{"summary",
                {{"growth_rate", "decimal/period"},
                 {"feasibility_margin", "decimal"},
                 {"persistent_risk", "decimal/period"},
                 {"compounding_risk", "decimal/period"},
                 {"rho_bar", ""}},
                {{num(g.growth_rate), num(g.feasibility_margin), num(g.persistent_risk), num(g.compounding_risk),
                  num(g.rho_bar_used)}}};
  if (p.exact) {
    if (!pm) pm.emplace(p.mean, p.variance, validate(AutocorrelationSpec::constant(p.q.horizon, p.rho_bar)));
    const double exact = exact_growth_rate(*pm, p.q);
    rec.outputs["exact_sdp"] = num(exact);
    rec.outputs["exact_minus_closed_form"] = num(exact - g.growth_rate);
    t.columns.push_back({"exact_sdp", "decimal/period"});
    t.rows[0].push_back(num(exact));
  }
  rec.tables.push_back(std::move(t));
}

// verify
VerifyOptions parse_verify(const RunConfig& cfg) {
  const Reader r(cfg.params, "verify");
  r.allow({"instances", "min_horizon", "max_horizon", "tolerance"});
  VerifyOptions o;
  o.instances = r.integer("instances", 10);
  o.min_horizon = r.integer("min_horizon", 2);
  o.max_horizon = r.integer("max_horizon", 10);
  if (o.instances < 1) r.fail("'instances' must be positive");
  if (o.min_horizon < 1 || o.max_horizon < o.min_horizon || o.max_horizon > 16) {
    r.fail("need 1 <= min_horizon <= max_horizon <= 16");
  }
  if (r.number("tolerance", 1e-5) <= 0.0) r.fail("'tolerance' must be positive");
  return o;
}

void run_verify(const RunConfig& cfg, ResultRecord& rec) {
  const auto o = parse_verify(cfg);
  const double tol = Reader(cfg.params, "verify").number("tolerance", 1e-5);
  std::mt19937_64 rng(cfg.seed);
  const auto inst = verify_random_instances(o, rng);
  ResultTable t{"instances",
                {{"horizon", "periods"},
                 {"epsilon", ""},
                 {"mean", "decimal/period"},
                 {"sd", "decimal/period"},
                 {"rho_bar", ""},
                 {"closed_form", "decimal/period"},
                 {"sdp", "decimal/period"},
                 {"socp", "decimal/period"},
                 {"closed_minus_sdp", "decimal/period"},
                 {"socp_minus_sdp", "decimal/period"},
                 {"projection_residual", ""}},
                {}};
  double worst_closed = 0.0, worst_socp = 0.0, worst_shift = 0.0, worst_residual = 0.0;
  for (const auto& v : inst) {
    worst_closed = std::max(worst_closed, std::abs(v.closed_form - v.sdp) / std::max(1.0, std::abs(v.closed_form)));
    worst_socp = std::max(worst_socp, std::abs(v.socp - v.sdp));
    worst_shift = std::max(worst_shift, v.projection_objective_shift);
    worst_residual = std::max(worst_residual, v.projection_residual);
    t.rows.push_back({v.horizon, num(v.epsilon), num(v.mean), num(v.sd), num(v.rho_bar), num(v.closed_form),
                      num(v.sdp), num(v.socp), num(v.closed_form - v.sdp), num(v.socp - v.sdp),
                      num(v.projection_residual)});
  }
  rec.outputs = {{"instances", static_cast<int>(inst.size())},
                 {"max_closed_vs_sdp", num(worst_closed)},
                 {"max_socp_vs_sdp", num(worst_socp)},
                 {"max_projection_objective_shift", num(worst_shift)},
                 {"max_projection_residual", num(worst_residual)},
                 {"tolerance", num(tol)},
                 {"agree", worst_closed <= tol && worst_socp <= tol}};
  rec.tables.push_back(std::move(t));
}

// optimize
struct OptimizeParams {
  LabeledMoments m;
  PortfolioConstraintSet set;
  GrowthQuery q;
  double rho_bar;
  OptimizerOptions options;
};

OptimizeParams parse_optimize(const RunConfig& cfg) {
  const Reader r(cfg.params, "optimize");
  r.allow({"moments", "epsilon", "horizon", "rho_bar", "constraints", "method"});
  auto m = read_moments(r.sub("moments"), cfg);
  auto set = read_constraints(r, m.moments.asset_count());
  const auto q = read_query(r);
  const double rho_bar = r.number("rho_bar", 0.0);
  modified_scale(rho_bar, q.horizon);
  OptimizerOptions o;
  const std::string method = r.string("method", "auto");
  if (method == "auto") o.method = OptimizerMethod::Auto;
  else if (method == "conic") o.method = OptimizerMethod::Conic;
  else if (method == "projected-gradient") o.method = OptimizerMethod::ProjectedGradient;
  else r.fail("'method' must be auto, conic or projected-gradient");
  return {std::move(m), std::move(set), q, rho_bar, o};
}

void run_optimize(const RunConfig& cfg, ResultRecord& rec) {
  const auto p = parse_optimize(cfg);
  const auto res = robust_growth_portfolio(p.m.moments, p.rho_bar, p.q, p.set, p.options);
  const VectorXd& w = res.portfolio.weights;
  rec.outputs = {{"weights", weights_json(p.m.labels, w)},
                 {"growth_rate", num(res.growth.growth_rate)},
                 {"feasibility_margin", num(res.growth.feasibility_margin)},
                 {"persistent_risk", num(res.growth.persistent_risk)},
                 {"compounding_risk", num(res.growth.compounding_risk)},
                 {"expected_return", num(p.m.moments.mu().dot(w))},
                 {"variance", num(w.dot(p.m.moments.sigma() * w))},
                 {"precondition_certified", res.precondition_certified},
                 {"worst_vertex_margin", num(res.worst_vertex_margin)},
                 {"method", res.method}};
  rec.tables.push_back(weights_table(p.m.labels, {{"weight", w}}));
}

// frontier
struct FrontierParams {
  LabeledMoments m;
  PortfolioConstraintSet set;
  GrowthQuery q;
  std::vector<double> rho_bars;
  int points;
};

FrontierParams parse_frontier(const RunConfig& cfg) {
  const Reader r(cfg.params, "frontier");
  r.allow({"moments", "epsilon", "horizon", "rho_bars", "points", "constraints"});
  auto m = read_moments(r.sub("moments"), cfg);
  auto set = read_constraints(r, m.moments.asset_count());
  const auto q = read_query(r);
  std::vector<double> rho_bars{0.0, 0.05, 0.10, 0.15, 0.20};
  if (r.has("rho_bars")) {
    const VectorXd v = r.vector("rho_bars");
    rho_bars.assign(v.data(), v.data() + v.size());
  }
  for (double rb : rho_bars) modified_scale(rb, q.horizon);
  const int points = r.integer("points", 30);
  if (points < 2) r.fail("'points' must be at least 2");
  return {std::move(m), std::move(set), q, rho_bars, points};
}

void run_frontier(const RunConfig& cfg, ResultRecord& rec) {
  const auto p = parse_frontier(cfg);
  const auto frontier = efficient_frontier(p.m.moments, p.set, p.points);

  ResultTable curve{"frontier", {{"point", ""}, {"expected_return", "decimal/period"}, {"variance", "decimal^2/period^2"}}, {}};
  for (double rb : p.rho_bars) curve.columns.push_back({"growth_rho_bar_" + fmt_g(rb), "decimal/period"});
  int undefined = 0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const auto& f = frontier[i];
    std::vector<json> row{static_cast<int>(i), num(f.expected_return), num(f.variance)};
    for (double rb : p.rho_bars) {
      // the closed form is undefined where the margin fails; leave the cell empty
      try {
        row.push_back(num(portfolio_growth(p.m.moments, f.portfolio, rb, p.q).growth_rate));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PreconditionViolated) throw;
        row.push_back(nullptr);
        ++undefined;
      }
    }
    curve.rows.push_back(std::move(row));
  }

  ResultTable opt{"optimal",
                  {{"rho_bar", ""},
                   {"growth_rate", "decimal/period"},
                   {"expected_return", "decimal/period"},
                   {"variance", "decimal^2/period^2"}},
                  {}};
  std::vector<std::pair<std::string, VectorXd>> wcols;
  json per_rho = json::array();
  for (double rb : p.rho_bars) {
    const auto res = robust_growth_portfolio(p.m.moments, rb, p.q, p.set);
    const VectorXd& w = res.portfolio.weights;
    const double var = w.dot(p.m.moments.sigma() * w);
    opt.rows.push_back({num(rb), num(res.growth.growth_rate), num(p.m.moments.mu().dot(w)), num(var)});
    wcols.emplace_back("rho_bar_" + fmt_g(rb), w);
    per_rho.push_back({{"rho_bar", num(rb)},
                       {"growth_rate", num(res.growth.growth_rate)},
                       {"variance", num(var)},
                       {"weights", weights_json(p.m.labels, w)}});
  }
  rec.outputs = {{"points", static_cast<int>(frontier.size())},
                 {"undefined_growth_cells", undefined},
                 {"optimal", per_rho}};
  rec.tables.push_back(std::move(curve));
  rec.tables.push_back(std::move(opt));
  rec.tables.push_back(weights_table(p.m.labels, wcols));
}

// simulate
struct SimulateParams {
  LabeledMoments m;
  double epsilon;
  std::vector<int> horizons;
  std::optional<double> rho_bar;  // unset: -1/T
  int scenarios;
  int threads;
  bool sharpe_samples;
};

SimulateParams parse_simulate(const RunConfig& cfg) {
  const Reader r(cfg.params, "simulate");
  r.allow({"moments", "epsilon", "horizons", "rho_bar", "scenarios", "threads", "sharpe_samples"});
  SimulateParams p{read_moments(r.sub("moments"), cfg), r.number("epsilon", 0.1), read_horizons(r, "horizons", {12, 24, 48}),
                   std::nullopt, r.integer("scenarios", 10000), r.integer("threads", 1), r.boolean("sharpe_samples", true)};
  if (r.has("rho_bar")) {
    if (r.raw("rho_bar").is_string()) {
      if (r.string("rho_bar") != "minus_one_over_T") r.fail("'rho_bar' must be a number or \"minus_one_over_T\"");
    } else {
      p.rho_bar = r.number("rho_bar");
    }
  }
  for (int t : p.horizons) {
    if (t < 2) r.fail("horizons must be at least 2");
    SimulationConfig sc{p.scenarios, cfg.seed, p.epsilon, p.m.moments,
                        AutocorrelationSpec::constant(t, p.rho_bar.value_or(-1.0 / t)), p.threads};
    sc.check();
  }
  return p;
}

void run_simulate(const RunConfig& cfg, ResultRecord& rec) {
  const auto p = parse_simulate(cfg);
  ResultTable summary{"outperformance",
                      {{"horizon", "periods"},
                       {"rho_bar", ""},
                       {"growth_aware", "decimal/period"},
                       {"growth_unaware", "decimal/period"},
                       {"outperformance", ""},
                       {"median_sharpe_aware", ""},
                       {"median_sharpe_unaware", ""},
                       {"median_sharpe_outperformance", ""}},
                      {}};
  ResultTable sharpe{"sharpe",
                     {{"horizon", "periods"},
                      {"scenario", ""},
                      {"sharpe_aware", ""},
                      {"sharpe_unaware", ""},
                      {"sharpe_outperformance", ""}},
                     {}};
  std::vector<std::pair<std::string, VectorXd>> wcols;
  json runs = json::array();
  for (int t : p.horizons) {
    const double rb = p.rho_bar.value_or(-1.0 / t);
    // each horizon draws from its own stream so adding a horizon leaves the others unchanged
    const std::uint64_t seed = cfg.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t));
    const auto run = autocorrelation_outperformance(p.m.moments, t, rb, p.epsilon, p.scenarios, seed, p.threads);
    std::vector<double> gaps;
    for (std::size_t k = 0; k < run.sharpe_aware.size(); ++k) {
      const double a = run.sharpe_aware[k], u = run.sharpe_unaware[k];
      const double gap = (a == 0.0 && u == 0.0) ? std::nan("") : relative_gap(a, u);
      if (std::isfinite(gap)) gaps.push_back(gap);
      if (p.sharpe_samples) sharpe.rows.push_back({t, static_cast<int>(k), num(a), num(u), num(gap)});
    }
    summary.rows.push_back({t, num(rb), num(run.growth_aware), num(run.growth_unaware), num(run.outperformance),
                            num(summary_quantile(run.sharpe_aware, 0.5)), num(summary_quantile(run.sharpe_unaware, 0.5)),
                            gaps.empty() ? json(nullptr) : num(summary_quantile(gaps, 0.5))});
    wcols.emplace_back("aware_T" + std::to_string(t), run.aware.weights);
    wcols.emplace_back("unaware_T" + std::to_string(t), run.unaware.weights);
    runs.push_back({{"horizon", t},
                    {"rho_bar", num(rb)},
                    {"seed", seed},
                    {"outperformance", num(run.outperformance)},
                    {"growth_aware", num(run.growth_aware)},
                    {"growth_unaware", num(run.growth_unaware)}});
  }
  rec.outputs = {{"runs", runs}, {"scenarios", p.scenarios}, {"epsilon", num(p.epsilon)}};
  rec.tables.push_back(std::move(summary));
  if (p.sharpe_samples) rec.tables.push_back(std::move(sharpe));
  rec.tables.push_back(weights_table(p.m.labels, wcols));
}

// approx-error
ApproxErrorOptions parse_approx(const RunConfig& cfg) {
  const Reader r(cfg.params, "approx-error");
  r.allow({"horizons", "repetitions", "rho_range", "epsilon", "mean", "sd", "max_sdp_horizon"});
  ApproxErrorOptions o;
  std::vector<int> def;
  for (int t = 4; t <= 72; t += 4) def.push_back(t);
  o.horizons = read_horizons(r, "horizons", def);
  o.repetitions = r.integer("repetitions", 20);
  if (o.repetitions < 1) r.fail("'repetitions' must be positive");
  if (r.has("rho_range")) {
    const VectorXd v = r.vector("rho_range");
    if (v.size() != 2 || !(v[0] <= v[1])) r.fail("'rho_range' must be [lo, hi] with lo <= hi");
    o.rho_lo = v[0];
    o.rho_hi = v[1];
  }
  o.epsilon = r.number("epsilon", 0.15);
  o.mean = r.number("mean", 0.15);
  o.sd = r.number("sd", 0.20);
  if (o.sd < 0.0) r.fail("'sd' must be nonnegative");
  o.exact.max_sdp_horizon = r.integer("max_sdp_horizon", 16);
  if (o.exact.max_sdp_horizon < 1 || o.exact.max_sdp_horizon > 16) r.fail("'max_sdp_horizon' must lie in 1..16");
  for (int t : o.horizons) GrowthQuery{o.epsilon, t}.check();
  return o;
}

void run_approx(const RunConfig& cfg, ResultRecord& rec) {
  const auto o = parse_approx(cfg);
  std::mt19937_64 rng(cfg.seed);
  const auto rows = approx_error_sweep(o, rng);
  ResultTable t{"errors",
                {{"horizon", "periods"},
                 {"oracle", ""},
                 {"approx_median", "decimal/period"},
                 {"error_min", ""},
                 {"error_q25", ""},
                 {"error_median", ""},
                 {"error_q75", ""},
                 {"error_max", ""}},
                {}};
  ResultTable raw{"draws",
                  {{"horizon", "periods"}, {"repetition", ""}, {"approx", "decimal/period"}, {"exact", "decimal/period"},
                   {"relative_error", ""}},
                  {}};
  double worst = -std::numeric_limits<double>::infinity();
  int with_oracle = 0;
  std::vector<int> approx_only;
  for (const auto& row : rows) {
    std::vector<json> cells{row.horizon, row.exact_available() ? "sdp" : "approximation-only",
                            num(summary_quantile(row.approx, 0.5))};
    if (row.exact_available()) {
      ++with_oracle;
      for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) cells.push_back(num(summary_quantile(row.relative_error, p)));
      worst = std::max(worst, *std::max_element(row.relative_error.begin(), row.relative_error.end()));
    } else {
      approx_only.push_back(row.horizon);
      for (int i = 0; i < 5; ++i) cells.push_back(nullptr);
    }
    t.rows.push_back(std::move(cells));
    for (std::size_t k = 0; k < row.approx.size(); ++k) {
      raw.rows.push_back({row.horizon, static_cast<int>(k), num(row.approx[k]),
                          row.exact_available() ? num(row.exact[k]) : json(nullptr),
                          row.exact_available() ? num(row.relative_error[k]) : json(nullptr)});
    }
  }
  rec.outputs = {{"horizons_with_oracle", with_oracle},
                 {"approximation_only_horizons", approx_only},
                 {"max_relative_error", with_oracle ? num(worst) : json(nullptr)}};
  rec.tables.push_back(std::move(t));
  rec.tables.push_back(std::move(raw));
}

// estimate-moments
struct EstimateParams {
  ReturnsTable table;
  std::vector<Eigen::Index> assets;
};

EstimateParams parse_estimate(const RunConfig& cfg) {
  const Reader r(cfg.params, "estimate-moments");
  r.allow({"csv", "assets"});
  EstimateParams p{parse_returns_csv(resolve(cfg, r.string("csv"))), {}};
  if (r.has("assets")) {
    const json& a = r.raw("assets");
    if (!a.is_array() || a.empty()) r.fail("'assets' must be a non-empty array");
    for (const auto& v : a) {
      Eigen::Index i = -1;
      if (v.is_number_integer()) i = v.get<Eigen::Index>();
      if (v.is_string()) {
        const auto it = std::find(p.table.labels.begin(), p.table.labels.end(), v.get<std::string>());
        if (it != p.table.labels.end()) i = it - p.table.labels.begin();
      }
      if (i < 0 || i >= static_cast<Eigen::Index>(p.table.labels.size())) r.fail("unknown asset " + v.dump());
      p.assets.push_back(i);
    }
  }
  return p;
}

void run_estimate(const RunConfig& cfg, ResultRecord& rec) {
  auto p = parse_estimate(cfg);
  std::vector<std::string> labels = p.table.labels;
  MatrixXd returns = p.table.returns;
  if (!p.assets.empty()) {
    labels.clear();
    returns = p.table.returns(Eigen::all, p.assets);
    for (auto i : p.assets) labels.push_back(p.table.labels[static_cast<std::size_t>(i)]);
  }
  const auto m = estimate_moments(returns);
  ResultTable t{"moments", {{"asset", ""}, {"mean", "percent/period"}, {"sd", "percent/period"}}, {}};
  for (Eigen::Index i = 0; i < m.asset_count(); ++i) {
    t.rows.push_back({labels[static_cast<std::size_t>(i)], num(100.0 * m.mu()[i]), num(100.0 * std::sqrt(m.sigma()(i, i)))});
  }
  rec.outputs = {{"labels", labels},
                 {"observations", static_cast<int>(returns.rows())},
                 {"first_date", p.table.dates.front()},
                 {"last_date", p.table.dates.back()},
                 {"skipped_lines", p.table.skipped_lines},
                 {"mean", to_json_vector(m.mu())},
                 {"covariance", to_json_matrix(m.sigma())}};
  rec.tables.push_back(std::move(t));
}

const std::map<std::string, Command>& registry() {
  static const std::map<std::string, Command> r{
      {"growth", {[](const RunConfig& c) { parse_growth(c); }, run_growth}},
      {"verify", {[](const RunConfig& c) { parse_verify(c); }, run_verify}},
      {"optimize", {[](const RunConfig& c) { parse_optimize(c); }, run_optimize}},
      {"frontier", {[](const RunConfig& c) { parse_frontier(c); }, run_frontier}},
      {"simulate", {[](const RunConfig& c) { parse_simulate(c); }, run_simulate}},
      {"approx-error", {[](const RunConfig& c) { parse_approx(c); }, run_approx}},
      {"estimate-moments", {[](const RunConfig& c) { parse_estimate(c); }, run_estimate}},
  };
  return r;
}

const Command& lookup(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) invalid("unknown command '" + name + "'");
  return it->second;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"growth",   "verify",       "optimize",        "frontier",
                                              "simulate", "approx-error", "estimate-moments"};
  return names;
}

void validate_config(const RunConfig& cfg) { lookup(cfg.command).validate(cfg); }

ResultRecord run_command(const RunConfig& cfg) {
  const auto& cmd = lookup(cfg.command);
  cmd.validate(cfg);
  ResultRecord rec;
  rec.command = cfg.command;
  rec.inputs = cfg.params;
  rec.seed = cfg.seed;
  rec.software_version = RGOP_VERSION;
  cmd.run(cfg, rec);
  rec.timestamp = utc_timestamp();
  return rec;
}

}  // namespace rgop
