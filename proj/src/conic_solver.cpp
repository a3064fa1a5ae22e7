// Dense primal-dual interior-point solver for small conic programs.
//
// Standard form (after conversion from ConicProblem):
//   minimize c^T x  s.t.  G x + s = h,  A x = b,  s in K
// with K a product of one nonnegative orthant, second-order cones and PSD
// cones (svec storage). The iteration follows the homogeneous self-dual
// embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

#include "rgop/conic.hpp"
#include "rgop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgop {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepFraction = 0.99;
constexpr double kRegularization = 1e-11;

int svec_size(int n) { return n * (n + 1) / 2; }

int svec_index(int n, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

VectorXd svec(const MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  VectorXd v(svec_size(n));
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) v[svec_index(n, i, j)] = i == j ? x(i, j) : std::numbers::sqrt2 * x(i, j);
  }
  return v;
}

MatrixXd smat(const Eigen::Ref<const VectorXd>& v, int n) {
  MatrixXd x(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double value = i == j ? v[svec_index(n, i, j)] : v[svec_index(n, i, j)] / std::numbers::sqrt2;
      x(i, j) = value;
      x(j, i) = value;
    }
  }
  return x;
}

enum class BlockType { Nonnegative, SecondOrder, Semidefinite };

struct Block {
  BlockType type;
  int offset;
  int length;  // entries in the stacked vector
  int order;   // matrix order for PSD blocks
};

struct StandardForm {
  MatrixXd G;
  VectorXd h;
  MatrixXd A;
  VectorXd b;
  VectorXd c;
  std::vector<Block> blocks;
  int degree = 0;
};

StandardForm to_standard_form(const ConicProblem& prob) {
  const int n = prob.variable_count;
  std::vector<VectorXd> g_rows;
  std::vector<double> h_vals;
  std::vector<VectorXd> a_rows;
  std::vector<double> b_vals;

  for (const auto& lc : prob.linear_constraints) {
    switch (lc.relation) {
      case Relation::Equal:
        a_rows.push_back(lc.coefficients);
        b_vals.push_back(lc.bound);
        break;
      case Relation::LessEqual:
        g_rows.push_back(lc.coefficients);
        h_vals.push_back(lc.bound);
        break;
      case Relation::GreaterEqual:
        g_rows.push_back(-lc.coefficients);
        h_vals.push_back(-lc.bound);
        break;
    }
  }

  StandardForm sf;
  const int nonneg = static_cast<int>(g_rows.size());
  int m = nonneg;
  if (nonneg > 0) sf.blocks.push_back({BlockType::Nonnegative, 0, nonneg, 0});
  for (const auto& soc : prob.soc_constraints) {
    const int len = static_cast<int>(soc.coefficients.rows());
    sf.blocks.push_back({BlockType::SecondOrder, m, len, 0});
    m += len;
  }
  for (const auto& psd : prob.psd_constraints) {
    const int len = svec_size(psd.dim);
    sf.blocks.push_back({BlockType::Semidefinite, m, len, psd.dim});
    m += len;
  }

  sf.G = MatrixXd::Zero(m, n);
  sf.h = VectorXd::Zero(m);
  for (int r = 0; r < nonneg; ++r) {
    sf.G.row(r) = g_rows[static_cast<std::size_t>(r)].transpose();
    sf.h[r] = h_vals[static_cast<std::size_t>(r)];
  }
  std::size_t block = nonneg > 0 ? 1 : 0;
  for (const auto& soc : prob.soc_constraints) {
    const Block& blk = sf.blocks[block++];
    if (soc.kind == ConeKind::Plain) {
      sf.G.middleRows(blk.offset, blk.length) = -soc.coefficients;
      sf.h.segment(blk.offset, blk.length) = soc.offset;
    } else {
      // u0 u1 >= ||u2||^2  <=>  (u0 + u1, u0 - u1, 2 u2) in the plain cone.
      MatrixXd rot = MatrixXd::Zero(blk.length, blk.length);
      rot(0, 0) = 1.0;
      rot(0, 1) = 1.0;
      rot(1, 0) = 1.0;
      rot(1, 1) = -1.0;
      for (int k = 2; k < blk.length; ++k) rot(k, k) = 2.0;
      sf.G.middleRows(blk.offset, blk.length) = -rot * soc.coefficients;
      sf.h.segment(blk.offset, blk.length) = rot * soc.offset;
    }
  }
  for (const auto& psd : prob.psd_constraints) {
    const Block& blk = sf.blocks[block++];
    const int d = psd.dim;
    sf.h.segment(blk.offset, blk.length) = svec(psd.constant);
    for (const auto& term : psd.terms) {
      const double weight = term.row == term.col ? 1.0 : std::numbers::sqrt2;
      sf.G(blk.offset + svec_index(d, term.row, term.col), term.variable) -= weight * term.value;
    }
  }

  const int p = static_cast<int>(a_rows.size());
  sf.A = MatrixXd::Zero(p, n);
  sf.b = VectorXd::Zero(p);
  for (int r = 0; r < p; ++r) {
    sf.A.row(r) = a_rows[static_cast<std::size_t>(r)].transpose();
    sf.b[r] = b_vals[static_cast<std::size_t>(r)];
  }
  sf.c = -prob.objective;

  for (const auto& blk : sf.blocks) {
    sf.degree += blk.type == BlockType::Nonnegative ? blk.length
                 : blk.type == BlockType::SecondOrder ? 1
                                                      : blk.order;
  }
  return sf;
}

// ----------------------------------------------------------------------------
// Jordan algebra on the stacked cone vector.

VectorXd identity(const std::vector<Block>& blocks, int m) {
  VectorXd e = VectorXd::Zero(m);
  for (const auto& blk : blocks) {
    switch (blk.type) {
      case BlockType::Nonnegative: e.segment(blk.offset, blk.length).setOnes(); break;
      case BlockType::SecondOrder: e[blk.offset] = 1.0; break;
      case BlockType::Semidefinite:
        for (int i = 0; i < blk.order; ++i) e[blk.offset + svec_index(blk.order, i, i)] = 1.0;
        break;
    }
  }
  return e;
}

VectorXd jordan_product(const std::vector<Block>& blocks, const VectorXd& u, const VectorXd& v) {
  VectorXd out(u.size());
  for (const auto& blk : blocks) {
    auto us = u.segment(blk.offset, blk.length);
    auto vs = v.segment(blk.offset, blk.length);
    switch (blk.type) {
      case BlockType::Nonnegative:
        out.segment(blk.offset, blk.length) = us.cwiseProduct(vs);
        break;
      case BlockType::SecondOrder:
        out[blk.offset] = us.dot(vs);
        out.segment(blk.offset + 1, blk.length - 1) =
            us[0] * vs.tail(blk.length - 1) + vs[0] * us.tail(blk.length - 1);
        break;
      case BlockType::Semidefinite: {
        const MatrixXd um = smat(us, blk.order);
        const MatrixXd vm = smat(vs, blk.order);
        out.segment(blk.offset, blk.length) = svec(0.5 * (um * vm + vm * um));
        break;
      }
    }
  }
  return out;
}

// Solves lambda o x = r for x, with lambda diagonal inside PSD blocks.
VectorXd jordan_divide(const std::vector<Block>& blocks, const VectorXd& lambda, const VectorXd& r) {
  VectorXd x(r.size());
  for (const auto& blk : blocks) {
    auto ls = lambda.segment(blk.offset, blk.length);
    auto rs = r.segment(blk.offset, blk.length);
    switch (blk.type) {
      case BlockType::Nonnegative:
        x.segment(blk.offset, blk.length) = rs.cwiseQuotient(ls);
        break;
      case BlockType::SecondOrder: {
        const int k = blk.length - 1;
        const double det = ls[0] * ls[0] - ls.tail(k).squaredNorm();
        const double x0 = (ls[0] * rs[0] - ls.tail(k).dot(rs.tail(k))) / det;
        x[blk.offset] = x0;
        x.segment(blk.offset + 1, k) = (rs.tail(k) - x0 * ls.tail(k)) / ls[0];
        break;
      }
      case BlockType::Semidefinite: {
        const int d = blk.order;
        for (int j = 0; j < d; ++j) {
          for (int i = j; i < d; ++i) {
            const int idx = svec_index(d, i, j);
            const double li = ls[svec_index(d, i, i)];
            const double lj = ls[svec_index(d, j, j)];
            x[blk.offset + idx] = 2.0 * rs[idx] / (li + lj);
          }
        }
        break;
      }
    }
  }
  return x;
}

double soc_step(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& d) {
  const Index k = x.size() - 1;
  const double a = d[0] * d[0] - d.tail(k).squaredNorm();
  const double b = x[0] * d[0] - x.tail(k).dot(d.tail(k));
  const double c = std::max(x[0] * x[0] - x.tail(k).squaredNorm(), 0.0);
  // smallest positive root of a t^2 + 2 b t + c
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    return b < 0.0 ? -c / (2.0 * b) : kInf;
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double qq = -(b + std::copysign(sq, b));
  double best = kInf;
  for (double root : {qq / a, qq != 0.0 ? c / qq : kInf}) {
    if (root > 0.0 && root < best) best = root;
  }
  return best;
}

// Largest t >= 0 with lambda + t d in the cone (lambda scaled: PSD blocks diagonal).
double max_step(const std::vector<Block>& blocks, const VectorXd& lambda, const VectorXd& d) {
  double step = kInf;
  for (const auto& blk : blocks) {
    auto ls = lambda.segment(blk.offset, blk.length);
    auto ds = d.segment(blk.offset, blk.length);
    switch (blk.type) {
      case BlockType::Nonnegative:
        for (int i = 0; i < blk.length; ++i) {
          if (ds[i] < 0.0) step = std::min(step, -ls[i] / ds[i]);
        }
        break;
      case BlockType::SecondOrder:
        step = std::min(step, soc_step(ls, ds));
        break;
      case BlockType::Semidefinite: {
        const int n = blk.order;
        VectorXd inv_sqrt(n);
        for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(ls[svec_index(n, i, i)]);
        const MatrixXd scaled = inv_sqrt.asDiagonal() * smat(ds, n) * inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        if (lo < 0.0) step = std::min(step, -1.0 / lo);
        break;
      }
    }
  }
  return step;
}

// Smallest t with s + t e in the cone.
double interior_deficit(const std::vector<Block>& blocks, const VectorXd& s) {
  double t = -kInf;
  for (const auto& blk : blocks) {
    auto ss = s.segment(blk.offset, blk.length);
    switch (blk.type) {
      case BlockType::Nonnegative: t = std::max(t, -ss.minCoeff()); break;
      case BlockType::SecondOrder: t = std::max(t, ss.tail(blk.length - 1).norm() - ss[0]); break;
      case BlockType::Semidefinite: {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(ss, blk.order), Eigen::EigenvaluesOnly);
        t = std::max(t, -es.eigenvalues().minCoeff());
        break;
      }
    }
  }
  return t;
}

// ----------------------------------------------------------------------------
// Nesterov-Todd scaling: W z = W^{-T} s = lambda.

struct Scaling {
  MatrixXd w;       // W
  MatrixXd w_inv_t;  // W^{-T}
  VectorXd lambda;
};

bool compute_scaling(const std::vector<Block>& blocks, const VectorXd& s, const VectorXd& z, Scaling& out) {
  const Index m = s.size();
  out.w = MatrixXd::Zero(m, m);
  out.w_inv_t = MatrixXd::Zero(m, m);
  out.lambda = VectorXd::Zero(m);
  for (const auto& blk : blocks) {
    const int o = blk.offset;
    const int len = blk.length;
    auto ss = s.segment(o, len);
    auto zs = z.segment(o, len);
    switch (blk.type) {
      case BlockType::Nonnegative:
        for (int i = 0; i < len; ++i) {
          if (!(ss[i] > 0.0 && zs[i] > 0.0)) return false;
          const double wi = std::sqrt(ss[i] / zs[i]);
          out.w(o + i, o + i) = wi;
          out.w_inv_t(o + i, o + i) = 1.0 / wi;
          out.lambda[o + i] = std::sqrt(ss[i] * zs[i]);
        }
        break;
      case BlockType::SecondOrder: {
        const int k = len - 1;
        const double s_det = ss[0] * ss[0] - ss.tail(k).squaredNorm();
        const double z_det = zs[0] * zs[0] - zs.tail(k).squaredNorm();
        if (!(s_det > 0.0 && z_det > 0.0 && ss[0] > 0.0 && zs[0] > 0.0)) return false;
        const VectorXd s_bar = ss / std::sqrt(s_det);
        const VectorXd z_bar = zs / std::sqrt(z_det);
        const double gamma = std::sqrt(0.5 * (1.0 + s_bar.dot(z_bar)));
        VectorXd w_bar = s_bar;
        w_bar[0] += z_bar[0];
        w_bar.tail(k) -= z_bar.tail(k);
        w_bar /= 2.0 * gamma;
        const double beta = std::pow(s_det / z_det, 0.25);
        MatrixXd hyp(len, len);
        hyp(0, 0) = w_bar[0];
        hyp.block(0, 1, 1, k) = w_bar.tail(k).transpose();
        hyp.block(1, 0, k, 1) = w_bar.tail(k);
        hyp.block(1, 1, k, k) = MatrixXd::Identity(k, k) +
                                w_bar.tail(k) * w_bar.tail(k).transpose() / (1.0 + w_bar[0]);
        MatrixXd hyp_inv = hyp;
        hyp_inv.block(0, 1, 1, k) *= -1.0;
        hyp_inv.block(1, 0, k, 1) *= -1.0;
        out.w.block(o, o, len, len) = beta * hyp;
        out.w_inv_t.block(o, o, len, len) = hyp_inv / beta;
        out.lambda.segment(o, len) = beta * hyp * zs;
        break;
      }
      case BlockType::Semidefinite: {
        const int n = blk.order;
        Eigen::LLT<MatrixXd> ls(smat(ss, n));
        Eigen::LLT<MatrixXd> lz(smat(zs, n));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const MatrixXd l1 = ls.matrixL();
        const MatrixXd l2 = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(l2.transpose() * l1, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd sv = svd.singularValues();
        if (!(sv.minCoeff() > 0.0)) return false;
        const MatrixXd r = l1 * svd.matrixV() * sv.cwiseSqrt().cwiseInverse().asDiagonal();
        const MatrixXd r_inv = sv.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
                               l1.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
        VectorXd basis = VectorXd::Zero(len);
        for (int k = 0; k < len; ++k) {
          basis.setZero();
          basis[k] = 1.0;
          const MatrixXd ek = smat(basis, n);
          out.w.block(o, o + k, len, 1) = svec(r.transpose() * ek * r);
          out.w_inv_t.block(o, o + k, len, 1) = svec(r_inv * ek * r_inv.transpose());
        }
        for (int i = 0; i < n; ++i) out.lambda[o + svec_index(n, i, i)] = sv[i];
        break;
      }
    }
  }
  return out.lambda.allFinite() && out.w.allFinite() && out.w_inv_t.allFinite();
}

// ----------------------------------------------------------------------------
// Scaled KKT system
//   [ 0  A^T  Gs^T ] [dx ]   [bx]
//   [ A  0    0    ] [dy ] = [by]
//   [ Gs 0   -I    ] [dzs]   [bz]

class KktSystem {
 public:
  KktSystem(const MatrixXd& a, const MatrixXd& gs) : n_(gs.cols()), p_(a.rows()), m_(gs.rows()) {
    const Index dim = n_ + p_ + m_;
    k_ = MatrixXd::Zero(dim, dim);
    k_.block(0, n_, n_, p_) = a.transpose();
    k_.block(0, n_ + p_, n_, m_) = gs.transpose();
    k_.block(n_, 0, p_, n_) = a;
    k_.block(n_ + p_, 0, m_, n_) = gs;
    k_.block(n_ + p_, n_ + p_, m_, m_) = -MatrixXd::Identity(m_, m_);
    MatrixXd reg = k_;
    reg.diagonal().head(n_).array() += kRegularization;
    reg.diagonal().segment(n_, p_).array() -= kRegularization;
    lu_.compute(reg);
  }

  bool solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd& dx, VectorXd& dy,
             VectorXd& dz) const {
    VectorXd rhs(n_ + p_ + m_);
    rhs << bx, by, bz;
    VectorXd sol = lu_.solve(rhs);
    for (int refine = 0; refine < 3; ++refine) {
      const VectorXd res = rhs - k_ * sol;
      sol += lu_.solve(res);
    }
    if (!sol.allFinite()) return false;
    dx = sol.head(n_);
    dy = sol.segment(n_, p_);
    dz = sol.tail(m_);
    return true;
  }

 private:
  Index n_, p_, m_;
  MatrixXd k_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

struct Direction {
  VectorXd dx, dy, dz_scaled, ds_scaled, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options) {
  problem.check();
  const StandardForm sf = to_standard_form(problem);
  const auto& blocks = sf.blocks;
  const Index n = sf.G.cols();
  const Index m = sf.G.rows();
  const double tol = options.tol;

  ConicSolution result;
  result.variables = VectorXd::Zero(n);

  const double resx0 = std::max(1.0, sf.c.norm());
  const double resy0 = std::max(1.0, sf.b.norm());
  const double resz0 = std::max(1.0, sf.h.norm());
  const VectorXd e = identity(blocks, static_cast<int>(m));

  // Starting point from the two least-norm problems with W = I.
  VectorXd x, y, z, s;
  {
    KktSystem kkt(sf.A, sf.G);
    VectorXd zt, xt, yt;
    if (!kkt.solve(VectorXd::Zero(n), sf.b, sf.h, x, yt, zt) ||
        !kkt.solve(-sf.c, VectorXd::Zero(sf.b.size()), VectorXd::Zero(m), xt, y, z)) {
      result.status = SolveStatus::NumericalFailure;
      return result;
    }
    s = -zt;
    const double ts = interior_deficit(blocks, s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = interior_deficit(blocks, z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const VectorXd r1 = sf.A.transpose() * y + sf.G.transpose() * z + sf.c * tau;
    const VectorXd r2 = sf.A * x - sf.b * tau;
    const VectorXd r3 = sf.G * x + s - sf.h * tau;
    const double cx = sf.c.dot(x);
    const double by_hz = sf.b.dot(y) + sf.h.dot(z);
    const double r4 = kappa + cx + by_hz;

    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres = std::max(r2.norm() / resy0, r3.norm() / resz0) / tau;
    const double dres = r1.norm() / resx0 / tau;
    double relgap = kInf;
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;

    IterationRecord rec{iter, -pcost, -dcost, gap, pres, dres, 0.0};

    if (pres <= tol && dres <= tol && (gap <= tol || relgap <= tol)) {
      const VectorXd xhat = x / tau;
      const ResidualReport report = check_certificate(xhat, problem);
      if (report.max_violation <= tol || iter == options.max_iterations) {
        result.trace.push_back(rec);
        result.variables = xhat;
        result.objective_value = problem.objective.dot(xhat);
        result.max_residual = report.max_violation;
        result.iterations = iter;
        result.dual_cone = z / tau;
        result.status = report.max_violation <= tol ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
        return result;
      }
    }
    if (by_hz < 0.0) {
      const double pinf = (sf.A.transpose() * y + sf.G.transpose() * z).norm() / resx0 / -by_hz;
      if (pinf <= tol) {
        result.trace.push_back(rec);
        result.status = SolveStatus::Infeasible;
        result.iterations = iter;
        return result;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max((sf.A * x).norm() / resy0, (sf.G * x + s).norm() / resz0) / -cx;
      if (dinf <= tol) {
        result.trace.push_back(rec);
        result.status = SolveStatus::Unbounded;
        result.iterations = iter;
        return result;
      }
    }
    if (iter == options.max_iterations) {
      result.trace.push_back(rec);
      break;
    }

    Scaling sc;
    if (!compute_scaling(blocks, s, z, sc)) {
      result.trace.push_back(rec);
      break;
    }
    const MatrixXd gs = sc.w_inv_t * sf.G;
    const KktSystem kkt(sf.A, gs);
    const VectorXd& lambda = sc.lambda;
    const double mu = (s.dot(z) + tau * kappa) / (sf.degree + 1);

    VectorXd dx2, dy2, dz2;
    if (!kkt.solve(sf.c, -sf.b, sc.w_inv_t * (-sf.h), dx2, dy2, dz2)) {
      result.trace.push_back(rec);
      break;
    }
    const double denom = dz2.squaredNorm() + kappa / tau;

    auto direction = [&](double eta, const VectorXd& rc, double rg, Direction& d) {
      const VectorXd us = jordan_divide(blocks, lambda, rc);
      const VectorXd bx = -(1.0 - eta) * r1;
      const VectorXd by = -(1.0 - eta) * r2;
      const VectorXd bz = -(1.0 - eta) * r3 - sc.w.transpose() * us;
      const double btau = -(1.0 - eta) * r4 - rg / tau;
      VectorXd dx1, dy1, dz1s;
      if (!kkt.solve(bx, by, sc.w_inv_t * bz, dx1, dy1, dz1s)) return false;
      const VectorXd dz1 = sc.w_inv_t.transpose() * dz1s;
      d.dtau = (sf.c.dot(dx1) + sf.b.dot(dy1) + sf.h.dot(dz1) - btau) / denom;
      d.dx = dx1 - d.dtau * dx2;
      d.dy = dy1 - d.dtau * dy2;
      d.dz_scaled = dz1s - d.dtau * dz2;
      // ds from the linearized primal equation G dx + ds - h dtau = bz keeps the
      // primal residual from drifting when W is badly conditioned.
      d.ds = bz + sc.w.transpose() * us - sf.G * d.dx + sf.h * d.dtau;
      d.ds_scaled = sc.w_inv_t * d.ds;
      d.dkappa = (rg - kappa * d.dtau) / tau;
      return d.dx.allFinite() && std::isfinite(d.dtau);
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(blocks, lambda, d.ds_scaled), max_step(blocks, lambda, d.dz_scaled));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const VectorXd lambda_sq = jordan_product(blocks, lambda, lambda);
    Direction aff;
    if (!direction(0.0, -lambda_sq, -tau * kappa, aff)) {
      result.trace.push_back(rec);
      break;
    }
    const double step_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - step_aff, 3);

    const VectorXd rc = -lambda_sq - jordan_product(blocks, aff.ds_scaled, aff.dz_scaled) + sigma * mu * e;
    const double rg = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    Direction dir;
    if (!direction(sigma, rc, rg, dir)) {
      result.trace.push_back(rec);
      break;
    }
    const double alpha = std::min(1.0, kStepFraction * step_length(dir));
    rec.step = alpha;
    result.trace.push_back(rec);

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * (sc.w_inv_t.transpose() * dir.dz_scaled);
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    if (!(tau > 0.0) || !x.allFinite()) break;
  }

  result.status = SolveStatus::NumericalFailure;
  result.iterations = static_cast<int>(result.trace.size());
  if (tau > 0.0 && x.allFinite()) {
    result.variables = x / tau;
    result.objective_value = problem.objective.dot(result.variables);
    result.max_residual = check_certificate(result.variables, problem).max_violation;
  }
  return result;
}

}  // namespace rgop
