#include "rgop/circulant.hpp"

#include "rgop/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace rgop {
namespace {

constexpr double kSymmetryTol = 1e-12;

long double pairwise_sum(std::span<const long double> values) {
  if (values.size() <= 8) {
    long double acc = 0.0L;
    for (long double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// cos(2 pi k / T) for k = 0..T-1, cached per thread for the most recent T.
// Callers index it with (j * t) mod T, which keeps every argument in [0, 2 pi).
const std::vector<long double>& unit_root_cosines(long horizon) {
  thread_local std::vector<long double> table;
  if (static_cast<long>(table.size()) != horizon) {
    table.resize(static_cast<std::size_t>(horizon));
    for (long k = 0; k < horizon; ++k) {
      table[static_cast<std::size_t>(k)] = std::cos(2.0L * std::numbers::pi_v<long double> *
                                                    static_cast<long double>(k) / static_cast<long double>(horizon));
    }
  }
  return table;
}

void require_symmetric(const CirculantVector& c) {
  if (!c.symmetric()) {
    throw Error(ErrorCode::NotSymmetric, "circulant first row must satisfy c_t = c_{T-t}");
  }
}

// FFTW planning is not thread-safe; execution on a private plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CirculantVector::CirculantVector(Eigen::VectorXd first_row) : first_row_(std::move(first_row)) {
  if (first_row_.size() < 1) {
    throw Error(ErrorCode::InvalidArgument, "circulant vector must have length >= 1");
  }
  const Eigen::Index n = first_row_.size();
  const double scale = std::max(1.0, first_row_.cwiseAbs().maxCoeff());
  symmetric_ = true;
  for (Eigen::Index t = 1; t < n; ++t) {
    if (std::abs(first_row_[t] - first_row_[n - t]) > kSymmetryTol * scale) {
      symmetric_ = false;
      break;
    }
  }
}

Eigen::VectorXd eigenvalues_symmetric_direct(const CirculantVector& c) {
  require_symmetric(c);
  const long n = static_cast<long>(c.size());
  const Eigen::VectorXd& row = c.first_row();
  Eigen::VectorXd out(n);
  const auto& cosines = unit_root_cosines(n);
  std::vector<long double> terms(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    for (long t = 0; t < n; ++t) {
      terms[static_cast<std::size_t>(t)] =
          static_cast<long double>(row[t]) * cosines[static_cast<std::size_t>((j * t) % n)];
    }
    out[j] = static_cast<double>(pairwise_sum(terms));
  }
  return out;
}

Eigen::VectorXd eigenvalues_symmetric_fft(const CirculantVector& c) {
  require_symmetric(c);
  const int n = static_cast<int>(c.size());
  std::vector<double> in(c.first_row().data(), c.first_row().data() + n);
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  Eigen::VectorXd lambda(n);
  for (int j = 0; j <= n / 2; ++j) lambda[j] = out[j][0];
  for (int j = n / 2 + 1; j < n; ++j) lambda[j] = lambda[n - j];
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  return lambda;
}

Eigen::VectorXd eigenvalues_symmetric(const CirculantVector& c) {
  if (c.size() <= kDirectEigenvalueLimit) return eigenvalues_symmetric_direct(c);
  return eigenvalues_symmetric_fft(c);
}

Eigen::MatrixXd materialize(const CirculantVector& c) {
  const Eigen::Index n = c.size();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = c.first_row()[((j - i) % n + n) % n];
  }
  return m;
}

bool is_psd(const CirculantVector& c, double tol) {
  const Eigen::VectorXd lambda = eigenvalues_symmetric(c);
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  return lambda.minCoeff() >= -tol * scale;
}

double cosine_sum(long j, long horizon) {
  if (horizon < 1 || j < 0 || j >= horizon) {
    throw Error(ErrorCode::InvalidArgument, "cosine_sum requires 0 <= j <= T-1");
  }
  if (j == 0) return static_cast<double>(horizon);
  const auto& cosines = unit_root_cosines(horizon);
  std::vector<long double> terms(static_cast<std::size_t>(horizon));
  for (long t = 0; t < horizon; ++t) terms[static_cast<std::size_t>(t)] = cosines[static_cast<std::size_t>((j * t) % horizon)];
  return static_cast<double>(pairwise_sum(terms));
}

}  // namespace rgop
