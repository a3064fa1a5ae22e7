#pragma once

#include "rgop/market_model.hpp"

#include <Eigen/Dense>

namespace rgop::testing {

// Published ten-industry means and standard deviations (percent) with every pairwise correlation 0.6,
// the same moments as data/ten_industry_fixture.csv.
inline MarketMoments industry_moments(double correlation = 0.6) {
  Eigen::VectorXd mean(10), sd(10);
  mean << 0.85, 0.75, 0.98, 1.25, 0.87, 0.76, 0.89, 0.65, 0.98, 0.45;
  sd << 3.44, 8.53, 5.41, 6.19, 5.52, 4.66, 4.24, 3.66, 3.79, 5.62;
  mean /= 100.0;
  sd /= 100.0;
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(10, 10, correlation);
  corr.diagonal().setOnes();
  return {mean, sd.asDiagonal() * corr * sd.asDiagonal()};
}

}  // namespace rgop::testing
