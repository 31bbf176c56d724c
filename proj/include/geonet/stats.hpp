#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace geonet {

/// Upper quantile of the chi-square distribution: P(X <= q) = p.
inline double chi_square_quantile(int dof, double p) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, p);
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, divisor n - 1
};

/// Welford's running mean and unbiased variance.
inline MeanVariance mean_variance(std::span<const double> xs) {
  MeanVariance mv;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double delta = x - mv.mean;
    mv.mean += delta / static_cast<double>(n);
    m2 += delta * (x - mv.mean);
  }
  mv.variance = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return mv;
}

/// Least-squares slope of y on x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need at least two paired values");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

}  // namespace geonet
