#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tnilm::testing {

struct KsResult {
  double statistic;
  double p_value;
};

// Asymptotic Kolmogorov tail with the Stephens small-sample correction.
inline double kolmogorov_tail(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
inline KsResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_tail(d, x.size())};
}

struct ChiSquaredResult {
  double statistic;
  std::size_t dof;
  double p_value;
};

// Pearson goodness of fit of observed counts against cell probabilities.
inline ChiSquaredResult chi_squared_test(std::span<const std::size_t> counts, std::span<const double> probs) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    const double expected = total * probs[j];
    stat += (static_cast<double>(counts[j]) - expected) * (static_cast<double>(counts[j]) - expected) / expected;
    ++cells;
  }
  const std::size_t dof = cells - 1;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

inline bool relatively_close(double a, double b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace tnilm::testing
