#pragma once

#include <string>
#include <variant>

#include "tnilm/rng.hpp"

namespace tnilm {

// Univariate distributions used for parameter priors and observation delays.
// Exponential is parameterized by its mean (scale), not its rate.
class Distribution {
 public:
  struct Uniform {
    double a, b;
  };
  struct Exponential {
    double mean;
  };
  struct Gamma {
    double shape, scale;
  };
  struct Normal {
    double mu, sigma;
    bool truncated = false;  // restrict to [0, inf)
  };
  struct Beta {
    double alpha, beta;
  };
  // Improper constant density on [lo, hi]; only samplable when both ends are finite.
  struct Flat {
    double lo, hi;
  };
  // Point mass.
  struct Point {
    double value;
  };
  using Family = std::variant<Uniform, Exponential, Gamma, Normal, Beta, Flat, Point>;

  Distribution(Family family);  // NOLINT(google-explicit-constructor)

  static Distribution uniform(double a, double b) { return Distribution(Uniform{a, b}); }
  static Distribution exponential(double mean) { return Distribution(Exponential{mean}); }
  static Distribution gamma(double shape, double scale) { return Distribution(Gamma{shape, scale}); }
  static Distribution normal(double mu, double sigma, bool truncated = false) {
    return Distribution(Normal{mu, sigma, truncated});
  }
  static Distribution beta(double a, double b) { return Distribution(Beta{a, b}); }
  static Distribution flat(double lo, double hi) { return Distribution(Flat{lo, hi}); }
  static Distribution point(double value) { return Distribution(Point{value}); }

  const Family& family() const { return family_; }

  // -inf outside the support.
  double log_density(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;

  double support_lo() const;
  double support_hi() const;

  std::string describe() const;

 private:
  Family family_;
};

}  // namespace tnilm
