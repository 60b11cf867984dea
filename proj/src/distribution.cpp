#include "tnilm/distribution.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "tnilm/error.hpp"

namespace tnilm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("invalid distribution: " + what);
}
}  // namespace

Distribution::Distribution(Family family) : family_(family) {
  std::visit(overloaded{
                 [](const Uniform& d) { check(std::isfinite(d.a) && std::isfinite(d.b) && d.a < d.b, "uniform needs a < b"); },
                 [](const Exponential& d) { check(d.mean > 0.0 && std::isfinite(d.mean), "exponential mean must be > 0"); },
                 [](const Gamma& d) { check(d.shape > 0.0 && d.scale > 0.0, "gamma shape and scale must be > 0"); },
                 [](const Normal& d) { check(d.sigma > 0.0 && std::isfinite(d.mu), "normal sigma must be > 0"); },
                 [](const Beta& d) { check(d.alpha > 0.0 && d.beta > 0.0, "beta shapes must be > 0"); },
                 [](const Flat& d) { check(d.lo < d.hi, "flat needs lo < hi"); },
                 [](const Point& d) { check(std::isfinite(d.value), "point value must be finite"); },
             },
             family_);
}

double Distribution::log_density(double x) const {
  if (std::isnan(x)) return -kInf;
  return std::visit(
      overloaded{
          [x](const Uniform& d) { return (x < d.a || x > d.b) ? -kInf : -std::log(d.b - d.a); },
          [x](const Exponential& d) { return x < 0.0 ? -kInf : -std::log(d.mean) - x / d.mean; },
          [x](const Gamma& d) {
            if (x < 0.0) return -kInf;
            if (x == 0.0) {
              if (d.shape < 1.0) return kInf;
              if (d.shape > 1.0) return -kInf;
            }
            return (d.shape - 1.0) * (x == 0.0 ? 0.0 : std::log(x)) - x / d.scale -
                   std::lgamma(d.shape) - d.shape * std::log(d.scale);
          },
          [x](const Normal& d) {
            const double z = (x - d.mu) / d.sigma;
            double lp = -0.5 * z * z - std::log(d.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
            if (d.truncated) {
              if (x < 0.0) return -kInf;
              // Mass of [0, inf) under the untruncated normal.
              const boost::math::normal_distribution<double> nd(d.mu, d.sigma);
              lp -= std::log(boost::math::cdf(boost::math::complement(nd, 0.0)));
            }
            return lp;
          },
          [x](const Beta& d) {
            if (x < 0.0 || x > 1.0) return -kInf;
            const double at_edge = x == 0.0 ? d.alpha : x == 1.0 ? d.beta : 0.0;
            if (at_edge != 0.0 && at_edge != 1.0) return at_edge < 1.0 ? kInf : -kInf;
            if (at_edge == 1.0) {
              // Edge where the density term vanishes from the log.
              const double other = x == 0.0 ? (d.beta - 1.0) * std::log1p(-x) : (d.alpha - 1.0) * std::log(x);
              return other + std::lgamma(d.alpha + d.beta) - std::lgamma(d.alpha) - std::lgamma(d.beta);
            }
            return (d.alpha - 1.0) * std::log(x) + (d.beta - 1.0) * std::log1p(-x) +
                   std::lgamma(d.alpha + d.beta) - std::lgamma(d.alpha) - std::lgamma(d.beta);
          },
          [x](const Flat& d) { return (x < d.lo || x > d.hi) ? -kInf : 0.0; },
          [x](const Point& d) { return x == d.value ? 0.0 : -kInf; },
      },
      family_);
}

double Distribution::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const Uniform& d) { return x <= d.a ? 0.0 : x >= d.b ? 1.0 : (x - d.a) / (d.b - d.a); },
          [x](const Exponential& d) { return x <= 0.0 ? 0.0 : -std::expm1(-x / d.mean); },
          [x](const Gamma& d) {
            return x <= 0.0 ? 0.0 : boost::math::cdf(boost::math::gamma_distribution<double>(d.shape, d.scale), x);
          },
          [x](const Normal& d) {
            const boost::math::normal_distribution<double> nd(d.mu, d.sigma);
            if (!d.truncated) return boost::math::cdf(nd, x);
            if (x <= 0.0) return 0.0;
            const double lo = boost::math::cdf(nd, 0.0);
            return (boost::math::cdf(nd, x) - lo) / (1.0 - lo);
          },
          [x](const Beta& d) {
            return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : boost::math::cdf(boost::math::beta_distribution<double>(d.alpha, d.beta), x);
          },
          [x](const Flat& d) {
            if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) {
              throw ValidationError("flat distribution with an infinite bound has no cdf");
            }
            return x <= d.lo ? 0.0 : x >= d.hi ? 1.0 : (x - d.lo) / (d.hi - d.lo);
          },
          [x](const Point& d) { return x < d.value ? 0.0 : 1.0; },
      },
      family_);
}

double Distribution::sample(Rng& rng) const {
  return std::visit(
      overloaded{
          [&](const Uniform& d) { return rng.uniform(d.a, d.b); },
          [&](const Exponential& d) { return rng.exponential(1.0 / d.mean); },
          [&](const Gamma& d) { return rng.gamma(d.shape, d.scale); },
          [&](const Normal& d) {
            if (!d.truncated) return rng.normal(d.mu, d.sigma);
            const boost::math::normal_distribution<double> nd(d.mu, d.sigma);
            const double lo = boost::math::cdf(nd, 0.0);
            if (lo < 0.5) {
              double x;
              do {
                x = rng.normal(d.mu, d.sigma);
              } while (x < 0.0);
              return x;
            }
            const double u = lo + (1.0 - lo) * rng.uniform_open();
            return std::max(0.0, boost::math::quantile(nd, std::min(u, 1.0 - 1e-16)));
          },
          [&](const Beta& d) {
            const double x = rng.gamma(d.alpha, 1.0);
            const double y = rng.gamma(d.beta, 1.0);
            return x / (x + y);
          },
          [&](const Flat& d) {
            if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) {
              throw InferenceError("cannot draw from a flat distribution with an infinite bound");
            }
            return rng.uniform(d.lo, d.hi);
          },
          [](const Point& d) { return d.value; },
      },
      family_);
}

double Distribution::support_lo() const {
  return std::visit(overloaded{
                        [](const Uniform& d) { return d.a; },
                        [](const Exponential&) { return 0.0; },
                        [](const Gamma&) { return 0.0; },
                        [](const Normal& d) { return d.truncated ? 0.0 : -kInf; },
                        [](const Beta&) { return 0.0; },
                        [](const Flat& d) { return d.lo; },
                        [](const Point& d) { return d.value; },
                    },
                    family_);
}

double Distribution::support_hi() const {
  return std::visit(overloaded{
                        [](const Uniform& d) { return d.b; },
                        [](const Exponential&) { return kInf; },
                        [](const Gamma&) { return kInf; },
                        [](const Normal&) { return kInf; },
                        [](const Beta&) { return 1.0; },
                        [](const Flat& d) { return d.hi; },
                        [](const Point& d) { return d.value; },
                    },
                    family_);
}

std::string Distribution::describe() const {
  return std::visit(
      overloaded{
          [](const Uniform& d) { return fmt::format("Uniform({}, {})", d.a, d.b); },
          [](const Exponential& d) { return fmt::format("Exponential(mean={})", d.mean); },
          [](const Gamma& d) { return fmt::format("Gamma(shape={}, scale={})", d.shape, d.scale); },
          [](const Normal& d) {
            return fmt::format("Normal({}, {}){}", d.mu, d.sigma, d.truncated ? " truncated at 0" : "");
          },
          [](const Beta& d) { return fmt::format("Beta({}, {})", d.alpha, d.beta); },
          [](const Flat& d) { return fmt::format("Flat({}, {})", d.lo, d.hi); },
          [](const Point& d) { return fmt::format("Point({})", d.value); },
      },
      family_);
}

}  // namespace tnilm
