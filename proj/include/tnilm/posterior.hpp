#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tnilm/mcmc.hpp"

namespace tnilm {

struct ParameterSummary {
  std::string name;
  double mean;
  double variance;
  double lower;  // 2.5%
  double upper;  // 97.5%
};

// Sample indices s in [burnin, iterations] with (s - burnin) % thin == 0.
std::vector<std::size_t> retained_samples(const MarkovChain& chain, std::size_t burnin, std::size_t thin);

// Linear interpolation between order statistics (R type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

ParameterSummary summarize_values(std::string name, std::vector<double> values);

// One row per parameter, pooling retained samples from every chain.
std::vector<ParameterSummary> summarize(const McmcRun& run, std::size_t burnin, std::size_t thin);
std::vector<ParameterSummary> summarize(std::span<const MarkovChain> chains, const std::vector<std::string>& names,
                                        std::size_t burnin, std::size_t thin);

// Posterior edge probabilities. edge(k, i) is the probability that k infected i.
class TNDistribution {
 public:
  TNDistribution() = default;
  explicit TNDistribution(std::size_t n) : n_(n), external_(n, 0.0), edge_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double external(std::size_t i) const { return external_[i]; }
  double edge(std::size_t k, std::size_t i) const { return edge_[k * n_ + i]; }
  double out_degree(std::size_t k) const;
  // Probability that i has any source.
  double infected(std::size_t i) const;

  static TNDistribution from_networks(std::span<const TransmissionNetwork* const> networks);

 private:
  std::size_t n_ = 0;
  std::vector<double> external_;
  std::vector<double> edge_;
};

TNDistribution network_posterior(const McmcRun& run, std::size_t burnin, std::size_t thin);
TNDistribution network_posterior(std::span<const MarkovChain> chains, std::size_t burnin, std::size_t thin);

// Number of individuals in `state` at each grid time (events at exactly t have happened).
std::vector<std::size_t> state_counts(const Events& events, const std::vector<DiseaseState>& starting_states,
                                      DiseaseState state, std::span<const double> grid);

struct CurvePoint {
  double time;
  double lower;   // 2.5%
  double median;
  double upper;   // 97.5%
};

std::vector<CurvePoint> epidemic_curves(const McmcRun& run, std::size_t burnin, std::size_t thin,
                                        DiseaseState state, std::span<const double> grid);
std::vector<CurvePoint> epidemic_curves(std::span<const MarkovChain> chains,
                                        const std::vector<DiseaseState>& starting_states, std::size_t burnin,
                                        std::size_t thin, DiseaseState state, std::span<const double> grid);

}  // namespace tnilm
