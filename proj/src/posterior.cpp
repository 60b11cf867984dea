#include "tnilm/posterior.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tnilm/error.hpp"

namespace tnilm {

namespace {

void check_retention(std::span<const MarkovChain> chains, std::size_t burnin, std::size_t thin) {
  if (chains.empty()) throw ValidationError("run has no chains");
  if (thin == 0) throw ValidationError("thin must be at least 1");
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::size_t iters = chains[c].iterations();
    if (burnin >= iters) {
      throw ValidationError(
          fmt::format("burnin {} must be less than the {} iterations of chain {}", burnin, iters, c + 1));
    }
  }
}

// Retained samples whose events and network were kept.
std::vector<std::size_t> stored_retained(const MarkovChain& chain, std::size_t burnin, std::size_t thin) {
  auto kept = retained_samples(chain, burnin, thin);
  for (std::size_t s : kept) {
    if (!chain.has_stored(s)) {
      throw ValidationError(fmt::format(
          "sample {} has no stored events (samples kept every {} iterations); choose burnin and thin "
          "as multiples of {}",
          s, chain.store_thin, chain.store_thin));
    }
  }
  return kept;
}

}  // namespace

std::vector<std::size_t> retained_samples(const MarkovChain& chain, std::size_t burnin, std::size_t thin) {
  std::vector<std::size_t> out;
  if (thin == 0) return out;
  for (std::size_t s = burnin; s <= chain.iterations() && !chain.log_posterior.empty(); s += thin) {
    out.push_back(s);
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ParameterSummary summarize_values(std::string name, std::vector<double> values) {
  if (values.empty()) throw ValidationError(fmt::format("no retained samples for {}", name));
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {std::move(name), mean, var, quantile_sorted(values, 0.025), quantile_sorted(values, 0.975)};
}

std::vector<ParameterSummary> summarize(const McmcRun& run, std::size_t burnin, std::size_t thin) {
  return summarize(run.chains, parameter_names(run.problem.priors.shape()), burnin, thin);
}

std::vector<ParameterSummary> summarize(std::span<const MarkovChain> chains, const std::vector<std::string>& names,
                                        std::size_t burnin, std::size_t thin) {
  check_retention(chains, burnin, thin);
  std::vector<std::vector<double>> columns(names.size());
  for (const auto& chain : chains) {
    for (std::size_t s : retained_samples(chain, burnin, thin)) {
      if (chain.parameters[s].size() != names.size()) {
        throw ValidationError(fmt::format("sample {} has {} parameters, expected {}", s,
                                          chain.parameters[s].size(), names.size()));
      }
      for (std::size_t j = 0; j < names.size(); ++j) columns[j].push_back(chain.parameters[s][j]);
    }
  }
  std::vector<ParameterSummary> out;
  for (std::size_t j = 0; j < names.size(); ++j) out.push_back(summarize_values(names[j], std::move(columns[j])));
  return out;
}

double TNDistribution::out_degree(std::size_t k) const {
  double d = 0.0;
  for (std::size_t i = 0; i < n_; ++i) d += edge(k, i);
  return d;
}

double TNDistribution::infected(std::size_t i) const {
  double p = external_[i];
  for (std::size_t k = 0; k < n_; ++k) p += edge(k, i);
  return p;
}

TNDistribution TNDistribution::from_networks(std::span<const TransmissionNetwork* const> networks) {
  if (networks.empty()) throw ValidationError("no networks to summarize");
  const std::size_t n = networks.front()->size();
  TNDistribution d(n);
  const double w = 1.0 / static_cast<double>(networks.size());
  for (const auto* net : networks) {
    if (net->size() != n) throw ValidationError("networks differ in size");
    for (std::size_t i = 0; i < n; ++i) {
      const std::int32_t src = net->raw(i);
      if (src == kExternalSource) {
        d.external_[i] += w;
      } else if (src >= 0) {
        d.edge_[static_cast<std::size_t>(src) * n + i] += w;
      }
    }
  }
  return d;
}

TNDistribution network_posterior(const McmcRun& run, std::size_t burnin, std::size_t thin) {
  return network_posterior(run.chains, burnin, thin);
}

TNDistribution network_posterior(std::span<const MarkovChain> chains, std::size_t burnin, std::size_t thin) {
  check_retention(chains, burnin, thin);
  std::vector<const TransmissionNetwork*> nets;
  for (const auto& chain : chains) {
    for (std::size_t s : stored_retained(chain, burnin, thin)) nets.push_back(&chain.network_at(s));
  }
  return TNDistribution::from_networks(nets);
}

std::vector<std::size_t> state_counts(const Events& events, const std::vector<DiseaseState>& starting_states,
                                      DiseaseState state, std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("time grid must be sorted");
  std::vector<std::size_t> counts(grid.size(), 0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (state_at(events, starting_states[i], i, grid[g]) == state) ++counts[g];
    }
  }
  return counts;
}

std::vector<CurvePoint> epidemic_curves(const McmcRun& run, std::size_t burnin, std::size_t thin,
                                        DiseaseState state, std::span<const double> grid) {
  return epidemic_curves(run.chains, run.problem.start.states, burnin, thin, state, grid);
}

std::vector<CurvePoint> epidemic_curves(std::span<const MarkovChain> chains,
                                        const std::vector<DiseaseState>& starting_states, std::size_t burnin,
                                        std::size_t thin, DiseaseState state, std::span<const double> grid) {
  check_retention(chains, burnin, thin);
  std::vector<std::vector<double>> by_time(grid.size());
  for (const auto& chain : chains) {
    for (std::size_t s : stored_retained(chain, burnin, thin)) {
      const auto counts = state_counts(chain.events_at(s), starting_states, state, grid);
      for (std::size_t g = 0; g < grid.size(); ++g) by_time[g].push_back(static_cast<double>(counts[g]));
    }
  }
  std::vector<CurvePoint> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& v = by_time[g];
    std::sort(v.begin(), v.end());
    out.push_back({grid[g], quantile_sorted(v, 0.025), quantile_sorted(v, 0.5), quantile_sorted(v, 0.975)});
  }
  return out;
}

}  // namespace tnilm
