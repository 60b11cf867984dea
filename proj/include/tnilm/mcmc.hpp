#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tnilm/epidemic.hpp"
#include "tnilm/likelihood.hpp"
#include "tnilm/model.hpp"
#include "tnilm/population.hpp"
#include "tnilm/rng.hpp"

namespace tnilm {

struct AdaptSettings {
  bool enabled = true;
  // Scale on the empirical covariance; 2.38^2 / p when unset.
  std::optional<double> scale;
  // Probability of drawing from the fixed kernel once adaptation has started.
  double mix = 0.05;
  double jitter = 1e-10;
  // Fixed kernel is N(x, (fixed_sd^2 / p) I).
  double fixed_sd = 0.1;
  // Rebuild the covariance from the latest half of the history at each doubling.
  bool forget = true;
};

struct McmcSettings {
  std::size_t init_attempts = 1000;
  double event_sigma = 1.0;
  std::size_t event_batches = 1;
  // One accept/reject per event time rather than per batch.
  bool per_event_acceptance = false;
  bool condition_on_network = true;
  AdaptSettings adapt;
  std::size_t chains = 1;
  std::uint64_t seed = 0;
  // Event and network samples are kept for every store_thin-th iteration.
  std::size_t store_thin = 1;
  // Worker threads for chains; 0 reads TNILM_THREADS, then the hardware count.
  std::size_t threads = 0;
};

// Everything a chain conditions on.
struct McmcProblem {
  ModelClass cls = ModelClass::SIR;
  std::shared_ptr<const Population> population;
  RiskFunctions functions;
  RiskPriors priors;
  EventObservations observations;
  EventExtents extents;
  EpidemicStart start;
};

void validate_problem(const McmcProblem& problem);

// Streaming mean and covariance (Welford).
class OnlineCovariance {
 public:
  OnlineCovariance() = default;
  explicit OnlineCovariance(std::size_t dim);

  void add(std::span<const double> x);
  std::size_t count() const { return count_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  // Unbiased sample covariance; zero with fewer than two samples.
  Eigen::MatrixXd covariance() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scatter_;
};

struct ChainCounters {
  std::uint64_t parameter_proposals = 0;
  std::uint64_t parameter_accepts = 0;
  std::uint64_t event_proposals = 0;
  std::uint64_t event_accepts = 0;
};

// Sample index s runs from 0 (the initial state) to iterations().
struct MarkovChain {
  std::vector<std::vector<double>> parameters;
  std::vector<double> log_posterior;
  // events[j] and networks[j] belong to sample j * store_thin.
  std::size_t store_thin = 1;
  std::vector<Events> events;
  std::vector<TransmissionNetwork> networks;
  OnlineCovariance covariance;
  ChainCounters counters;
  Rng rng = Rng(0);

  Events current_events;
  TransmissionNetwork current_network;

  std::size_t iterations() const { return log_posterior.empty() ? 0 : log_posterior.size() - 1; }
  const std::vector<double>& current_parameters() const { return parameters.back(); }
  double current_log_posterior() const { return log_posterior.back(); }
  bool has_stored(std::size_t s) const { return s % store_thin == 0 && s / store_thin < events.size(); }
  const Events& events_at(std::size_t s) const { return events.at(s / store_thin); }
  const TransmissionNetwork& network_at(std::size_t s) const { return networks.at(s / store_thin); }
};

struct McmcRun {
  McmcProblem problem;
  McmcSettings settings;
  std::vector<MarkovChain> chains;
};

// An augmented (unobserved) event time.
struct EventRef {
  std::size_t individual;
  Transition kind;
};

// Event times that are sampled: the true times behind every observation,
// plus exposures of observed infections in classes with E.
std::vector<EventRef> augmented_events(const McmcProblem& problem);

struct Interval {
  double lo;
  double hi;
};

// Range the target event may move to with everything else fixed. With a
// network, source and offspring constraints are included; without one only
// the individual's own path and observation windows apply.
Interval event_time_bounds(const EventRef& target, const Events& events,
                           const TransmissionNetwork* network, const McmcProblem& problem);

double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng);
double truncated_normal_log_density(double x, double mean, double sd, double lo, double hi);

bool mh_accept(double log_post_new, double log_post_old, double log_proposal_correction, Rng& rng);

// Indices of parameters whose prior is not a point mass.
std::vector<std::size_t> free_parameters(const RiskPriors& priors);

// Adaptive random-walk proposal from the chain's current parameters.
std::vector<double> propose_parameters(const MarkovChain& chain, std::span<const std::size_t> free,
                                       const AdaptSettings& adapt, Rng& rng);

// Draws a source given the competing rates at an exposure: an index or kExternalSource.
std::int32_t sample_source(const ExposureSnapshot& snapshot, Rng& rng);

struct GibbsResult {
  TransmissionNetwork network;
  double log_likelihood_ilm;
  double log_likelihood_tnilm;
};

// Samples every exposure's source from its full conditional.
GibbsResult gibbs_update_network(RiskEvaluator& risk, const EpidemicStart& start,
                                 const Events& events, Rng& rng);

// Multi-attempt initialization; throws InferenceError if no attempt has a
// finite posterior.
MarkovChain initialize_chain(const McmcRun& run, std::size_t attempts, Rng rng);

// Initializes settings.chains chains, chain c seeded with seed + c.
void start(McmcRun& run);

// Event-time step for one chain; `target_log_likelihood` is the current value
// of the likelihood being targeted and is updated on acceptance.
void update_event_times(MarkovChain& chain, const McmcProblem& problem, RiskEvaluator& risk,
                        const McmcSettings& settings, double& target_log_likelihood);

using ProgressFn = std::function<void(std::size_t chain, std::size_t done, std::size_t total)>;

// Runs n more iterations on every chain (chains in parallel).
void iterate(McmcRun& run, std::size_t n, const ProgressFn& progress = {});

// Log prior plus TN-ILM log-likelihood of a stored state.
double log_posterior(const McmcProblem& problem, std::span<const double> parameters,
                     const Events& events, const TransmissionNetwork& network);

std::size_t worker_count(std::size_t requested, std::size_t jobs);

}  // namespace tnilm
