#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "tnilm/distribution.hpp"
#include "tnilm/epidemic.hpp"
#include "tnilm/model.hpp"
#include "tnilm/population.hpp"
#include "tnilm/rates.hpp"
#include "tnilm/rng.hpp"

namespace tnilm {

struct NextEvent {
  double dt;
  std::size_t individual;
  DiseaseState to;
};

struct StopCondition {
  std::optional<double> tmax;
  std::optional<std::uint64_t> max_iterations;
  std::optional<std::chrono::duration<double>> max_wall_time;
};

// Exact (Gillespie) simulation of a transmission-network ILM.
class Simulation {
 public:
  Simulation(ModelClass cls, std::shared_ptr<const Population> pop, RiskFunctions rf,
             RiskParameters rp, std::vector<DiseaseState> starting_states, double start_time,
             Rng rng);
  // All susceptible at time 0.
  Simulation(ModelClass cls, std::shared_ptr<const Population> pop, RiskFunctions rf,
             RiskParameters rp, Rng rng);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Draws the waiting time and the transition that ends it, with probability
  // proportional to each transition's rate. nullopt once no event is possible.
  std::optional<NextEvent> next_event(Rng& rng) const;

  // Source of a new exposure of susceptible i: an infectious individual with
  // probability proportional to its competing rate, else kExternalSource.
  std::int32_t sample_source(std::size_t i, Rng& rng) const;

  // Applies one event at time() + dt, recording its source if it is an exposure.
  void apply(const NextEvent& event, Rng& rng);

  ModelClass model_class() const { return cls_; }
  const Population& population() const { return *pop_; }
  std::shared_ptr<const Population> population_ptr() const { return pop_; }
  const RiskFunctions& risk_functions() const { return rf_; }
  const RiskParameters& risk_parameters() const { return rp_; }
  double start_time() const { return start_time_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  std::uint64_t iterations() const { return iterations_; }
  const std::vector<DiseaseState>& starting_states() const { return starting_states_; }
  const std::vector<DiseaseState>& states() const { return rates_->states(); }
  const RateState& rates() const { return *rates_; }
  const Events& events() const { return events_; }
  const TransmissionNetwork& network() const { return network_; }
  Rng& rng() { return rng_; }

 private:
  ModelClass cls_;
  std::shared_ptr<const Population> pop_;
  RiskFunctions rf_;
  RiskParameters rp_;
  std::vector<DiseaseState> starting_states_;
  double start_time_;
  double time_;
  std::uint64_t iterations_ = 0;
  std::unique_ptr<RiskEvaluator> risk_;
  std::unique_ptr<RateState> rates_;
  Events events_;
  TransmissionNetwork network_;
  Rng rng_;
};

// Runs until a stop condition holds or no event is possible. An event that
// would land past tmax is discarded and the clock is set to tmax.
Simulation& run_simulation(Simulation& sim, const StopCondition& stop);

// Observation times: true time plus an independent delay draw. With `force`,
// infection delays are redrawn until the observation precedes removal.
EventObservations observe(const Events& events, const Distribution& infection_delay,
                          const Distribution& removal_delay, bool force, Rng& rng);
EventObservations observe(Simulation& sim, const Distribution& infection_delay,
                          const Distribution& removal_delay, bool force);

}  // namespace tnilm
