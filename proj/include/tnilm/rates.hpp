#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "tnilm/model.hpp"
#include "tnilm/population.hpp"

namespace tnilm {

enum class DiseaseState : std::uint8_t { S, E, I, R };

std::string_view to_string(DiseaseState s);
DiseaseState parse_disease_state(std::string_view text);

bool state_legal(ModelClass cls, DiseaseState s);
// Next state along the class chain; S is followed by E or I depending on class.
std::optional<DiseaseState> next_state(ModelClass cls, DiseaseState s);

// Per-individual risk values for one parameter vector, with a lazily filled
// pairwise cache for the infectivity kernel. Reused across likelihood passes
// that share a parameter vector. Not thread-safe; one owner at a time.
class RiskEvaluator {
 public:
  RiskEvaluator(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                const RiskParameters& rp);

  ModelClass model_class() const { return cls_; }
  const Population& population() const { return *pop_; }
  std::size_t size() const { return pop_->size(); }

  double sparks(std::size_t i) const { return sparks_[i]; }
  double susceptibility(std::size_t i) const { return susceptibility_[i]; }
  double transmissibility(std::size_t k) const { return transmissibility_[k]; }
  double latency(std::size_t j) const { return latency_[j]; }
  double removal(std::size_t k) const { return removal_[k]; }
  double kernel(std::size_t i, std::size_t k);

  // Competing exposure rate of susceptible i from infectious k.
  double endogenous(std::size_t i, std::size_t k);

 private:
  ModelClass cls_;
  const Population* pop_;
  RiskExpr kernel_expr_;
  std::vector<double> kernel_params_;
  std::vector<double> sparks_, susceptibility_, transmissibility_, latency_, removal_;
  std::vector<double> kernel_cache_;  // NaN = not yet computed
};

struct SourceRate {
  std::size_t source;
  double rate;
};

// Competing exposure rates. Rows exist only for susceptible individuals and are
// sorted by source index.
struct TransmissionRates {
  std::vector<double> exogenous;
  std::vector<std::vector<SourceRate>> endogenous;

  double endogenous_rate(std::size_t i, std::size_t k) const;
};

// Transition rates per individual. `ei` is empty for classes without E and
// `ir` is empty for classes without R.
struct EventRates {
  std::vector<double> se;
  std::vector<double> ei;
  std::vector<double> ir;
};

// From-scratch evaluation of every rate for the given states.
std::pair<TransmissionRates, EventRates> initialize_rates(const std::vector<DiseaseState>& states,
                                                          RiskEvaluator& risk);
std::pair<TransmissionRates, EventRates> initialize_rates(const std::vector<DiseaseState>& states,
                                                          ModelClass cls, const Population& pop,
                                                          const RiskFunctions& rf,
                                                          const RiskParameters& rp);

double total_rate(const EventRates& er);

// Disease states plus rate bookkeeping, updated incrementally per event.
class RateState {
 public:
  RateState(RiskEvaluator& risk, std::vector<DiseaseState> states);

  // Moves `individual` to `to`, which must be the next state on its chain.
  void apply(std::size_t individual, DiseaseState to);

  // Discards incremental state and recomputes every rate.
  void recompute();

  const std::vector<DiseaseState>& states() const { return states_; }
  DiseaseState state(std::size_t i) const { return states_[i]; }
  const TransmissionRates& transmission() const { return tr_; }
  const EventRates& rates() const { return er_; }
  double total() const { return total_rate(er_); }
  ModelClass model_class() const { return risk_->model_class(); }

 private:
  void add_source(std::size_t k);
  void remove_source(std::size_t k);
  void resum(std::size_t i);

  RiskEvaluator* risk_;
  std::vector<DiseaseState> states_;
  TransmissionRates tr_;
  EventRates er_;
};

}  // namespace tnilm
