#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "tnilm/model.hpp"
#include "tnilm/rates.hpp"

namespace tnilm {

enum class Transition : std::uint8_t { exposure, infection, removal };

std::string_view to_string(Transition t);

// State entered by a transition.
constexpr DiseaseState target_state(Transition t) {
  switch (t) {
    case Transition::exposure: return DiseaseState::E;
    case Transition::infection: return DiseaseState::I;
    case Transition::removal: return DiseaseState::R;
  }
  return DiseaseState::S;
}

// Transition that leaves S in this class.
constexpr Transition first_transition(ModelClass cls) {
  return has_exposed(cls) ? Transition::exposure : Transition::infection;
}

// Per-individual transition times; absent transitions are stored as NaN and
// reported as nullopt.
class Events {
 public:
  Events() = default;
  Events(ModelClass cls, std::size_t n);

  ModelClass model_class() const { return cls_; }
  std::size_t size() const { return infection_.size(); }

  std::optional<double> time(std::size_t i, Transition t) const {
    const double v = column(t)[i];
    if (std::isnan(v)) return std::nullopt;
    return v;
  }
  double raw(std::size_t i, Transition t) const { return column(t)[i]; }
  bool has(std::size_t i, Transition t) const { return !std::isnan(column(t)[i]); }
  void set(std::size_t i, Transition t, double value) { column(t)[i] = value; }
  void clear(std::size_t i, Transition t) { column(t)[i] = std::numeric_limits<double>::quiet_NaN(); }

  // Absent (NaN) times compare equal to each other.
  friend bool operator==(const Events& a, const Events& b);

 private:
  std::vector<double>& column(Transition t) {
    return t == Transition::exposure ? exposure_ : t == Transition::infection ? infection_ : removal_;
  }
  const std::vector<double>& column(Transition t) const {
    return t == Transition::exposure ? exposure_ : t == Transition::infection ? infection_ : removal_;
  }

  ModelClass cls_ = ModelClass::SIR;
  std::vector<double> exposure_;
  std::vector<double> infection_;
  std::vector<double> removal_;
};

struct EventRecord {
  double time;
  Transition kind;
  std::size_t individual;
};

// All transitions ordered by (time, kind with exposure < infection < removal, individual).
std::vector<EventRecord> ordered_events(const Events& events);

// Throws ValidationError unless each individual's times are increasing along
// the class chain, consistent with its starting state, and >= start_time.
void validate_events(const Events& events, const std::vector<DiseaseState>& starting_states,
                     double start_time);

inline constexpr std::int32_t kNoSource = -2;
inline constexpr std::int32_t kExternalSource = -1;

// Who infected whom. Each individual has at most one source: nobody, an
// external source, or another individual.
class TransmissionNetwork {
 public:
  TransmissionNetwork() = default;
  explicit TransmissionNetwork(std::size_t n) : source_(n, kNoSource) {}

  std::size_t size() const { return source_.size(); }

  bool external(std::size_t i) const { return source_[i] == kExternalSource; }
  bool internal(std::size_t k, std::size_t i) const {
    return source_[i] == static_cast<std::int32_t>(k);
  }
  bool has_source(std::size_t i) const { return source_[i] != kNoSource; }
  std::optional<std::size_t> source_individual(std::size_t i) const {
    if (source_[i] < 0) return std::nullopt;
    return static_cast<std::size_t>(source_[i]);
  }
  std::int32_t raw(std::size_t i) const { return source_[i]; }

  void set_external(std::size_t i) { source_[i] = kExternalSource; }
  void set_internal(std::size_t k, std::size_t i) { source_[i] = static_cast<std::int32_t>(k); }
  void set_raw(std::size_t i, std::int32_t value) { source_[i] = value; }
  void clear(std::size_t i) { source_[i] = kNoSource; }

  std::vector<std::vector<std::size_t>> children() const;

  friend bool operator==(const TransmissionNetwork&, const TransmissionNetwork&) = default;

 private:
  std::vector<std::int32_t> source_;
};

// Throws ValidationError when the network does not match the event times:
// exactly the individuals that leave S during the record need a source, and
// an internal source must be infectious at the transmission time.
void validate_network(const TransmissionNetwork& network, const Events& events,
                      const std::vector<DiseaseState>& starting_states);

// Observed infection / removal times; NaN = not observed.
struct EventObservations {
  std::vector<double> infection;
  std::vector<double> removal;

  EventObservations() = default;
  explicit EventObservations(std::size_t n)
      : infection(n, std::numeric_limits<double>::quiet_NaN()),
        removal(n, std::numeric_limits<double>::quiet_NaN()) {}

  std::size_t size() const { return infection.size(); }
  bool infection_observed(std::size_t i) const { return !std::isnan(infection[i]); }
  bool removal_observed(std::size_t i) const { return !std::isnan(removal[i]); }
};

void validate_observations(ModelClass cls, const EventObservations& obs,
                           const std::vector<DiseaseState>& starting_states);

// Disease state of individual i at time t (events at exactly t have happened).
DiseaseState state_at(const Events& events, DiseaseState start, std::size_t i, double t);

}  // namespace tnilm
