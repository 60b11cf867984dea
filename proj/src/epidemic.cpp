#include "tnilm/epidemic.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "tnilm/error.hpp"

namespace tnilm {

std::string_view to_string(Transition t) {
  switch (t) {
    case Transition::exposure: return "exposure";
    case Transition::infection: return "infection";
    case Transition::removal: return "removal";
  }
  return "?";
}

Events::Events(ModelClass cls, std::size_t n)
    : cls_(cls),
      exposure_(n, std::numeric_limits<double>::quiet_NaN()),
      infection_(n, std::numeric_limits<double>::quiet_NaN()),
      removal_(n, std::numeric_limits<double>::quiet_NaN()) {}

std::vector<EventRecord> ordered_events(const Events& events) {
  std::vector<EventRecord> out;
  const std::size_t n = events.size();
  out.reserve(2 * n);
  for (const auto t : {Transition::exposure, Transition::infection, Transition::removal}) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = events.raw(i, t);
      if (!std::isnan(v)) out.push_back({v, t, i});
    }
  }
  std::sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.individual < b.individual;
  });
  return out;
}

namespace {
bool same_times(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i])))) return false;
  }
  return true;
}
}  // namespace

bool operator==(const Events& a, const Events& b) {
  return a.cls_ == b.cls_ && same_times(a.exposure_, b.exposure_) && same_times(a.infection_, b.infection_) &&
         same_times(a.removal_, b.removal_);
}

namespace {

// Transitions an individual can still make from its starting state.
std::vector<Transition> remaining_chain(ModelClass cls, DiseaseState start) {
  std::vector<Transition> chain;
  if (start == DiseaseState::S && has_exposed(cls)) chain.push_back(Transition::exposure);
  if (start == DiseaseState::S || start == DiseaseState::E) chain.push_back(Transition::infection);
  if (start != DiseaseState::R && has_removed(cls)) chain.push_back(Transition::removal);
  return chain;
}

}  // namespace

void validate_events(const Events& events, const std::vector<DiseaseState>& starting_states,
                     double start_time) {
  const ModelClass cls = events.model_class();
  if (starting_states.size() != events.size()) {
    throw ValidationError("events and starting states differ in population size");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto chain = remaining_chain(cls, starting_states[i]);
    for (const auto t : {Transition::exposure, Transition::infection, Transition::removal}) {
      if (events.has(i, t) && std::find(chain.begin(), chain.end(), t) == chain.end()) {
        throw ValidationError(fmt::format("individual {} has a {} time but cannot make that transition",
                                          i + 1, to_string(t)));
      }
    }
    double previous = start_time;
    bool gap = false;
    for (const auto t : chain) {
      if (!events.has(i, t)) {
        gap = true;
        continue;
      }
      if (gap) {
        throw ValidationError(fmt::format("individual {} has a {} time without the preceding transition",
                                          i + 1, to_string(t)));
      }
      const double v = events.raw(i, t);
      if (!std::isfinite(v) || v < previous || (v == previous && t != chain.front())) {
        throw ValidationError(fmt::format("individual {}: {} time {} is out of order", i + 1,
                                          to_string(t), v));
      }
      previous = v;
    }
  }
}

std::vector<std::vector<std::size_t>> TransmissionNetwork::children() const {
  std::vector<std::vector<std::size_t>> out(source_.size());
  for (std::size_t i = 0; i < source_.size(); ++i) {
    if (source_[i] >= 0) out[static_cast<std::size_t>(source_[i])].push_back(i);
  }
  return out;
}

void validate_network(const TransmissionNetwork& network, const Events& events,
                      const std::vector<DiseaseState>& starting_states) {
  const ModelClass cls = events.model_class();
  const auto first = first_transition(cls);
  if (network.size() != events.size()) {
    throw ValidationError("network and events differ in population size");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const bool infected_here = starting_states[i] == DiseaseState::S && events.has(i, first);
    if (infected_here != network.has_source(i)) {
      throw ValidationError(fmt::format("individual {} {} a transmission source", i + 1,
                                        infected_here ? "is missing" : "should not have"));
    }
    if (const auto k = network.source_individual(i)) {
      if (*k >= events.size() || *k == i) {
        throw ValidationError(fmt::format("individual {} has invalid source {}", i + 1, *k + 1));
      }
    }
  }
}

void validate_observations(ModelClass cls, const EventObservations& obs,
                           const std::vector<DiseaseState>& starting_states) {
  if (obs.infection.size() != starting_states.size() || obs.removal.size() != starting_states.size()) {
    throw ValidationError(fmt::format("observations cover {} individuals, population has {}",
                                      obs.infection.size(), starting_states.size()));
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto start = starting_states[i];
    if (obs.infection_observed(i) && (start == DiseaseState::I || start == DiseaseState::R)) {
      throw ValidationError(fmt::format(
          "individual {} starts in state {} but has an infection observation", i + 1, to_string(start)));
    }
    if (obs.removal_observed(i)) {
      if (!has_removed(cls)) {
        throw ValidationError(
            fmt::format("individual {}: {} model has no removal observations", i + 1, to_string(cls)));
      }
      if (start == DiseaseState::R) {
        throw ValidationError(fmt::format("individual {} starts removed but has a removal observation", i + 1));
      }
      if ((start == DiseaseState::S || start == DiseaseState::E) && !obs.infection_observed(i)) {
        throw ValidationError(
            fmt::format("individual {} has a removal observation without an infection observation", i + 1));
      }
    }
  }
}

DiseaseState state_at(const Events& events, DiseaseState start, std::size_t i, double t) {
  DiseaseState s = start;
  for (const auto tr : {Transition::exposure, Transition::infection, Transition::removal}) {
    const double v = events.raw(i, tr);
    if (!std::isnan(v) && v <= t) s = target_state(tr);
  }
  return s;
}

}  // namespace tnilm
