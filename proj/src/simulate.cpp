#include "tnilm/simulate.hpp"

#include <fmt/format.h>

#include "tnilm/error.hpp"

namespace tnilm {

namespace {
constexpr int kForceRetries = 10000;
}

Simulation::Simulation(ModelClass cls, std::shared_ptr<const Population> pop, RiskFunctions rf,
                       RiskParameters rp, std::vector<DiseaseState> starting_states,
                       double start_time, Rng rng)
    : cls_(cls),
      pop_(std::move(pop)),
      rf_(std::move(rf)),
      rp_(std::move(rp)),
      starting_states_(std::move(starting_states)),
      start_time_(start_time),
      time_(start_time),
      events_(cls, pop_->size()),
      network_(pop_->size()),
      rng_(rng) {
  const auto report = validate_model(cls_, rf_, rp_, pop_.get());
  if (!report.ok()) {
    throw ValidationError("invalid model: " + report.message());
  }
  risk_ = std::make_unique<RiskEvaluator>(cls_, *pop_, rf_, rp_);
  rates_ = std::make_unique<RateState>(*risk_, starting_states_);
}

Simulation::Simulation(ModelClass cls, std::shared_ptr<const Population> pop, RiskFunctions rf,
                       RiskParameters rp, Rng rng)
    : Simulation(cls, pop, std::move(rf), std::move(rp),
                 std::vector<DiseaseState>(pop->size(), DiseaseState::S), 0.0, rng) {}

std::optional<NextEvent> Simulation::next_event(Rng& rng) const {
  const auto& er = rates_->rates();
  const double total = total_rate(er);
  if (!(total > 0.0)) return std::nullopt;
  const double dt = rng.exponential(total);
  const double target = rng.uniform() * total;

  const DiseaseState after_s = has_exposed(cls_) ? DiseaseState::E : DiseaseState::I;
  double acc = 0.0;
  std::optional<NextEvent> last;
  auto scan = [&](const std::vector<double>& v, DiseaseState to) -> std::optional<NextEvent> {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0.0) continue;
      acc += v[i];
      last = NextEvent{dt, i, to};
      if (target < acc) return last;
    }
    return std::nullopt;
  };
  if (auto e = scan(er.se, after_s)) return e;
  if (auto e = scan(er.ei, DiseaseState::I)) return e;
  if (auto e = scan(er.ir, DiseaseState::R)) return e;
  // Rounding left target at the very top of the cumulative sum.
  return last;
}

std::int32_t Simulation::sample_source(std::size_t i, Rng& rng) const {
  const auto& tr = rates_->transmission();
  const double total = rates_->rates().se[i];
  if (!(total > 0.0)) {
    throw InferenceError(fmt::format("individual {} has zero exposure rate", i + 1));
  }
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::int32_t last = kExternalSource;
  for (const auto& [k, rate] : tr.endogenous[i]) {
    if (rate <= 0.0) continue;
    acc += rate;
    last = static_cast<std::int32_t>(k);
    if (target < acc) return last;
  }
  if (tr.exogenous[i] > 0.0) return kExternalSource;
  return last;
}

void Simulation::apply(const NextEvent& event, Rng& rng) {
  time_ += event.dt;
  const std::size_t i = event.individual;
  if (rates_->state(i) == DiseaseState::S) {
    const auto src = sample_source(i, rng);
    network_.set_raw(i, src);
  }
  const Transition kind = event.to == DiseaseState::E   ? Transition::exposure
                          : event.to == DiseaseState::I ? Transition::infection
                                                        : Transition::removal;
  events_.set(i, kind, time_);
  rates_->apply(i, event.to);
  ++iterations_;
}

Simulation& run_simulation(Simulation& sim, const StopCondition& stop) {
  const auto started = std::chrono::steady_clock::now();
  while (true) {
    if (stop.max_iterations && sim.iterations() >= *stop.max_iterations) break;
    if (stop.max_wall_time && std::chrono::steady_clock::now() - started >= *stop.max_wall_time) break;
    const auto event = sim.next_event(sim.rng());
    if (!event) break;
    if (stop.tmax && sim.time() + event->dt > *stop.tmax) {
      sim.set_time(*stop.tmax);
      break;
    }
    sim.apply(*event, sim.rng());
  }
  return sim;
}

EventObservations observe(const Events& events, const Distribution& infection_delay,
                          const Distribution& removal_delay, bool force, Rng& rng) {
  if (infection_delay.support_lo() < 0.0 || removal_delay.support_lo() < 0.0) {
    throw ValidationError("observation delay distributions must have non-negative support");
  }
  const std::size_t n = events.size();
  EventObservations obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto inf = events.time(i, Transition::infection)) {
      const auto rem = events.time(i, Transition::removal);
      double seen = *inf + infection_delay.sample(rng);
      if (force && rem) {
        int tries = 0;
        while (!(seen < *rem)) {
          if (++tries > kForceRetries) {
            throw InferenceError(fmt::format(
                "cannot observe infection of individual {} before its removal ({} tries); the "
                "infection delay {} is too long for an infectious period of {}",
                i + 1, kForceRetries, infection_delay.describe(), *rem - *inf));
          }
          seen = *inf + infection_delay.sample(rng);
        }
      }
      obs.infection[i] = seen;
    }
    if (const auto rem = events.time(i, Transition::removal)) {
      obs.removal[i] = *rem + removal_delay.sample(rng);
    }
  }
  return obs;
}

EventObservations observe(Simulation& sim, const Distribution& infection_delay,
                          const Distribution& removal_delay, bool force) {
  return observe(sim.events(), infection_delay, removal_delay, force, sim.rng());
}

}  // namespace tnilm
