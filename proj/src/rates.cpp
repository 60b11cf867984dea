#include "tnilm/rates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tnilm/error.hpp"

namespace tnilm {

namespace {
constexpr std::size_t kKernelCacheLimit = 4096;
}

std::string_view to_string(DiseaseState s) {
  switch (s) {
    case DiseaseState::S: return "S";
    case DiseaseState::E: return "E";
    case DiseaseState::I: return "I";
    case DiseaseState::R: return "R";
  }
  return "?";
}

DiseaseState parse_disease_state(std::string_view text) {
  if (text == "S") return DiseaseState::S;
  if (text == "E") return DiseaseState::E;
  if (text == "I") return DiseaseState::I;
  if (text == "R") return DiseaseState::R;
  throw ValidationError(fmt::format("unknown disease state '{}'", text));
}

bool state_legal(ModelClass cls, DiseaseState s) {
  switch (s) {
    case DiseaseState::E: return has_exposed(cls);
    case DiseaseState::R: return has_removed(cls);
    default: return true;
  }
}

std::optional<DiseaseState> next_state(ModelClass cls, DiseaseState s) {
  switch (s) {
    case DiseaseState::S: return has_exposed(cls) ? DiseaseState::E : DiseaseState::I;
    case DiseaseState::E: return DiseaseState::I;
    case DiseaseState::I:
      if (has_removed(cls)) return DiseaseState::R;
      return std::nullopt;
    case DiseaseState::R: return std::nullopt;
  }
  return std::nullopt;
}

RiskEvaluator::RiskEvaluator(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                             const RiskParameters& rp)
    : cls_(cls), pop_(&pop), kernel_expr_(rf.at(Role::infectivity)) {
  const std::size_t n = pop.size();
  auto fill = [&](Role role, std::vector<double>& out) {
    out.assign(n, 0.0);
    if (!role_required(cls, role)) return;
    const auto& expr = rf.at(role);
    const auto params = rp.at(role);
    for (std::size_t i = 0; i < n; ++i) out[i] = expr.evaluate(params, pop, i);
  };
  fill(Role::sparks, sparks_);
  fill(Role::susceptibility, susceptibility_);
  fill(Role::transmissibility, transmissibility_);
  fill(Role::latency, latency_);
  fill(Role::removal, removal_);
  const auto kp = rp.at(Role::infectivity);
  kernel_params_.assign(kp.begin(), kp.end());
  if (n <= kKernelCacheLimit) {
    kernel_cache_.assign(n * n, std::numeric_limits<double>::quiet_NaN());
  }
}

double RiskEvaluator::kernel(std::size_t i, std::size_t k) {
  if (kernel_cache_.empty()) {
    return kernel_expr_.evaluate(kernel_params_, *pop_, i, k);
  }
  double& slot = kernel_cache_[i * pop_->size() + k];
  if (std::isnan(slot)) {
    slot = kernel_expr_.evaluate(kernel_params_, *pop_, i, k);
  }
  return slot;
}

double RiskEvaluator::endogenous(std::size_t i, std::size_t k) {
  const double st = susceptibility_[i] * transmissibility_[k];
  if (st == 0.0) return 0.0;
  return st * kernel(i, k);
}

double TransmissionRates::endogenous_rate(std::size_t i, std::size_t k) const {
  const auto& row = endogenous[i];
  const auto it = std::lower_bound(row.begin(), row.end(), k,
                                   [](const SourceRate& s, std::size_t key) { return s.source < key; });
  if (it == row.end() || it->source != k) return 0.0;
  return it->rate;
}

namespace {

double row_sum(const std::vector<SourceRate>& row, double exogenous) {
  double s = 0.0;
  for (const auto& e : row) s += e.rate;
  return s + exogenous;
}

void check_states(ModelClass cls, const std::vector<DiseaseState>& states, std::size_t n) {
  if (states.size() != n) {
    throw ValidationError(fmt::format("{} disease states given for {} individuals", states.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!state_legal(cls, states[i])) {
      throw ValidationError(fmt::format("state {} of individual {} is not part of the {} model",
                                        to_string(states[i]), i + 1, to_string(cls)));
    }
  }
}

}  // namespace

std::pair<TransmissionRates, EventRates> initialize_rates(const std::vector<DiseaseState>& states,
                                                          RiskEvaluator& risk) {
  const ModelClass cls = risk.model_class();
  const std::size_t n = risk.size();
  check_states(cls, states, n);
  TransmissionRates tr;
  EventRates er;
  tr.exogenous.assign(n, 0.0);
  tr.endogenous.assign(n, {});
  er.se.assign(n, 0.0);
  if (has_exposed(cls)) er.ei.assign(n, 0.0);
  if (has_removed(cls)) er.ir.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    switch (states[i]) {
      case DiseaseState::S: {
        tr.exogenous[i] = risk.sparks(i);
        auto& row = tr.endogenous[i];
        for (std::size_t k = 0; k < n; ++k) {
          if (states[k] == DiseaseState::I) row.push_back({k, risk.endogenous(i, k)});
        }
        er.se[i] = row_sum(row, tr.exogenous[i]);
        break;
      }
      case DiseaseState::E:
        er.ei[i] = risk.latency(i);
        break;
      case DiseaseState::I:
        if (has_removed(cls)) er.ir[i] = risk.removal(i);
        break;
      case DiseaseState::R:
        break;
    }
  }
  return {std::move(tr), std::move(er)};
}

std::pair<TransmissionRates, EventRates> initialize_rates(const std::vector<DiseaseState>& states,
                                                          ModelClass cls, const Population& pop,
                                                          const RiskFunctions& rf,
                                                          const RiskParameters& rp) {
  RiskEvaluator risk(cls, pop, rf, rp);
  return initialize_rates(states, risk);
}

double total_rate(const EventRates& er) {
  double total = 0.0;
  for (const double r : er.se) total += r;
  for (const double r : er.ei) total += r;
  for (const double r : er.ir) total += r;
  return total;
}

RateState::RateState(RiskEvaluator& risk, std::vector<DiseaseState> states)
    : risk_(&risk), states_(std::move(states)) {
  recompute();
}

void RateState::recompute() {
  auto [tr, er] = initialize_rates(states_, *risk_);
  tr_ = std::move(tr);
  er_ = std::move(er);
}

void RateState::resum(std::size_t i) { er_.se[i] = row_sum(tr_.endogenous[i], tr_.exogenous[i]); }

void RateState::add_source(std::size_t k) {
  const std::size_t n = states_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (states_[i] != DiseaseState::S) continue;
    auto& row = tr_.endogenous[i];
    const auto it = std::lower_bound(row.begin(), row.end(), k,
                                     [](const SourceRate& s, std::size_t key) { return s.source < key; });
    row.insert(it, SourceRate{k, risk_->endogenous(i, k)});
    resum(i);
  }
}

void RateState::remove_source(std::size_t k) {
  const std::size_t n = states_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (states_[i] != DiseaseState::S) continue;
    auto& row = tr_.endogenous[i];
    const auto it = std::lower_bound(row.begin(), row.end(), k,
                                     [](const SourceRate& s, std::size_t key) { return s.source < key; });
    if (it != row.end() && it->source == k) {
      row.erase(it);
      resum(i);
    }
  }
}

void RateState::apply(std::size_t individual, DiseaseState to) {
  const ModelClass cls = risk_->model_class();
  if (individual >= states_.size()) {
    throw ValidationError(fmt::format("individual {} out of range", individual + 1));
  }
  const DiseaseState from = states_[individual];
  const auto expected = next_state(cls, from);
  if (!expected || *expected != to) {
    throw ValidationError(fmt::format("illegal transition {} -> {} for individual {} in {} model",
                                      to_string(from), to_string(to), individual + 1,
                                      to_string(cls)));
  }
  states_[individual] = to;
  switch (from) {
    case DiseaseState::S:
      tr_.exogenous[individual] = 0.0;
      tr_.endogenous[individual].clear();
      er_.se[individual] = 0.0;
      if (to == DiseaseState::E) {
        er_.ei[individual] = risk_->latency(individual);
      } else {
        if (has_removed(cls)) er_.ir[individual] = risk_->removal(individual);
        add_source(individual);
      }
      break;
    case DiseaseState::E:
      er_.ei[individual] = 0.0;
      if (has_removed(cls)) er_.ir[individual] = risk_->removal(individual);
      add_source(individual);
      break;
    case DiseaseState::I:
      er_.ir[individual] = 0.0;
      remove_source(individual);
      break;
    case DiseaseState::R:
      break;
  }
}

}  // namespace tnilm
