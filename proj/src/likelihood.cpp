#include "tnilm/likelihood.hpp"

#include <cmath>

namespace tnilm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LikelihoodResult evaluate(RiskEvaluator& risk, const EpidemicStart& start, const Events& events,
                          const TransmissionNetwork* network, const LikelihoodConfig& cfg) {
  validate_events(events, start.states, start.time);
  if (network != nullptr) {
    validate_network(*network, events, start.states);
  }
  const ModelClass cls = events.model_class();
  const Transition leaves_s = first_transition(cls);

  RateState rs(risk, start.states);
  LikelihoodResult result{0.0, {}};
  double& ll = result.log_likelihood;
  double previous = start.time;

  for (const auto& ev : ordered_events(events)) {
    const double dt = ev.time - previous;
    ll -= rs.total() * dt;

    const std::size_t i = ev.individual;
    double realized = 0.0;
    if (ev.kind == leaves_s) {
      const auto& tr = rs.transmission();
      if (network == nullptr) {
        realized = rs.rates().se[i];
      } else if (network->external(i)) {
        realized = tr.exogenous[i];
      } else {
        realized = tr.endogenous_rate(i, *network->source_individual(i));
      }
      if (cfg.collect_snapshots) {
        result.snapshots.push_back({i, ev.time, tr.exogenous[i], tr.endogenous[i], rs.rates().se[i]});
      }
    } else if (ev.kind == Transition::infection) {
      realized = rs.rates().ei[i];
    } else {
      realized = rs.rates().ir[i];
    }
    if (!(realized > 0.0)) {
      ll = kNegInf;
      return result;
    }
    ll += std::log(realized);
    if (ll < cfg.early_stop_threshold) {
      ll = kNegInf;
      return result;
    }
    rs.apply(i, target_state(ev.kind));
    previous = ev.time;
  }
  return result;
}

}  // namespace

LikelihoodResult log_likelihood_ilm(RiskEvaluator& risk, const EpidemicStart& start,
                                    const Events& events, const LikelihoodConfig& cfg) {
  return evaluate(risk, start, events, nullptr, cfg);
}

LikelihoodResult log_likelihood_tnilm(RiskEvaluator& risk, const EpidemicStart& start,
                                      const Events& events, const TransmissionNetwork& network,
                                      const LikelihoodConfig& cfg) {
  return evaluate(risk, start, events, &network, cfg);
}

double log_likelihood_ilm(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                          const RiskParameters& rp, const EpidemicStart& start, const Events& events) {
  RiskEvaluator risk(cls, pop, rf, rp);
  return log_likelihood_ilm(risk, start, events).log_likelihood;
}

double log_likelihood_tnilm(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                            const RiskParameters& rp, const EpidemicStart& start,
                            const Events& events, const TransmissionNetwork& network) {
  RiskEvaluator risk(cls, pop, rf, rp);
  return log_likelihood_tnilm(risk, start, events, network).log_likelihood;
}

}  // namespace tnilm
