#pragma once

#include <limits>
#include <vector>

#include "tnilm/epidemic.hpp"
#include "tnilm/rates.hpp"

namespace tnilm {

struct LikelihoodConfig {
  // Abandon the pass (returning -inf) once the running log-likelihood drops
  // below this value. -inf disables early stopping.
  double early_stop_threshold = -std::numeric_limits<double>::infinity();
  // Keep the competing exposure rates seen at each exposure.
  bool collect_snapshots = false;
};

// Competing exposure rates for individual `individual` just before its exposure.
struct ExposureSnapshot {
  std::size_t individual;
  double time;
  double exogenous;
  std::vector<SourceRate> endogenous;
  double total;
};

struct LikelihoodResult {
  double log_likelihood;
  std::vector<ExposureSnapshot> snapshots;
};

// Fixed context of an epidemic record: who starts where, and when.
struct EpidemicStart {
  std::vector<DiseaseState> states;
  double time = 0.0;
};

// Sum over realized events of log(rate of the realized transition) minus the
// total event rate times the preceding inter-event time. The exposure term
// uses the full exposure rate (sources marginalized out).
LikelihoodResult log_likelihood_ilm(RiskEvaluator& risk, const EpidemicStart& start,
                                    const Events& events, const LikelihoodConfig& cfg = {});

// As above, but an exposure contributes the competing rate of its recorded
// source (or the exogenous rate for external sources).
LikelihoodResult log_likelihood_tnilm(RiskEvaluator& risk, const EpidemicStart& start,
                                      const Events& events, const TransmissionNetwork& network,
                                      const LikelihoodConfig& cfg = {});

double log_likelihood_ilm(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                          const RiskParameters& rp, const EpidemicStart& start, const Events& events);
double log_likelihood_tnilm(ModelClass cls, const Population& pop, const RiskFunctions& rf,
                            const RiskParameters& rp, const EpidemicStart& start,
                            const Events& events, const TransmissionNetwork& network);

}  // namespace tnilm
