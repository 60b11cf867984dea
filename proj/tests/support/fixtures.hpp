#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tnilm/mcmc.hpp"
#include "tnilm/model.hpp"
#include "tnilm/population.hpp"
#include "tnilm/riskdsl.hpp"
#include "tnilm/rng.hpp"
#include "tnilm/simulate.hpp"

namespace tnilm::testing {

inline RiskFunctions make_functions(ModelClass cls, const std::string& sparks, const std::string& susc,
                                    const std::string& kernel, const std::string& trans,
                                    const std::string& latency, const std::string& removal) {
  RiskFunctions rf;
  rf.slots[Role::sparks] = parse_risk_expr(sparks, ExprContext::single);
  rf.slots[Role::susceptibility] = parse_risk_expr(susc, ExprContext::single);
  rf.slots[Role::infectivity] = parse_risk_expr(kernel, ExprContext::pair);
  rf.slots[Role::transmissibility] = parse_risk_expr(trans, ExprContext::single);
  if (has_exposed(cls)) rf.slots[Role::latency] = parse_risk_expr(latency, ExprContext::single);
  if (has_removed(cls)) rf.slots[Role::removal] = parse_risk_expr(removal, ExprContext::single);
  return rf;
}

inline RiskParameters make_parameters(std::vector<double> sparks, std::vector<double> susc,
                                      std::vector<double> kernel, std::vector<double> trans,
                                      std::optional<std::vector<double>> latency,
                                      std::optional<std::vector<double>> removal) {
  RiskParameters rp;
  rp.slots[Role::sparks] = std::move(sparks);
  rp.slots[Role::susceptibility] = std::move(susc);
  rp.slots[Role::infectivity] = std::move(kernel);
  rp.slots[Role::transmissibility] = std::move(trans);
  rp.slots[Role::latency] = std::move(latency);
  rp.slots[Role::removal] = std::move(removal);
  return rp;
}

// Spatial SIR with power-law kernel and covariate-driven removal.
inline std::shared_ptr<const Population> spatial_population(std::size_t n, double width, double height,
                                                            Rng& rng) {
  std::vector<double> risks;
  for (std::size_t i = 0; i < n; ++i) {
    risks.push_back(rng.uniform(0.0, width));
    risks.push_back(rng.uniform(0.0, height));
    risks.push_back(rng.gamma(1.0, 1.0));
  }
  return std::make_shared<const Population>(
      make_population({"x", "y", "riskfactor1"}, std::move(risks), n, DistanceSpec::euclidean({"x", "y"})));
}

inline RiskFunctions spatial_sir_functions() {
  return make_functions(ModelClass::SIR, "theta[1]", "1", "dist(k,i,1)^(-theta[1])", "1", "",
                        "theta[1]*risk.riskfactor1");
}

inline RiskParameters spatial_sir_truth() {
  return make_parameters({1e-4}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1});
}

inline RiskPriors spatial_sir_priors() {
  RiskPriors p;
  p.slots[Role::sparks] = std::vector<Distribution>{Distribution::exponential(1e-4)};
  p.slots[Role::susceptibility] = std::vector<Distribution>{};
  p.slots[Role::infectivity] = std::vector<Distribution>{Distribution::uniform(1.0, 7.0)};
  p.slots[Role::transmissibility] = std::vector<Distribution>{};
  p.slots[Role::removal] = std::vector<Distribution>{Distribution::uniform(0.0, 1.0)};
  return p;
}

inline std::vector<DiseaseState> first_infectious(std::size_t n) {
  std::vector<DiseaseState> s(n, DiseaseState::S);
  s[0] = DiseaseState::I;
  return s;
}

}  // namespace tnilm::testing
