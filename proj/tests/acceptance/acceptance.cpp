#include <fmt/format.h>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/uniform.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "stats.hpp"
#include "tempdir.hpp"
#include "tnilm/cli.hpp"
#include "tnilm/config.hpp"
#include "tnilm/csv.hpp"
#include "tnilm/likelihood.hpp"
#include "tnilm/mcmc.hpp"
#include "tnilm/posterior.hpp"
#include "tnilm/simulate.hpp"

namespace tnilm {
namespace {

using namespace testing;
using S = DiseaseState;
using nlohmann::json;

struct Outcome {
  bool pass;
  std::string detail;
};

const std::filesystem::path kSourceDir = TNILM_SOURCE_DIR;

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Random population on a 5 x 5 square with one gamma covariate.
std::shared_ptr<const Population> random_population(std::size_t n, Rng& rng) {
  return spatial_population(n, 5.0, 5.0, rng);
}

struct RandomModel {
  ModelClass cls;
  RiskFunctions rf;
  RiskParameters rp;
};

RandomModel random_model(ModelClass cls, Rng& rng) {
  const std::array<std::string, 3> kernels{"dist(k,i,1)^(-theta[1])", "theta[1]*exp(-theta[2]*dist(k,i,1))",
                                           "theta[1]"};
  const std::size_t kc = rng.index(kernels.size());
  const bool susc_cov = rng.uniform() < 0.5;
  const bool trans_cov = rng.uniform() < 0.5;
  const bool rem_cov = rng.uniform() < 0.5;
  RandomModel m{cls, {}, {}};
  m.rf = make_functions(cls, "theta[1]", susc_cov ? "theta[1]*risk.riskfactor1" : "1", kernels[kc],
                        trans_cov ? "theta[1]+risk.riskfactor1" : "1", "theta[1]",
                        rem_cov ? "theta[1]*risk.riskfactor1" : "theta[1]");
  std::vector<double> kernel;
  if (kc == 0) kernel = {rng.uniform(1.0, 4.0)};
  if (kc == 1) kernel = {rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.5)};
  if (kc == 2) kernel = {rng.uniform(0.05, 0.5)};
  std::optional<std::vector<double>> latency, removal;
  if (has_exposed(cls)) latency = std::vector<double>{rng.uniform(0.1, 1.0)};
  if (has_removed(cls)) removal = std::vector<double>{rng.uniform(0.05, 0.5)};
  m.rp = make_parameters({rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.001, 0.05)},
                         susc_cov ? std::vector<double>{rng.uniform(0.5, 2.0)} : std::vector<double>{}, kernel,
                         trans_cov ? std::vector<double>{rng.uniform(0.0, 1.0)} : std::vector<double>{}, latency,
                         removal);
  return m;
}

std::vector<S> random_states(ModelClass cls, std::size_t n, Rng& rng) {
  std::vector<S> legal;
  for (const auto s : {S::S, S::E, S::I, S::R}) {
    if (state_legal(cls, s)) legal.push_back(s);
  }
  std::vector<S> states(n, S::S);
  for (auto& s : states) {
    if (rng.uniform() < 0.3) s = legal[rng.index(legal.size())];
  }
  states[rng.index(n)] = S::I;
  return states;
}

constexpr std::array<ModelClass, 4> kClasses{ModelClass::SEIR, ModelClass::SIR, ModelClass::SEI, ModelClass::SI};

// Incremental rate bookkeeping against a from-scratch evaluation after every event.
Outcome rate_bookkeeping() {
  Rng rng(1001);
  std::size_t comparisons = 0, events = 0;
  for (int c = 0; c < 200; ++c) {
    const auto cls = kClasses[c % 4];
    const std::size_t n = 2 + rng.index(49);
    const auto pop = random_population(n, rng);
    const auto m = random_model(cls, rng);
    Simulation sim(cls, pop, m.rf, m.rp, random_states(cls, n, rng), 0.0, Rng(rng.index(1u << 30)));
    for (int step = 0; step < 4 * static_cast<int>(n); ++step) {
      const auto ev = sim.next_event(sim.rng());
      if (!ev) break;
      sim.apply(*ev, sim.rng());
      ++events;
      const auto [tr, er] = initialize_rates(sim.states(), cls, *pop, m.rf, m.rp);
      const auto& inc = sim.rates();
      auto same = [&](const std::vector<double>& a, const std::vector<double>& b, const char* what) {
        if (a.size() != b.size()) throw std::runtime_error(fmt::format("{} size differs", what));
        for (std::size_t j = 0; j < a.size(); ++j) {
          ++comparisons;
          if (!relatively_close(a[j], b[j], 1e-9)) {
            throw std::runtime_error(
                fmt::format("config {} event {}: {}[{}] incremental {} vs scratch {}", c, step, what, j, a[j], b[j]));
          }
        }
      };
      same(inc.rates().se, er.se, "se");
      same(inc.rates().ei, er.ei, "ei");
      same(inc.rates().ir, er.ir, "ir");
      same(inc.transmission().exogenous, tr.exogenous, "exogenous");
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = inc.transmission().endogenous[i];
        const auto& b = tr.endogenous[i];
        if (a.size() != b.size()) throw std::runtime_error(fmt::format("config {}: source row {} size", c, i));
        for (std::size_t j = 0; j < a.size(); ++j) {
          ++comparisons;
          if (a[j].source != b[j].source || !relatively_close(a[j].rate, b[j].rate, 1e-9)) {
            throw std::runtime_error(fmt::format("config {}: source row {} entry {}", c, i, j));
          }
        }
      }
    }
  }
  return {events > 1000, fmt::format("200 configs, {} events, {} rate comparisons agree", events, comparisons)};
}

// Frozen process: gaps, event cells and sources drawn repeatedly from one state.
Outcome simulator_distributions() {
  const std::size_t draws = 100000;
  // (a) frozen single-rate process: one infectious individual with removal rate 0.1.
  const auto lone = std::make_shared<const Population>(
      make_population({"x", "riskfactor1"}, {0.0, 1.0}, 1, DistanceSpec::euclidean({"x"})));
  Simulation single(ModelClass::SIR, lone, spatial_sir_functions(),
                    make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), {S::I}, 0.0,
                    Rng(1));
  Rng rng(2);
  std::vector<double> gaps;
  for (std::size_t d = 0; d < draws; ++d) gaps.push_back(single.next_event(rng)->dt);
  const auto ks = ks_test(gaps, [](double x) { return 1.0 - std::exp(-0.1 * x); });

  // Frozen multi-rate process: gaps are Exponential(total), cells follow rate / total.
  Rng prng(3);
  const auto pop = spatial_population(6, 3.0, 3.0, prng);
  Simulation multi(ModelClass::SIR, pop, spatial_sir_functions(),
                   make_parameters({0.05}, {}, {2.0}, {}, std::nullopt, std::vector<double>{0.1}),
                   {S::I, S::S, S::I, S::S, S::R, S::S}, 0.0, Rng(4));
  const auto& er = multi.rates().rates();
  const double total = multi.rates().total();
  std::vector<double> multi_gaps;
  std::map<std::pair<std::size_t, S>, std::size_t> cells;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto e = multi.next_event(rng);
    multi_gaps.push_back(e->dt);
    ++cells[{e->individual, e->to}];
  }
  const auto ks_multi = ks_test(multi_gaps, [total](double x) { return 1.0 - std::exp(-total * x); });
  double cell_err = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double pe = er.se[i] / total;
    const double pr = er.ir[i] / total;
    cell_err = std::max(cell_err, std::abs(static_cast<double>(cells[{i, S::I}]) / draws - pe));
    cell_err = std::max(cell_err, std::abs(static_cast<double>(cells[{i, S::R}]) / draws - pr));
  }

  // Sources: sparks 0.1, rates 0.3 and 0.6 from the two infectious individuals.
  const auto line = std::make_shared<const Population>(
      make_population({"x", "t"}, {0.0, 0.0, -1.0, 0.3, 1.0, 0.6}, 3, DistanceSpec::euclidean({"x"})));
  Simulation src(ModelClass::SI, line,
                 make_functions(ModelClass::SI, "theta[1]", "1", "dist(i,k,1)^(-theta[1])", "risk.t", "", ""),
                 make_parameters({0.1}, {}, {2.0}, {}, std::nullopt, std::nullopt), {S::S, S::I, S::I}, 0.0, Rng(5));
  std::array<std::size_t, 3> source_counts{};
  for (std::size_t d = 0; d < draws; ++d) {
    const auto s = src.sample_source(0, rng);
    ++source_counts[s == kExternalSource ? 2 : static_cast<std::size_t>(s) - 1];
  }
  const std::array<double, 3> source_probs{0.3, 0.6, 0.1};
  double source_err = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    source_err = std::max(source_err, std::abs(static_cast<double>(source_counts[j]) / draws - source_probs[j]));
  }
  const bool pass = ks.p_value > 0.01 && ks_multi.p_value > 0.01 && cell_err <= 0.01 && source_err <= 0.01;
  return {pass, fmt::format("KS p single {:.3f}, frozen multi {:.3f}; max cell error {:.4f}; max source error {:.4f}",
                            ks.p_value, ks_multi.p_value, cell_err, source_err)};
}

// Summing the network-conditional likelihood over every source assignment gives the marginal one.
Outcome marginalization() {
  Rng rng(3003);
  double worst = 0.0;
  std::size_t epidemics = 0, networks = 0;
  for (int t = 0; t < 400; ++t) {
    const auto cls = kClasses[t % 4];
    const std::size_t n = 2 + rng.index(3);
    const auto pop = random_population(n, rng);
    auto m = random_model(cls, rng);
    if (m.rp.slots[Role::sparks]->front() == 0.0) m.rp.slots[Role::sparks] = std::vector<double>{0.02};
    Simulation sim(cls, pop, m.rf, m.rp, random_states(cls, n, rng), 0.0, Rng(rng.index(1u << 30)));
    run_simulation(sim, {.max_iterations = 1 + rng.index(5)});
    const auto& ev = sim.events();
    const EpidemicStart start{sim.starting_states(), 0.0};
    std::vector<std::size_t> exposed;
    for (std::size_t i = 0; i < n; ++i) {
      if (start.states[i] == S::S && ev.has(i, first_transition(cls))) exposed.push_back(i);
    }
    RiskEvaluator risk(cls, *pop, m.rf, m.rp);
    const double ilm = log_likelihood_ilm(risk, start, ev).log_likelihood;
    // Every assignment: external or any other individual.
    std::vector<double> terms;
    std::vector<std::size_t> choice(exposed.size(), 0);
    for (;;) {
      TransmissionNetwork net(n);
      for (std::size_t e = 0; e < exposed.size(); ++e) {
        const std::size_t c = choice[e];
        if (c == n) {
          net.set_external(exposed[e]);
        } else {
          net.set_internal(c, exposed[e]);
        }
      }
      bool self = false;
      for (std::size_t e = 0; e < exposed.size(); ++e) self |= choice[e] == exposed[e];
      if (!self) {
        terms.push_back(log_likelihood_tnilm(risk, start, ev, net).log_likelihood);
        ++networks;
      }
      std::size_t e = 0;
      while (e < choice.size() && ++choice[e] > n) choice[e++] = 0;
      if (e == choice.size()) break;
    }
    const double marginal = log_sum_exp(terms);
    if (!std::isfinite(ilm) || !std::isfinite(marginal)) {
      return {false, fmt::format("epidemic {}: non-finite likelihood ({} vs {})", t, ilm, marginal)};
    }
    // |log a - log b| bounds the relative error of a against b.
    worst = std::max(worst, std::abs(std::expm1(marginal - ilm)));
    ++epidemics;
  }
  return {worst <= 1e-8,
          fmt::format("{} epidemics, {} networks enumerated, worst relative error {:.3g}", epidemics, networks, worst)};
}

// Individual 1 infectious from 0 with removal rate 0.1; individual 2 infected at time 2 with kernel 1.
Outcome hand_likelihood() {
  const auto pop = make_population({"x", "riskfactor1"}, {0.0, 1.0, 1.0, 1.0}, 2, DistanceSpec::euclidean({"x"}));
  const auto rp = make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1});
  const EpidemicStart start{{S::I, S::S}, 0.0};
  Events ev(ModelClass::SIR, 2);
  ev.set(1, Transition::infection, 2.0);
  TransmissionNetwork net(2);
  net.set_internal(0, 1);
  // log(kernel 1) - (infection 1 + removal 0.1) * 2
  const double expected = -2.2;
  const double tn = log_likelihood_tnilm(ModelClass::SIR, pop, spatial_sir_functions(), rp, start, ev, net);
  const double ilm = log_likelihood_ilm(ModelClass::SIR, pop, spatial_sir_functions(), rp, start, ev);
  const bool pass = std::abs(tn - expected) <= 1e-12 && std::abs(ilm - expected) <= 1e-12;
  return {pass, fmt::format("TN-ILM {:.15g}, ILM {:.15g}, expected -2.2", tn, ilm)};
}

// Gibbs network draws against hand-enumerated source probabilities.
Outcome gibbs_conditional() {
  // x = 0, -1, 1; transmissibility t = 0.5, 0.3, 0.6; kernel |x_i - x_k|^-2; sparks 0.1.
  // Individual 2 infectious from the start, 1 infected at 1, 3 infected at 2.
  const auto pop = make_population({"x", "t"}, {0.0, 0.5, -1.0, 0.3, 1.0, 0.6}, 3, DistanceSpec::euclidean({"x"}));
  const auto rf = make_functions(ModelClass::SI, "theta[1]", "1", "dist(i,k,1)^(-theta[1])", "risk.t", "", "");
  const auto rp = make_parameters({0.1}, {}, {2.0}, {}, std::nullopt, std::nullopt);
  const EpidemicStart start{{S::S, S::I, S::S}, 0.0};
  Events ev(ModelClass::SI, 3);
  ev.set(0, Transition::infection, 1.0);
  ev.set(2, Transition::infection, 2.0);
  // Individual 1: external 0.1, from 2: 0.3.  Individual 3: external 0.1, from 2: 0.3 / 4, from 1: 0.5.
  const std::array<double, 2> first{0.1 / 0.4, 0.3 / 0.4};
  const double t3 = 0.1 + 0.075 + 0.5;
  const std::array<double, 3> second{0.1 / t3, 0.075 / t3, 0.5 / t3};
  std::vector<double> probs;
  for (double a : first)
    for (double b : second) probs.push_back(a * b);
  RiskEvaluator risk(ModelClass::SI, pop, rf, rp);
  Rng rng(55);
  std::vector<std::size_t> counts(6, 0);
  auto code = [](std::int32_t s, std::initializer_list<std::int32_t> order) {
    std::size_t j = 0;
    for (auto o : order) {
      if (o == s) return j;
      ++j;
    }
    throw std::runtime_error(fmt::format("unexpected source {}", s));
  };
  const std::size_t draws = 100000;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto g = gibbs_update_network(risk, start, ev, rng);
    const std::size_t a = code(g.network.raw(0), {kExternalSource, 1});
    const std::size_t b = code(g.network.raw(2), {kExternalSource, 1, 0});
    ++counts[a * 3 + b];
  }
  const auto chi = chi_squared_test(counts, probs);
  return {chi.p_value > 0.01, fmt::format("chi-squared {:.3f} on {} dof, p = {:.3f}", chi.statistic, chi.dof, chi.p_value)};
}

McmcProblem spatial_sir_problem(std::shared_ptr<const Population> pop, const EventObservations& obs,
                                std::vector<S> states) {
  McmcProblem p;
  p.cls = ModelClass::SIR;
  p.population = std::move(pop);
  p.functions = spatial_sir_functions();
  p.priors = spatial_sir_priors();
  p.observations = obs;
  p.extents = {std::nullopt, Extent{0.0, 5.0}, Extent{0.0, 5.0}};
  p.start = {std::move(states), 0.0};
  return p;
}

// Three seeded replicates: simulate, observe, fit, and check 95% interval coverage.
Outcome parameter_recovery() {
  const std::vector<double> truth{1e-4, 4.0, 0.1};
  const std::size_t n = 50;
  std::array<std::size_t, 3> covered{};
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng prng(seed);
    const auto pop = spatial_population(n, 15.0, 15.0, prng);
    Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(n), 0.0,
                   Rng(seed + 100));
    run_simulation(sim, {.tmax = 200.0});
    const auto obs = observe(sim, Distribution::uniform(0.5, 2.5), Distribution::uniform(0.5, 2.5), false);
    McmcRun run;
    run.problem = spatial_sir_problem(pop, obs, first_infectious(n));
    run.settings.init_attempts = 20000;
    run.settings.event_batches = 10;
    run.settings.seed = seed + 200;
    run.settings.store_thin = 20;
    start(run);
    iterate(run, 20000);
    const auto rows = summarize(run, 5000, 20);
    std::size_t infected = 0;
    for (std::size_t i = 0; i < n; ++i) infected += sim.events().has(i, Transition::infection);
    detail += fmt::format("seed {} ({} infected):", seed, infected);
    for (std::size_t j = 0; j < 3; ++j) {
      const bool in = rows[j].lower <= truth[j] && truth[j] <= rows[j].upper;
      covered[j] += in;
      detail += fmt::format(" {} [{:.3g}, {:.3g}]{}", rows[j].name, rows[j].lower, rows[j].upper, in ? "" : "*");
    }
    detail += "; ";
  }
  const bool pass = std::all_of(covered.begin(), covered.end(), [](std::size_t c) { return c >= 2; });
  return {pass, detail + fmt::format("covered {}/{}/{} of 3", covered[0], covered[1], covered[2])};
}

// With no events the likelihood is constant, so the chain samples the prior.
Outcome prior_recovery() {
  const std::size_t n = 5;
  Rng prng(7);
  const auto pop = spatial_population(n, 5.0, 5.0, prng);
  EventObservations obs;
  obs.infection.assign(n, std::numeric_limits<double>::quiet_NaN());
  obs.removal.assign(n, std::numeric_limits<double>::quiet_NaN());
  McmcRun run;
  run.problem = spatial_sir_problem(pop, obs, std::vector<S>(n, S::S));
  run.settings.seed = 77;
  start(run);
  iterate(run, 20000);
  const std::size_t burnin = 1000, thin = 50;
  const auto keep = retained_samples(run.chains[0], burnin, thin);
  std::vector<std::vector<double>> values(3);
  for (const auto s : keep) {
    for (std::size_t j = 0; j < 3; ++j) values[j].push_back(run.chains[0].parameters[s][j]);
  }
  const boost::math::exponential_distribution<double> sparks(1.0 / 1e-4);
  const boost::math::uniform_distribution<double> beta(1.0, 7.0), eta(0.0, 1.0);
  const std::array<std::function<double(double)>, 3> cdfs{
      [&](double x) { return cdf(sparks, std::max(x, 0.0)); },
      [&](double x) { return cdf(beta, std::clamp(x, 1.0, 7.0)); },
      [&](double x) { return cdf(eta, std::clamp(x, 0.0, 1.0)); }};
  const std::array<const char*, 3> names{"sparks", "infectivity", "removal"};
  bool pass = true;
  std::string detail = fmt::format("{} samples; KS p:", keep.size());
  for (std::size_t j = 0; j < 3; ++j) {
    const auto ks = ks_test(values[j], cdfs[j]);
    pass &= ks.p_value > 0.01;
    detail += fmt::format(" {} {:.3f}", names[j], ks.p_value);
  }
  return {pass, detail};
}

json without_timings(json j) {
  j.erase("durations_s");
  return j;
}

// Compares every file under a and b; manifests are compared without wall-clock timings.
std::vector<std::string> tree_differences(const std::filesystem::path& a, const std::filesystem::path& b,
                                          std::size_t& compared) {
  std::set<std::filesystem::path> files;
  for (const auto& root : {a, b}) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files.insert(std::filesystem::relative(e.path(), root));
    }
  }
  std::vector<std::string> diffs;
  for (const auto& f : files) {
    if (f.filename() == "progress.log") continue;
    ++compared;
    const auto x = slurp(a / f), y = slurp(b / f);
    const bool same = f.extension() == ".json" ? without_timings(json::parse(x)) == without_timings(json::parse(y))
                                               : x == y;
    if (!same) diffs.push_back(f.string());
  }
  return diffs;
}

Outcome determinism() {
  TempDir dir;
  Rng rng(8);
  std::string csv = "x,y,riskfactor1\n";
  for (int i = 0; i < 30; ++i) {
    csv += fmt::format("{},{},{}\n", rng.uniform(0, 5), rng.uniform(0, 5), rng.gamma(1, 1));
  }
  dir.write("pop.csv", csv);
  auto j = json::parse(slurp(kSourceDir / "configs" / "sir_simulated.json"));
  j["population"]["risks"] = "pop.csv";
  j["output_dir"] = "out";
  j["simulate"]["tmax"] = 100.0;
  j["fit"]["observations"] = "out/simulate/observations.csv";
  j["fit"]["init_attempts"] = 2000;
  j["fit"]["iterations"] = 400;
  j["fit"]["burnin"] = 100;
  j["fit"]["output_thin"] = 2;
  j["fit"]["thin"] = 2;
  j["fit"]["chains"] = 2;
  const auto cfg = parse_config(j, dir.path());
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    cli::cmd_simulate(cfg, {.output = dir / run / "simulate"}, log);
  }
  for (const char* run : {"a", "b"}) {
    cli::cmd_fit(cfg, {.observations = dir / "a" / "simulate" / "observations.csv", .output = dir / run / "fit"}, log);
  }
  std::size_t compared = 0;
  const auto diffs = tree_differences(dir / "a", dir / "b", compared);
  std::string detail = fmt::format("{} output files compared", compared);
  for (const auto& d : diffs) detail += "; differs: " + d;
  return {diffs.empty() && compared >= 10, detail};
}

// Expressions and hand oracles on random inputs with an asymmetric distance structure.
Outcome dsl_conformance() {
  Rng rng(9009);
  struct Case {
    const char* name;
    const char* text;
    ExprContext context;
    std::size_t params;
    std::function<double(const std::vector<double>&, const std::vector<double>&, const std::vector<double>&,
                         std::size_t, std::size_t, std::size_t)>
        oracle;
  };
  // risks: riskfactor1 per individual; dist: (k * n + i) * 3 + c, read as entry (k, i).
  const std::vector<Case> cases{
      {"constant", "theta[1]", ExprContext::single, 1,
       [](const auto& th, const auto&, const auto&, std::size_t, std::size_t, std::size_t) { return th[0]; }},
      {"one", "1", ExprContext::single, 0,
       [](const auto&, const auto&, const auto&, std::size_t, std::size_t, std::size_t) { return 1.0; }},
      {"linear", "theta[1] * risk.riskfactor1", ExprContext::single, 1,
       [](const auto& th, const auto& rf, const auto&, std::size_t i, std::size_t, std::size_t) {
         return th[0] * rf[i];
       }},
      {"powerlaw", "dist(k,i,1)^(-theta[1])", ExprContext::pair, 1,
       [](const auto& th, const auto&, const auto& d, std::size_t i, std::size_t k, std::size_t n) {
         return std::pow(d[(k * n + i) * 3], -th[0]);
       }},
      {"hagelloch kappa", "theta[1]*dist(k,i,1)^(-theta[2]) + theta[3]*dist(k,i,2) + theta[4]*dist(k,i,3)",
       ExprContext::pair, 4,
       [](const auto& th, const auto&, const auto& d, std::size_t i, std::size_t k, std::size_t n) {
         const double* e = &d[(k * n + i) * 3];
         return th[0] * std::pow(e[0], -th[1]) + th[2] * e[1] + th[3] * e[2];
       }},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto expr = parse_risk_expr(c.text, c.context);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng.index(6);
      std::vector<double> rf(n), dist(n * n * 3, 0.0);
      for (auto& v : rf) v = rng.gamma(1.0, 1.0);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          if (i == k) continue;
          double* e = &dist[(k * n + i) * 3];
          e[0] = rng.uniform(0.05, 20.0);
          e[1] = rng.uniform() < 0.5 ? 1.0 : 0.0;
          e[2] = rng.uniform() < 0.5 ? 1.0 : 0.0;
        }
      }
      // Population stores entry (a, b) at (a * n + b) * dims, so the layout matches.
      const Population pop({"riskfactor1"}, rf, n, dist, 3);
      std::vector<double> th(c.params);
      for (auto& v : th) v = rng.uniform(0.01, 7.0);
      const std::size_t i = rng.index(n);
      std::size_t k = rng.index(n - 1);
      if (k >= i) ++k;
      const double got = c.context == ExprContext::pair ? expr.evaluate(th, pop, i, k) : expr.evaluate(th, pop, i);
      const double want = c.oracle(th, rf, dist, i, k, n);
      const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 1e-12) {
        return {false, fmt::format("{}: got {} want {} (trial {})", c.name, got, want, trial)};
      }
    }
  }
  return {true, fmt::format("5 expressions x 100 random inputs, worst relative error {:.3g}", worst)};
}

Outcome hagelloch_isolated_case() {
  TempDir dir;
  auto cfg = load_config(kSourceDir / "configs" / "hagelloch.json");
  cfg.fit->settings.init_attempts = 20000;
  std::ostringstream log;
  cli::cmd_fit(cfg, {.iterations = 20000, .output = dir / "fit"}, log);
  cli::cmd_summarize(dir / "fit", {.burnin = 5000, .thin = 50}, log);
  const auto table = csv::read(dir / "fit" / "network_posterior.csv");
  double external = 0.0;
  for (const auto& row : table.rows) {
    if (row[0] == "external" && row[1] == "141") external = csv::parse_number(row[2], table.source, 0, 3);
  }
  return {external > 0.9, fmt::format("individual 141 external source frequency {:.3f}", external)};
}

using Criterion = Outcome (*)();
const std::array<Criterion, 10> kCriteria{rate_bookkeeping,    simulator_distributions, marginalization,
                                          hand_likelihood,     gibbs_conditional,       parameter_recovery,
                                          prior_recovery,      determinism,             dsl_conformance,
                                          hagelloch_isolated_case};

}  // namespace
}  // namespace tnilm

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--criterion" && a + 1 < argc) {
      const int n = std::atoi(argv[++a]);
      if (n < 1 || n > 10) {
        std::cerr << "criterion must be 1-10\n";
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::cerr << "usage: tnilm_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= 10; ++n) selected.push_back(n);
  }
  bool all = true;
  for (const auto n : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    tnilm::Outcome r;
    try {
      r = tnilm::kCriteria[n - 1]();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("criterion {}: {} - {} ({:.1f}s)\n", n, r.pass ? "PASS" : "FAIL", r.detail, secs)
              << std::flush;
    all &= r.pass;
  }
  return all ? 0 : 1;
}
