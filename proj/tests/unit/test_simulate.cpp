#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fixtures.hpp"
#include "stats.hpp"
#include "tnilm/error.hpp"
#include "tnilm/simulate.hpp"

namespace tnilm {
namespace {

using namespace testing;
using S = DiseaseState;

std::shared_ptr<const Population> line_population(std::vector<double> x) {
  const std::size_t n = x.size();
  std::vector<double> risks;
  for (double v : x) {
    risks.push_back(v);
    risks.push_back(1.0);
  }
  return std::make_shared<const Population>(
      make_population({"x", "riskfactor1"}, std::move(risks), n, DistanceSpec::euclidean({"x"})));
}

TEST(Simulate, NoEventsWhenNothingCanHappen) {
  auto pop = line_population({0.0});
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(),
                 make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), Rng(1));
  EXPECT_FALSE(sim.next_event(sim.rng()).has_value());
  run_simulation(sim, {});
  EXPECT_EQ(sim.iterations(), 0u);
  EXPECT_FALSE(sim.events().has(0, Transition::infection));
}

TEST(Simulate, SingleRemovalRateGivesExponentialGaps) {
  auto pop = line_population({0.0});
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(),
                 make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), {S::I}, 0.0, Rng(2));
  Rng rng(3);
  double sum = 0.0;
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto e = sim.next_event(rng);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->individual, 0u);
    EXPECT_EQ(e->to, S::R);
    sum += e->dt;
  }
  EXPECT_NEAR(sum / draws, 10.0, 0.2);
}

TEST(Simulate, EventCellFrequencies) {
  auto pop = line_population({0.0, 1.0});
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(),
                 make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), {S::I, S::S}, 0.0,
                 Rng(4));
  Rng rng(5);
  int infections = 0;
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto e = sim.next_event(rng);
    if (e->individual == 1 && e->to == S::I) ++infections;
  }
  EXPECT_NEAR(static_cast<double>(infections) / draws, 1.0 / 1.1, 0.01);
}

TEST(Simulate, SourceFrequencies) {
  // Distances 1 from both sources with kernels 0.3 and 0.6 via transmissibility; sparks 0.1.
  const auto pop = std::make_shared<const Population>(
      make_population({"x", "t"}, {0.0, 0.0, -1.0, 0.3, 1.0, 0.6}, 3, DistanceSpec::euclidean({"x"})));
  const auto rf = make_functions(ModelClass::SI, "theta[1]", "1", "dist(i,k,1)^(-theta[1])", "risk.t", "", "");
  const auto rp = make_parameters({0.1}, {}, {2.0}, {}, std::nullopt, std::nullopt);
  Simulation sim(ModelClass::SI, pop, rf, rp, {S::S, S::I, S::I}, 0.0, Rng(6));
  Rng rng(7);
  std::array<int, 3> counts{};
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto src = sim.sample_source(0, rng);
    counts[src == kExternalSource ? 2 : static_cast<std::size_t>(src) - 1]++;
  }
  EXPECT_NEAR(counts[0] / double(draws), 0.3, 0.01);
  EXPECT_NEAR(counts[1] / double(draws), 0.6, 0.01);
  EXPECT_NEAR(counts[2] / double(draws), 0.1, 0.01);
}

TEST(Simulate, DegenerateSources) {
  auto pop = line_population({0.0, 1.0});
  Simulation only_k(ModelClass::SIR, pop, spatial_sir_functions(),
                    make_parameters({0.0}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), {S::I, S::S}, 0.0,
                    Rng(8));
  Simulation only_ext(ModelClass::SIR, pop, spatial_sir_functions(),
                      make_parameters({0.2}, {}, {4.0}, {}, std::nullopt, std::vector<double>{0.1}), {S::S, S::S},
                      0.0, Rng(9));
  Rng rng(10);
  for (int d = 0; d < 1000; ++d) {
    EXPECT_EQ(only_k.sample_source(1, rng), 0);
    EXPECT_EQ(only_ext.sample_source(1, rng), kExternalSource);
  }
  EXPECT_THROW(only_k.sample_source(0, rng), InferenceError);
}

TEST(Simulate, SirEpidemicInvariants) {
  Rng prng(11);
  const auto pop = spatial_population(100, 15, 30, prng);
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(100), 0.0,
                 Rng(12));
  run_simulation(sim, {.tmax = 200.0});
  EXPECT_LE(sim.time(), 200.0);
  const auto& ev = sim.events();
  const auto& net = sim.network();
  EXPECT_NO_THROW(validate_events(ev, sim.starting_states(), 0.0));
  EXPECT_NO_THROW(validate_network(net, ev, sim.starting_states()));
  for (std::size_t i = 0; i < 100; ++i) {
    if (auto k = net.source_individual(i)) {
      const double exposed = *ev.time(i, Transition::infection);
      const double k_inf = sim.starting_states()[*k] == S::I ? 0.0 : *ev.time(*k, Transition::infection);
      EXPECT_LT(k_inf, exposed);
      if (auto rem = ev.time(*k, Transition::removal)) {
        EXPECT_GT(*rem, exposed);
      }
    }
  }
  // S-count is non-increasing along the ordered event list.
  std::size_t s_count = 99;
  for (const auto& e : ordered_events(ev)) {
    EXPECT_LE(e.time, 200.0);
    if (e.kind == Transition::infection) --s_count;
  }
  std::size_t remaining = 0;
  for (auto s : sim.states()) remaining += s == S::S;
  EXPECT_EQ(remaining, s_count);
}

TEST(Simulate, NoRemovalEndsBySusceptibleExhaustion) {
  Rng prng(13);
  const auto pop = spatial_population(20, 3, 3, prng);
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(),
                 make_parameters({0.0}, {}, {1.0}, {}, std::nullopt, std::vector<double>{0.0}), first_infectious(20),
                 0.0, Rng(14));
  run_simulation(sim, {.max_iterations = 1000});
  for (auto s : sim.states()) EXPECT_EQ(s, S::I);
  EXPECT_EQ(sim.iterations(), 19u);
}

TEST(Simulate, StopConditions) {
  Rng prng(15);
  const auto pop = spatial_population(50, 5, 5, prng);
  Simulation a(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(50), 0.0, Rng(16));
  run_simulation(a, {.max_iterations = 7});
  EXPECT_EQ(a.iterations(), 7u);
  Simulation b(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(50), 0.0, Rng(16));
  run_simulation(b, {.tmax = 0.5});
  EXPECT_EQ(b.time(), 0.5);
  for (const auto& e : ordered_events(b.events())) EXPECT_LE(e.time, 0.5);
}

TEST(Simulate, SeededRunsAreIdentical) {
  Rng prng(17);
  const auto pop = spatial_population(60, 10, 10, prng);
  Simulation a(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(60), 0.0, Rng(18));
  Simulation b(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(60), 0.0, Rng(18));
  run_simulation(a, {.tmax = 100.0});
  run_simulation(b, {.tmax = 100.0});
  EXPECT_TRUE(a.events() == b.events());
  EXPECT_TRUE(a.network() == b.network());
}

TEST(Simulate, SeirChainsAreOrdered) {
  Rng prng(19);
  const auto pop = spatial_population(40, 5, 5, prng);
  const auto rf = make_functions(ModelClass::SEIR, "theta[1]", "1", "dist(i,k,1)^(-theta[1])", "1", "theta[1]",
                                 "theta[1]");
  const auto rp = make_parameters({0.001}, {}, {2.0}, {}, std::vector<double>{0.2}, std::vector<double>{0.15});
  Simulation sim(ModelClass::SEIR, pop, rf, rp, first_infectious(40), 0.0, Rng(20));
  run_simulation(sim, {});
  EXPECT_NO_THROW(validate_events(sim.events(), sim.starting_states(), 0.0));
  EXPECT_NO_THROW(validate_network(sim.network(), sim.events(), sim.starting_states()));
  for (std::size_t i = 1; i < 40; ++i) {
    EXPECT_EQ(sim.events().has(i, Transition::exposure), sim.network().has_source(i));
  }
}

TEST(Observe, UniformDelaysStayInRange) {
  Events ev(ModelClass::SIR, 3);
  ev.set(0, Transition::infection, 1.0);
  ev.set(0, Transition::removal, 9.0);
  ev.set(1, Transition::infection, 4.0);
  Rng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const auto obs = observe(ev, Distribution::uniform(0.5, 2.5), Distribution::uniform(0.5, 2.5), false, rng);
    EXPECT_GE(obs.infection[0] - 1.0, 0.5);
    EXPECT_LE(obs.infection[0] - 1.0, 2.5);
    EXPECT_GE(obs.removal[0] - 9.0, 0.5);
    EXPECT_LE(obs.removal[0] - 9.0, 2.5);
    EXPECT_TRUE(obs.infection_observed(1));
    EXPECT_FALSE(obs.removal_observed(1));
    EXPECT_FALSE(obs.infection_observed(2));
  }
}

TEST(Observe, ZeroDelayIsExact) {
  Events ev(ModelClass::SIR, 1);
  ev.set(0, Transition::infection, 1.25);
  ev.set(0, Transition::removal, 3.5);
  Rng rng(22);
  const auto obs = observe(ev, Distribution::point(0.0), Distribution::point(0.0), false, rng);
  EXPECT_EQ(obs.infection[0], 1.25);
  EXPECT_EQ(obs.removal[0], 3.5);
}

TEST(Observe, ForceKeepsInfectionObservationBeforeRemoval) {
  Events ev(ModelClass::SIR, 1);
  ev.set(0, Transition::infection, 2.0);
  ev.set(0, Transition::removal, 3.0);
  Rng rng(23);
  for (int t = 0; t < 10000; ++t) {
    const auto obs = observe(ev, Distribution::uniform(0.5, 2.5), Distribution::uniform(0.5, 2.5), true, rng);
    EXPECT_LT(obs.infection[0] - 2.0, 1.0);
  }
}

TEST(Observe, ForceFailsWhenDelayCannotFit) {
  Events ev(ModelClass::SIR, 1);
  ev.set(0, Transition::infection, 2.0);
  ev.set(0, Transition::removal, 2.4);
  Rng rng(24);
  EXPECT_THROW(observe(ev, Distribution::uniform(0.5, 2.5), Distribution::uniform(0.5, 2.5), true, rng),
               InferenceError);
  EXPECT_THROW(observe(ev, Distribution::uniform(-1, 2.5), Distribution::uniform(0.5, 2.5), false, rng),
               ValidationError);
}

}  // namespace
}  // namespace tnilm
