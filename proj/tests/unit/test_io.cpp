#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "tempdir.hpp"
#include "tnilm/csv.hpp"
#include "tnilm/error.hpp"
#include "tnilm/io.hpp"

namespace tnilm {
namespace {

using namespace testing;

TEST(Csv, ParsesQuotedCellsAndInfinity) {
  const auto t = csv::parse("a,\"b, c\"\n1,\"say \"\"hi\"\"\"\n");
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[1], "b, c");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(csv::parse_number("inf", "x", 1, 1), std::numeric_limits<double>::infinity());
  EXPECT_EQ(csv::parse_number("-Inf", "x", 1, 1), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(csv::parse_number(" 2.5 ", "x", 1, 1), 2.5);
  EXPECT_FALSE(csv::parse_optional_number("", "x", 1, 1).has_value());
  EXPECT_THROW(csv::parse_number("2.5x", "x", 1, 1), ValidationError);
  EXPECT_THROW(csv::parse_number("nan", "x", 1, 1), ValidationError);
}

TEST(Csv, ShortestRoundTripFormatting) {
  for (double v : {0.1, 1e-4, 3.0, 123456.789, 1.0 / 3.0, -2.5e-300}) {
    EXPECT_EQ(csv::parse_number(csv::format_number(v), "x", 1, 1), v);
  }
  EXPECT_EQ(csv::format_number(std::numeric_limits<double>::quiet_NaN()), "");
  EXPECT_EQ(csv::format_number(3.0), "3");
}

TEST(Io, EventsNetworkObservationsRoundTrip) {
  TempDir dir;
  Rng prng(1);
  const auto pop = spatial_population(30, 5, 5, prng);
  Simulation sim(ModelClass::SIR, pop, spatial_sir_functions(), spatial_sir_truth(), first_infectious(30), 0.0, Rng(2));
  run_simulation(sim, {});
  io::write_events(dir / "events.csv", sim.events());
  io::write_network(dir / "network.csv", sim.network());
  const auto obs = observe(sim, Distribution::uniform(0.5, 2.5), Distribution::uniform(0.5, 2.5), false);
  io::write_observations(dir / "obs.csv", ModelClass::SIR, obs);
  io::write_states(dir / "states.csv", sim.starting_states());
  EXPECT_TRUE(io::read_events(dir / "events.csv", ModelClass::SIR, 30) == sim.events());
  EXPECT_TRUE(io::read_network(dir / "network.csv", 30) == sim.network());
  const auto back = io::read_observations(dir / "obs.csv", ModelClass::SIR, 30);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_TRUE(back.infection[i] == obs.infection[i] || (std::isnan(back.infection[i]) && std::isnan(obs.infection[i])));
    EXPECT_TRUE(back.removal[i] == obs.removal[i] || (std::isnan(back.removal[i]) && std::isnan(obs.removal[i])));
  }
  EXPECT_EQ(io::read_states(dir / "states.csv", 30), sim.starting_states());
  EXPECT_EQ(slurp(dir / "network.csv").substr(0, 18), "individual,source\n");
}

TEST(Io, ReadErrorsNameFileAndRow) {
  TempDir dir;
  const auto p = dir.write("events.csv", "individual,infection,removal\n1,2,3\n7,1,2\n");
  try {
    io::read_events(p, ModelClass::SIR, 3);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("events.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  }
  const auto q = dir.write("net.csv", "individual,source\n1,banana\n");
  EXPECT_THROW(io::read_network(q, 2), ValidationError);
  const auto r = dir.write("obs.csv", "individual,infection,removal\n1,2,3\n");
  EXPECT_THROW(io::read_observations(r, ModelClass::SI, 2), ValidationError);
}

TEST(Io, TrajectoryCountsEveryEvent) {
  TempDir dir;
  Events ev(ModelClass::SIR, 3);
  ev.set(0, Transition::removal, 4.0);
  ev.set(1, Transition::infection, 1.0);
  io::write_trajectory(dir / "t.csv", ev, {DiseaseState::I, DiseaseState::S, DiseaseState::S}, 0.0);
  EXPECT_EQ(slurp(dir / "t.csv"), "time,S,I,R\n0,2,1,0\n1,1,2,0\n4,1,1,1\n");
}

TEST(Io, ChainRoundTrip) {
  TempDir dir;
  MarkovChain chain;
  chain.store_thin = 2;
  for (int s = 0; s <= 4; ++s) {
    chain.parameters.push_back({0.1 * s, 2.0 + s});
    chain.log_posterior.push_back(-10.0 - s);
  }
  for (int j = 0; j < 3; ++j) {
    Events ev(ModelClass::SIR, 2);
    ev.set(1, Transition::infection, 1.0 + j);
    TransmissionNetwork net(2);
    net.set_internal(0, 1);
    chain.events.push_back(ev);
    chain.networks.push_back(net);
  }
  io::write_chain(dir.path(), chain, {"a", "b"});
  const auto back = io::read_chain(dir.path(), ModelClass::SIR, 2, 2, 2);
  EXPECT_EQ(back.parameters, chain.parameters);
  EXPECT_EQ(back.log_posterior, chain.log_posterior);
  EXPECT_TRUE(back.events == chain.events);
  EXPECT_TRUE(back.networks == chain.networks);
  EXPECT_THROW(io::read_chain(dir.path(), ModelClass::SIR, 2, 3, 2), ValidationError);
}

TEST(Io, SummaryAndNetworkPosteriorFiles) {
  TempDir dir;
  const std::vector<ParameterSummary> rows{{"sparks[1]", 1e-4, 1e-9, 5e-5, 2e-4}};
  io::write_summary_csv(dir / "s.csv", rows);
  EXPECT_EQ(slurp(dir / "s.csv"), "parameter,mean,variance,lower_2.5,upper_97.5\nsparks[1],0.0001,1e-09,5e-05,0.0002\n");
  TransmissionNetwork a(2);
  a.set_external(0);
  a.set_internal(0, 1);
  const std::vector<const TransmissionNetwork*> nets{&a};
  io::write_network_posterior(dir / "n.csv", TNDistribution::from_networks(nets));
  EXPECT_EQ(slurp(dir / "n.csv"), "source,target,probability\nexternal,1,1\n1,2,1\n");
}

}  // namespace
}  // namespace tnilm
