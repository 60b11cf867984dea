#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tnilm/distribution.hpp"
#include "tnilm/mcmc.hpp"
#include "tnilm/model.hpp"
#include "tnilm/population.hpp"
#include "tnilm/rates.hpp"

namespace tnilm {

// Starting states: a CSV file (individual,state) or a default state with
// per-state lists of 1-based individuals.
struct StartingStates {
  struct Listed {
    DiseaseState fallback = DiseaseState::S;
    std::map<DiseaseState, std::vector<std::size_t>> members;
  };
  std::variant<Listed, std::filesystem::path> source = Listed{};

  std::vector<DiseaseState> resolve(std::size_t n) const;
};

struct PopulationConfig {
  std::filesystem::path risks;
  DistanceSpec distances;
};

struct ModelConfig {
  ModelClass cls = ModelClass::SIR;
  RiskFunctions functions;
  std::optional<RiskParameters> parameters;
  std::optional<RiskPriors> priors;
  std::optional<EventExtents> extents;
};

struct ObserveConfig {
  Distribution infection_delay = Distribution::point(0.0);
  Distribution removal_delay = Distribution::point(0.0);
  bool force = false;
};

struct SimulateConfig {
  StartingStates starting_states;
  double start_time = 0.0;
  std::optional<double> tmax;
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> max_wall_seconds;
  std::optional<ObserveConfig> observe;
};

struct FitConfig {
  McmcSettings settings;
  std::size_t iterations = 0;
  std::size_t burnin = 0;
  std::size_t thin = 1;
  std::optional<std::filesystem::path> observations;
  std::optional<StartingStates> starting_states;  // falls back to the simulate section
  std::optional<double> start_time;
};

struct RunConfig {
  std::filesystem::path source;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "output";
  PopulationConfig population;
  ModelConfig model;
  std::optional<SimulateConfig> simulate;
  std::optional<FitConfig> fit;

  // Starting states and start time for fitting.
  std::vector<DiseaseState> fit_states(std::size_t n) const;
  double fit_start_time() const;
};

// Relative paths inside the config resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// {"family": "uniform", "a": 0, "b": 1} and similar named records.
Distribution parse_distribution(const nlohmann::json& j, const std::string& where);
nlohmann::json distribution_to_json(const Distribution& d);

}  // namespace tnilm
