#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnilm/config.hpp"

namespace tnilm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct SimulateOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  std::size_t replicates = 1;
};

struct FitOptions {
  std::optional<std::filesystem::path> observations;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> chains;
  std::optional<std::filesystem::path> output;
};

struct SummaryOptions {
  std::optional<std::size_t> burnin;
  std::optional<std::size_t> thin;
};

struct CurveOptions {
  SummaryOptions retention;
  std::vector<DiseaseState> states;      // empty: every state of the class
  std::optional<std::vector<double>> grid;
};

// Each command throws ValidationError or InferenceError; run() maps them to exit codes.
void cmd_simulate(const RunConfig& cfg, const SimulateOptions& opts, std::ostream& log);
void cmd_fit(const RunConfig& cfg, const FitOptions& opts, std::ostream& log);
void cmd_summarize(const std::filesystem::path& run_dir, const SummaryOptions& opts, std::ostream& log);
void cmd_curves(const std::filesystem::path& run_dir, const CurveOptions& opts, std::ostream& log);

// Parses "lo:hi:count" into an evenly spaced grid.
std::vector<double> parse_grid(const std::string& spec);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tnilm::cli
