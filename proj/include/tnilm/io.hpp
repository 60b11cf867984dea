#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tnilm/epidemic.hpp"
#include "tnilm/mcmc.hpp"
#include "tnilm/posterior.hpp"

// CSV formats. Individuals are numbered from 1 in every file; empty cells
// mean "did not happen" or "not observed".
//
//   events        individual,[exposure,]infection[,removal]
//   network       individual,source          source is an individual or "external"
//   observations  individual,infection[,removal]
//   states        individual,state
//   trajectory    time,S,[E,]I[,R]
//   parameters    iteration,log_posterior,<parameter names...>
//   chain events  iteration,individual,...   (events columns, individuals with any time)
//   chain network iteration,individual,source
namespace tnilm::io {

std::vector<std::string> event_columns(ModelClass cls);

void write_events(const std::filesystem::path& path, const Events& events);
Events read_events(const std::filesystem::path& path, ModelClass cls, std::size_t n);

void write_network(const std::filesystem::path& path, const TransmissionNetwork& network);
TransmissionNetwork read_network(const std::filesystem::path& path, std::size_t n);

void write_observations(const std::filesystem::path& path, ModelClass cls, const EventObservations& obs);
EventObservations read_observations(const std::filesystem::path& path, ModelClass cls, std::size_t n);

void write_states(const std::filesystem::path& path, const std::vector<DiseaseState>& states);
std::vector<DiseaseState> read_states(const std::filesystem::path& path, std::size_t n);

// State counts at the start time and after every event.
void write_trajectory(const std::filesystem::path& path, const Events& events,
                      const std::vector<DiseaseState>& starting_states, double start_time);

void write_chain(const std::filesystem::path& dir, const MarkovChain& chain,
                 const std::vector<std::string>& parameter_names);
// Reads a chain written by write_chain; events/networks were kept every store_thin samples.
MarkovChain read_chain(const std::filesystem::path& dir, ModelClass cls, std::size_t n,
                       std::size_t parameter_count, std::size_t store_thin);

void write_summary_csv(const std::filesystem::path& path, std::span<const ParameterSummary> rows);
void write_summary_json(const std::filesystem::path& path, std::span<const ParameterSummary> rows,
                        std::size_t burnin, std::size_t thin, std::size_t retained);
// Weighted edge list: source,target,probability (source may be "external").
void write_network_posterior(const std::filesystem::path& path, const TNDistribution& dist);
struct CurveSeries {
  DiseaseState state;
  std::vector<CurvePoint> points;
};
void write_curves(const std::filesystem::path& path, std::span<const CurveSeries> series);

}  // namespace tnilm::io
