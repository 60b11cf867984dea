#include "tnilm/io.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "tnilm/csv.hpp"
#include "tnilm/error.hpp"

namespace tnilm::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InferenceError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::vector<Transition> event_transitions(ModelClass cls) {
  std::vector<Transition> t;
  if (has_exposed(cls)) t.push_back(Transition::exposure);
  t.push_back(Transition::infection);
  if (has_removed(cls)) t.push_back(Transition::removal);
  return t;
}

std::size_t parse_index(std::string_view cell, const csv::Table& t, std::size_t row, std::size_t col,
                        std::size_t n) {
  const double v = csv::parse_number(cell, t.source, row, col);
  if (!(v >= 1.0 && v <= static_cast<double>(n) && v == std::floor(v))) {
    throw ValidationError(fmt::format("{}: row {}: individual '{}' is not in 1..{}", t.source.string(), row,
                                      cell, n));
  }
  return static_cast<std::size_t>(v) - 1;
}

std::int32_t parse_source(std::string_view cell, const csv::Table& t, std::size_t row, std::size_t col,
                          std::size_t n) {
  if (cell == "external") return kExternalSource;
  return static_cast<std::int32_t>(parse_index(cell, t, row, col, n));
}

void check_width(const csv::Table& t) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      throw ValidationError(fmt::format("{}: row {} has {} fields, expected {}", t.source.string(), r + 2,
                                        t.rows[r].size(), t.header.size()));
    }
  }
}

std::string source_text(std::int32_t src) {
  return src == kExternalSource ? std::string("external") : std::to_string(src + 1);
}

}  // namespace

std::vector<std::string> event_columns(ModelClass cls) {
  std::vector<std::string> cols;
  for (auto t : event_transitions(cls)) cols.emplace_back(to_string(t));
  return cols;
}

void write_events(const std::filesystem::path& path, const Events& events) {
  auto out = open_out(path);
  const auto ts = event_transitions(events.model_class());
  out << "individual";
  for (auto t : ts) out << ',' << to_string(t);
  out << '\n';
  for (std::size_t i = 0; i < events.size(); ++i) {
    out << i + 1;
    for (auto t : ts) out << ',' << csv::format_number(events.raw(i, t));
    out << '\n';
  }
}

Events read_events(const std::filesystem::path& path, ModelClass cls, std::size_t n) {
  const auto t = csv::read(path);
  check_width(t);
  const std::size_t id = t.require_column("individual");
  std::vector<std::pair<Transition, std::size_t>> cols;
  for (auto tr : event_transitions(cls)) cols.emplace_back(tr, t.require_column(to_string(tr)));
  Events ev(cls, n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = parse_index(t.rows[r][id], t, r + 2, id + 1, n);
    for (auto [tr, c] : cols) {
      if (auto v = csv::parse_optional_number(t.rows[r][c], t.source, r + 2, c + 1)) ev.set(i, tr, *v);
    }
  }
  return ev;
}

void write_network(const std::filesystem::path& path, const TransmissionNetwork& network) {
  auto out = open_out(path);
  out << "individual,source\n";
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (network.has_source(i)) out << i + 1 << ',' << source_text(network.raw(i)) << '\n';
  }
}

TransmissionNetwork read_network(const std::filesystem::path& path, std::size_t n) {
  const auto t = csv::read(path);
  check_width(t);
  const std::size_t id = t.require_column("individual");
  const std::size_t src = t.require_column("source");
  TransmissionNetwork net(n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    net.set_raw(parse_index(t.rows[r][id], t, r + 2, id + 1, n), parse_source(t.rows[r][src], t, r + 2, src + 1, n));
  }
  return net;
}

void write_observations(const std::filesystem::path& path, ModelClass cls, const EventObservations& obs) {
  auto out = open_out(path);
  out << "individual,infection";
  if (has_removed(cls)) out << ",removal";
  out << '\n';
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out << i + 1 << ',' << csv::format_number(obs.infection[i]);
    if (has_removed(cls)) out << ',' << csv::format_number(obs.removal[i]);
    out << '\n';
  }
}

EventObservations read_observations(const std::filesystem::path& path, ModelClass cls, std::size_t n) {
  const auto t = csv::read(path);
  check_width(t);
  const std::size_t id = t.require_column("individual");
  const std::size_t inf = t.require_column("infection");
  const auto rem = t.column("removal");
  if (rem && !has_removed(cls)) {
    throw ValidationError(fmt::format("{}: removal column given for a {} model", path.string(), to_string(cls)));
  }
  EventObservations obs(n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = parse_index(t.rows[r][id], t, r + 2, id + 1, n);
    obs.infection[i] = csv::parse_optional_number(t.rows[r][inf], t.source, r + 2, inf + 1).value_or(kNaN);
    if (rem) obs.removal[i] = csv::parse_optional_number(t.rows[r][*rem], t.source, r + 2, *rem + 1).value_or(kNaN);
  }
  return obs;
}

void write_states(const std::filesystem::path& path, const std::vector<DiseaseState>& states) {
  auto out = open_out(path);
  out << "individual,state\n";
  for (std::size_t i = 0; i < states.size(); ++i) out << i + 1 << ',' << to_string(states[i]) << '\n';
}

std::vector<DiseaseState> read_states(const std::filesystem::path& path, std::size_t n) {
  const auto t = csv::read(path);
  check_width(t);
  const std::size_t id = t.require_column("individual");
  const std::size_t st = t.require_column("state");
  std::vector<DiseaseState> states(n, DiseaseState::S);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    states[parse_index(t.rows[r][id], t, r + 2, id + 1, n)] = parse_disease_state(t.rows[r][st]);
  }
  return states;
}

void write_trajectory(const std::filesystem::path& path, const Events& events,
                      const std::vector<DiseaseState>& starting_states, double start_time) {
  const ModelClass cls = events.model_class();
  std::vector<DiseaseState> shown{DiseaseState::S};
  if (has_exposed(cls)) shown.push_back(DiseaseState::E);
  shown.push_back(DiseaseState::I);
  if (has_removed(cls)) shown.push_back(DiseaseState::R);

  std::array<long, 4> counts{};
  for (auto s : starting_states) ++counts[static_cast<std::size_t>(s)];
  auto out = open_out(path);
  out << "time";
  for (auto s : shown) out << ',' << to_string(s);
  out << '\n';
  auto row = [&](double t) {
    out << csv::format_number(t);
    for (auto s : shown) out << ',' << counts[static_cast<std::size_t>(s)];
    out << '\n';
  };
  row(start_time);
  std::vector<DiseaseState> current = starting_states;
  for (const auto& ev : ordered_events(events)) {
    --counts[static_cast<std::size_t>(current[ev.individual])];
    current[ev.individual] = target_state(ev.kind);
    ++counts[static_cast<std::size_t>(current[ev.individual])];
    row(ev.time);
  }
}

void write_chain(const std::filesystem::path& dir, const MarkovChain& chain,
                 const std::vector<std::string>& names) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "parameters.csv");
    out << "iteration,log_posterior";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t s = 0; s < chain.log_posterior.size(); ++s) {
      out << s << ',' << csv::format_number(chain.log_posterior[s]);
      for (double v : chain.parameters[s]) out << ',' << csv::format_number(v);
      out << '\n';
    }
  }
  if (chain.events.empty()) return;
  const ModelClass cls = chain.events.front().model_class();
  const auto ts = event_transitions(cls);
  {
    auto out = open_out(dir / "events.csv");
    out << "iteration,individual";
    for (auto t : ts) out << ',' << to_string(t);
    out << '\n';
    for (std::size_t j = 0; j < chain.events.size(); ++j) {
      const Events& ev = chain.events[j];
      for (std::size_t i = 0; i < ev.size(); ++i) {
        bool any = false;
        for (auto t : ts) any = any || ev.has(i, t);
        if (!any) continue;
        out << j * chain.store_thin << ',' << i + 1;
        for (auto t : ts) out << ',' << csv::format_number(ev.raw(i, t));
        out << '\n';
      }
    }
  }
  {
    auto out = open_out(dir / "network.csv");
    out << "iteration,individual,source\n";
    for (std::size_t j = 0; j < chain.networks.size(); ++j) {
      const auto& net = chain.networks[j];
      for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.has_source(i)) out << j * chain.store_thin << ',' << i + 1 << ',' << source_text(net.raw(i)) << '\n';
      }
    }
  }
}

MarkovChain read_chain(const std::filesystem::path& dir, ModelClass cls, std::size_t n,
                       std::size_t parameter_count, std::size_t store_thin) {
  MarkovChain chain;
  chain.store_thin = std::max<std::size_t>(1, store_thin);
  {
    const auto t = csv::read(dir / "parameters.csv");
    check_width(t);
    if (t.header.size() != parameter_count + 2) {
      throw ValidationError(fmt::format("{}: expected {} parameter columns, found {}", t.source.string(),
                                        parameter_count, t.header.size() < 2 ? 0 : t.header.size() - 2));
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      chain.log_posterior.push_back(csv::parse_number(t.rows[r][1], t.source, r + 2, 2));
      std::vector<double> theta;
      for (std::size_t j = 0; j < parameter_count; ++j) {
        theta.push_back(csv::parse_number(t.rows[r][j + 2], t.source, r + 2, j + 3));
      }
      chain.parameters.push_back(std::move(theta));
    }
  }
  if (chain.log_posterior.empty()) throw ValidationError(fmt::format("{}: chain has no samples", dir.string()));
  const std::size_t stored = chain.iterations() / chain.store_thin + 1;
  chain.events.assign(stored, Events(cls, n));
  chain.networks.assign(stored, TransmissionNetwork(n));
  auto slot = [&](std::string_view cell, const csv::Table& t, std::size_t r) {
    const double it = csv::parse_number(cell, t.source, r + 2, 1);
    const auto s = static_cast<std::size_t>(it);
    if (it < 0 || it != std::floor(it) || s % chain.store_thin != 0 || s / chain.store_thin >= stored) {
      throw ValidationError(fmt::format("{}: row {}: unexpected iteration {}", t.source.string(), r + 2, cell));
    }
    return s / chain.store_thin;
  };
  if (std::filesystem::exists(dir / "events.csv")) {
    const auto t = csv::read(dir / "events.csv");
    check_width(t);
    const std::size_t id = t.require_column("individual");
    std::vector<std::pair<Transition, std::size_t>> cols;
    for (auto tr : event_transitions(cls)) cols.emplace_back(tr, t.require_column(to_string(tr)));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Events& ev = chain.events[slot(t.rows[r][0], t, r)];
      const std::size_t i = parse_index(t.rows[r][id], t, r + 2, id + 1, n);
      for (auto [tr, c] : cols) {
        if (auto v = csv::parse_optional_number(t.rows[r][c], t.source, r + 2, c + 1)) ev.set(i, tr, *v);
      }
    }
  }
  if (std::filesystem::exists(dir / "network.csv")) {
    const auto t = csv::read(dir / "network.csv");
    check_width(t);
    const std::size_t id = t.require_column("individual");
    const std::size_t src = t.require_column("source");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      auto& net = chain.networks[slot(t.rows[r][0], t, r)];
      net.set_raw(parse_index(t.rows[r][id], t, r + 2, id + 1, n), parse_source(t.rows[r][src], t, r + 2, src + 1, n));
    }
  }
  chain.current_events = chain.events.back();
  chain.current_network = chain.networks.back();
  return chain;
}

void write_summary_csv(const std::filesystem::path& path, std::span<const ParameterSummary> rows) {
  auto out = open_out(path);
  out << "parameter,mean,variance,lower_2.5,upper_97.5\n";
  for (const auto& r : rows) {
    out << r.name << ',' << csv::format_number(r.mean) << ',' << csv::format_number(r.variance) << ','
        << csv::format_number(r.lower) << ',' << csv::format_number(r.upper) << '\n';
  }
}

void write_summary_json(const std::filesystem::path& path, std::span<const ParameterSummary> rows,
                        std::size_t burnin, std::size_t thin, std::size_t retained) {
  nlohmann::ordered_json j;
  j["burnin"] = burnin;
  j["thin"] = thin;
  j["retained_samples"] = retained;
  auto& params = j["parameters"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    params.push_back({{"name", r.name},
                      {"mean", r.mean},
                      {"variance", r.variance},
                      {"lower_2.5", r.lower},
                      {"upper_97.5", r.upper}});
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_network_posterior(const std::filesystem::path& path, const TNDistribution& dist) {
  auto out = open_out(path);
  out << "source,target,probability\n";
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.external(i) > 0.0) out << "external," << i + 1 << ',' << csv::format_number(dist.external(i)) << '\n';
    for (std::size_t k = 0; k < dist.size(); ++k) {
      if (dist.edge(k, i) > 0.0) out << k + 1 << ',' << i + 1 << ',' << csv::format_number(dist.edge(k, i)) << '\n';
    }
  }
}

void write_curves(const std::filesystem::path& path, std::span<const CurveSeries> series) {
  auto out = open_out(path);
  out << "state,time,lower_2.5,median,upper_97.5\n";
  for (const auto& cs : series) {
    for (const auto& p : cs.points) {
      out << to_string(cs.state) << ',' << csv::format_number(p.time) << ',' << csv::format_number(p.lower) << ','
          << csv::format_number(p.median) << ',' << csv::format_number(p.upper) << '\n';
    }
  }
}

}  // namespace tnilm::io
