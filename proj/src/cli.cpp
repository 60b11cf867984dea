#include "tnilm/cli.hpp"

#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "json.hpp"
#include "tnilm/error.hpp"
#include "tnilm/io.hpp"
#include "tnilm/parallel.hpp"
#include "tnilm/posterior.hpp"
#include "tnilm/simulate.hpp"

namespace tnilm::cli {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const Population> load(const RunConfig& cfg) {
  return std::make_shared<const Population>(load_population(cfg.population.risks, cfg.population.distances));
}

// One letter per individual, e.g. "ISSS".
std::string states_text(const std::vector<DiseaseState>& states) {
  std::string out;
  for (auto s : states) out += to_string(s);
  return out;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InferenceError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

ordered_json read_manifest(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("no manifest found at '{}'", path.string()));
  try {
    return ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

struct LoadedRun {
  ModelClass cls;
  std::size_t n;
  std::vector<std::string> names;
  std::vector<DiseaseState> states;
  double start_time;
  std::size_t burnin;
  std::size_t thin;
  std::vector<MarkovChain> chains;
};

LoadedRun load_run(const std::filesystem::path& run_dir, const SummaryOptions& opts) {
  const auto m = read_manifest(run_dir);
  try {
    if (m.at("command") != "fit") throw ValidationError(fmt::format("'{}' is not a fit run", run_dir.string()));
    LoadedRun r{parse_model_class(m.at("class").get<std::string>()),
                m.at("n").get<std::size_t>(),
                m.at("parameters").get<std::vector<std::string>>(),
                {},
                m.at("start_time").get<double>(),
                opts.burnin.value_or(m.at("burnin").get<std::size_t>()),
                opts.thin.value_or(m.at("thin").get<std::size_t>()),
                {}};
    for (char s : m.at("starting_states").get<std::string>()) {
      r.states.push_back(parse_disease_state(std::string_view(&s, 1)));
    }
    if (r.states.size() != r.n) throw ValidationError("manifest starting states do not match n");
    const auto chains = m.at("chains").get<std::size_t>();
    const auto output_thin = m.at("output_thin").get<std::size_t>();
    const auto iterations = m.at("iterations").get<std::size_t>();
    if (r.burnin >= iterations) {
      throw ValidationError(
          fmt::format("burnin {} must be less than the run's {} iterations", r.burnin, iterations));
    }
    for (std::size_t c = 0; c < chains; ++c) {
      r.chains.push_back(
          io::read_chain(run_dir / fmt::format("chain_{}", c + 1), r.cls, r.n, r.names.size(), output_thin));
    }
    return r;
  } catch (const ordered_json::exception& e) {
    throw ValidationError(fmt::format("{}: malformed manifest: {}", (run_dir / "manifest.json").string(), e.what()));
  }
}

bool events_retained(const LoadedRun& r) {
  const std::size_t st = r.chains.front().store_thin;
  return r.burnin % st == 0 && r.thin % st == 0;
}

}  // namespace

void cmd_simulate(const RunConfig& cfg, const SimulateOptions& opts, std::ostream& log) {
  if (!cfg.simulate) throw ValidationError("config has no 'simulate' section");
  if (!cfg.model.parameters) throw ValidationError("simulation needs 'model.parameters'");
  if (opts.replicates == 0) throw ValidationError("replicates must be at least 1");
  const auto& sc = *cfg.simulate;
  const auto pop = load(cfg);
  const auto report = validate_model(cfg.model.cls, cfg.model.functions, *cfg.model.parameters, pop.get());
  if (!report.ok()) throw ValidationError(report.message());
  const auto states = sc.starting_states.resolve(pop->size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!state_legal(cfg.model.cls, states[i])) {
      throw ValidationError(fmt::format("individual {} starts in state {}, which a {} model does not have", i + 1,
                                        to_string(states[i]), to_string(cfg.model.cls)));
    }
  }
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const auto out = opts.output.value_or(cfg.output_dir / "simulate");

  StopCondition stop;
  stop.tmax = sc.tmax;
  stop.max_iterations = sc.max_iterations;
  if (sc.max_wall_seconds) stop.max_wall_time = std::chrono::duration<double>(*sc.max_wall_seconds);

  std::mutex log_mu;
  parallel_for(opts.replicates, worker_count(0, opts.replicates), [&](std::size_t r) {
    const auto dir = opts.replicates == 1 ? out : out / fmt::format("replicate_{:03}", r + 1);
    const auto t0 = Clock::now();
    Simulation sim(cfg.model.cls, pop, cfg.model.functions, *cfg.model.parameters, states, sc.start_time,
                   Rng(seed).split(r));
    run_simulation(sim, stop);
    io::write_events(dir / "events.csv", sim.events());
    io::write_network(dir / "network.csv", sim.network());
    io::write_states(dir / "starting_states.csv", states);
    io::write_trajectory(dir / "trajectory.csv", sim.events(), states, sc.start_time);
    if (sc.observe) {
      const auto obs = observe(sim, sc.observe->infection_delay, sc.observe->removal_delay, sc.observe->force);
      io::write_observations(dir / "observations.csv", cfg.model.cls, obs);
    }
    std::size_t exposed = 0;
    for (std::size_t i = 0; i < pop->size(); ++i) exposed += sim.network().has_source(i) ? 1 : 0;
    ordered_json m;
    m["command"] = "simulate";
    m["config"] = cfg.source.string();
    m["seed"] = seed;
    m["replicate"] = r + 1;
    m["class"] = std::string(to_string(cfg.model.cls));
    m["n"] = pop->size();
    m["start_time"] = sc.start_time;
    m["end_time"] = sim.time();
    m["events"] = sim.iterations();
    m["new_exposures"] = exposed;
    m["starting_states"] = states_text(states);
    m["observed"] = sc.observe.has_value();
    m["durations_s"] = {{"simulate", seconds_since(t0)}};
    write_json(dir / "manifest.json", m);
    std::lock_guard lock(log_mu);
    log << fmt::format("replicate {}: {} events, {} new exposures, t = {} -> {}\n", r + 1, sim.iterations(), exposed,
                       sc.start_time, sim.time());
  });
}

void cmd_fit(const RunConfig& cfg, const FitOptions& opts, std::ostream& log) {
  if (!cfg.fit) throw ValidationError("config has no 'fit' section");
  if (!cfg.model.priors) throw ValidationError("fitting needs 'model.priors'");
  if (!cfg.model.extents) throw ValidationError("fitting needs 'model.extents'");
  const auto obs_path = opts.observations ? opts.observations : cfg.fit->observations;
  if (!obs_path) throw ValidationError("no observations given (use --observations or fit.observations)");

  McmcRun run;
  run.settings = cfg.fit->settings;
  run.settings.seed = opts.seed.value_or(cfg.seed);
  if (opts.chains) run.settings.chains = *opts.chains;
  const std::size_t iterations = opts.iterations.value_or(cfg.fit->iterations);
  const auto out = opts.output.value_or(cfg.output_dir / "fit");

  auto& p = run.problem;
  p.cls = cfg.model.cls;
  p.population = load(cfg);
  const std::size_t n = p.population->size();
  p.functions = cfg.model.functions;
  p.priors = *cfg.model.priors;
  p.extents = *cfg.model.extents;
  p.start = {cfg.fit_states(n), cfg.fit_start_time()};
  p.observations = io::read_observations(*obs_path, p.cls, n);

  std::filesystem::create_directories(out);
  std::ofstream progress_log(out / "progress.log");
  std::mutex mu;
  const auto t0 = Clock::now();
  start(run);
  const double init_s = seconds_since(t0);
  log << fmt::format("initialized {} chain(s) in {:.2f}s\n", run.chains.size(), init_s);
  progress_log << fmt::format("initialized {} chain(s) in {:.2f}s\n", run.chains.size(), init_s);

  const auto t1 = Clock::now();
  iterate(run, iterations, [&](std::size_t c, std::size_t done, std::size_t total) {
    std::lock_guard lock(mu);
    const auto line = fmt::format("chain {}: {}/{} iterations ({:.1f}s)\n", c + 1, done, total, seconds_since(t1));
    progress_log << line << std::flush;
    if (done == total || done % std::max<std::size_t>(1, total / 10) == 0) log << line << std::flush;
  });
  const double iter_s = seconds_since(t1);

  const auto names = parameter_names(p.priors.shape());
  ordered_json chains = ordered_json::array();
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    const auto& ch = run.chains[c];
    io::write_chain(out / fmt::format("chain_{}", c + 1), ch, names);
    const auto rate = [](std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / b; };
    chains.push_back({{"chain", c + 1},
                      {"seed", run.settings.seed + c},
                      {"parameter_acceptance", rate(ch.counters.parameter_accepts, ch.counters.parameter_proposals)},
                      {"event_acceptance", rate(ch.counters.event_accepts, ch.counters.event_proposals)}});
  }

  const auto& st = run.settings;
  ordered_json m;
  m["command"] = "fit";
  m["config"] = cfg.source.string();
  m["observations"] = obs_path->string();
  m["seed"] = st.seed;
  m["class"] = std::string(to_string(p.cls));
  m["n"] = n;
  m["parameters"] = names;
  m["starting_states"] = states_text(p.start.states);
  m["start_time"] = p.start.time;
  m["iterations"] = iterations;
  m["chains"] = st.chains;
  m["output_thin"] = st.store_thin;
  m["burnin"] = std::min(cfg.fit->burnin, iterations == 0 ? 0 : iterations - 1);
  m["thin"] = cfg.fit->thin;
  m["settings"] = {{"init_attempts", st.init_attempts},
                   {"event_sigma", st.event_sigma},
                   {"event_batches", st.event_batches},
                   {"per_event_acceptance", st.per_event_acceptance},
                   {"condition_on_network", st.condition_on_network},
                   {"adapt",
                    {{"enabled", st.adapt.enabled},
                     {"scale", st.adapt.scale ? ordered_json(*st.adapt.scale) : ordered_json("2.38^2/p")},
                     {"mix", st.adapt.mix},
                     {"jitter", st.adapt.jitter},
                     {"fixed_sd", st.adapt.fixed_sd},
                     {"forget", st.adapt.forget}}}};
  m["chain_stats"] = chains;
  m["durations_s"] = {{"initialize", init_s}, {"iterate", iter_s}};
  write_json(out / "manifest.json", m);
  log << fmt::format("{} iterations in {:.2f}s; samples written to {}\n", iterations, iter_s, out.string());
}

void cmd_summarize(const std::filesystem::path& run_dir, const SummaryOptions& opts, std::ostream& log) {
  const auto r = load_run(run_dir, opts);
  const auto rows = summarize(r.chains, r.names, r.burnin, r.thin);
  std::size_t retained = 0;
  for (const auto& c : r.chains) retained += retained_samples(c, r.burnin, r.thin).size();
  io::write_summary_csv(run_dir / "summary.csv", rows);
  io::write_summary_json(run_dir / "summary.json", rows, r.burnin, r.thin, retained);
  if (events_retained(r)) {
    io::write_network_posterior(run_dir / "network_posterior.csv", network_posterior(r.chains, r.burnin, r.thin));
  } else {
    log << fmt::format("network posterior skipped: burnin and thin must be multiples of output_thin ({})\n",
                       r.chains.front().store_thin);
  }
  log << fmt::format("{:<22} {:>12} {:>12} {:>12} {:>12}\n", "parameter", "mean", "variance", "2.5%", "97.5%");
  for (const auto& row : rows) {
    log << fmt::format("{:<22} {:>12.5g} {:>12.5g} {:>12.5g} {:>12.5g}\n", row.name, row.mean, row.variance,
                       row.lower, row.upper);
  }
}

void cmd_curves(const std::filesystem::path& run_dir, const CurveOptions& opts, std::ostream& log) {
  const auto r = load_run(run_dir, opts.retention);
  if (!events_retained(r)) {
    throw ValidationError(fmt::format("burnin and thin must be multiples of the run's output_thin ({})",
                                      r.chains.front().store_thin));
  }
  std::vector<DiseaseState> states = opts.states;
  if (states.empty()) {
    for (auto s : {DiseaseState::S, DiseaseState::E, DiseaseState::I, DiseaseState::R}) {
      if (state_legal(r.cls, s)) states.push_back(s);
    }
  }
  for (auto s : states) {
    if (!state_legal(r.cls, s)) {
      throw ValidationError(fmt::format("state {} does not exist in a {} model", to_string(s), to_string(r.cls)));
    }
  }
  std::vector<double> grid;
  if (opts.grid) {
    grid = *opts.grid;
  } else {
    double last = r.start_time;
    for (const auto& c : r.chains) {
      for (std::size_t s : retained_samples(c, r.burnin, r.thin)) {
        for (const auto& e : ordered_events(c.events_at(s))) last = std::max(last, e.time);
      }
    }
    for (int g = 0; g <= 100; ++g) grid.push_back(r.start_time + (last - r.start_time) * g / 100.0);
  }
  std::vector<io::CurveSeries> series;
  for (auto s : states) series.push_back({s, epidemic_curves(r.chains, r.states, r.burnin, r.thin, s, grid)});
  io::write_curves(run_dir / "curves.csv", series);
  log << fmt::format("wrote {} grid points for {} state(s) to {}\n", grid.size(), states.size(),
                     (run_dir / "curves.csv").string());
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw ValidationError(fmt::format("grid '{}' must look like lo:hi:count", spec));
  }
  try {
    const double lo = std::stod(spec.substr(0, a));
    const double hi = std::stod(spec.substr(a + 1, b - a - 1));
    const long count = std::stol(spec.substr(b + 1));
    if (!(hi >= lo) || count < 2) throw ValidationError("");
    std::vector<double> grid;
    for (long g = 0; g < count; ++g) grid.push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(count - 1));
    return grid;
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("grid '{}' must look like lo:hi:count with lo <= hi and count >= 2", spec));
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and Bayesian inference for transmission-network individual-level epidemic models"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  SimulateOptions sim_opts;
  FitOptions fit_opts;
  SummaryOptions sum_opts;
  CurveOptions curve_opts;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output, observations, grid;
  std::vector<std::string> states;

  auto* sim = app.add_subcommand("simulate", "Simulate epidemics (and observations) from a config");
  sim->add_option("config", config_path, "Run config (JSON)")->required();
  sim->add_option("--seed", seed, "Override the config seed");
  sim->add_option("--output", output, "Override the output directory");
  sim->add_option("--replicates", sim_opts.replicates, "Independent replicate epidemics")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit a model to observations by MCMC");
  fit->add_option("config", config_path, "Run config (JSON)")->required();
  fit->add_option("--observations", observations, "Observations CSV (overrides fit.observations)");
  fit->add_option("--seed", seed, "Override the config seed");
  fit->add_option("--iterations", fit_opts.iterations, "Override fit.iterations");
  fit->add_option("--chains", fit_opts.chains, "Override fit.chains")->check(CLI::PositiveNumber);
  fit->add_option("--output", output, "Override the output directory");

  auto* sum = app.add_subcommand("summarize", "Posterior summaries for a fit run");
  sum->add_option("run_dir", run_dir, "Directory written by fit")->required();
  sum->add_option("--burnin", sum_opts.burnin, "Samples to discard (default: fit.burnin)");
  sum->add_option("--thin", sum_opts.thin, "Keep every thin-th sample (default: fit.thin)")->check(CLI::PositiveNumber);

  auto* cur = app.add_subcommand("curves", "Epidemic-curve posterior bands for a fit run");
  cur->add_option("run_dir", run_dir, "Directory written by fit")->required();
  cur->add_option("--burnin", curve_opts.retention.burnin, "Samples to discard (default: fit.burnin)");
  cur->add_option("--thin", curve_opts.retention.thin, "Keep every thin-th sample (default: fit.thin)")
      ->check(CLI::PositiveNumber);
  cur->add_option("--state", states, "States to report (default: all)");
  cur->add_option("--grid", grid, "Time grid lo:hi:count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) {
      sim_opts.seed = seed;
      if (output) sim_opts.output = *output;
      cmd_simulate(load_config(config_path), sim_opts, out);
    } else if (*fit) {
      fit_opts.seed = seed;
      if (output) fit_opts.output = *output;
      if (observations) fit_opts.observations = *observations;
      cmd_fit(load_config(config_path), fit_opts, out);
    } else if (*sum) {
      cmd_summarize(run_dir, sum_opts, out);
    } else if (*cur) {
      for (const auto& s : states) curve_opts.states.push_back(parse_disease_state(s));
      if (grid) curve_opts.grid = parse_grid(*grid);
      cmd_curves(run_dir, curve_opts, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace tnilm::cli
