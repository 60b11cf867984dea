#include "tnilm/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "tnilm/error.hpp"
#include "tnilm/io.hpp"

namespace tnilm {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(fmt::format("{}: {}", where, what));
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(where, fmt::format("unknown key '{}'", k));
  }
}

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Inf") return kInf;
    if (s == "-inf" || s == "-Inf") return -kInf;
  }
  fail(where, "expected a number");
}

double number_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where, fmt::format("missing '{}'", key));
  return number(j.at(key), fmt::format("{}.{}", where, key));
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

bool flag(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Role role_key(const std::string& key, const std::string& where) {
  auto r = parse_role(key);
  if (!r) fail(where, fmt::format("unknown role '{}'", key));
  return *r;
}

StartingStates parse_states(const json& j, const std::string& where, const std::filesystem::path& base) {
  StartingStates st;
  if (j.is_string()) {
    st.source = resolve(base, j.get<std::string>());
    return st;
  }
  if (!j.is_object()) fail(where, "expected a file path or an object");
  StartingStates::Listed listed;
  for (const auto& [k, v] : j.items()) {
    const std::string w = fmt::format("{}.{}", where, k);
    if (k == "default") {
      try {
        listed.fallback = parse_disease_state(text(v, w));
      } catch (const ValidationError& e) {
        fail(w, e.what());
      }
      continue;
    }
    DiseaseState s;
    try {
      s = parse_disease_state(k);
    } catch (const ValidationError&) {
      fail(where, fmt::format("unknown key '{}'", k));
    }
    if (!v.is_array()) fail(w, "expected a list of individuals");
    for (const auto& id : v) {
      const std::size_t i = count(id, w);
      if (i == 0) fail(w, "individuals are numbered from 1");
      listed.members[s].push_back(i);
    }
  }
  st.source = std::move(listed);
  return st;
}

Extent parse_extent(const json& j, const std::string& where) {
  if (j.is_number()) return {0.0, j.get<double>()};
  if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
  fail(where, "expected a number (upper bound) or [lo, hi]");
}

}  // namespace

std::vector<DiseaseState> StartingStates::resolve(std::size_t n) const {
  if (const auto* p = std::get_if<std::filesystem::path>(&source)) return io::read_states(*p, n);
  const auto& listed = std::get<Listed>(source);
  std::vector<DiseaseState> states(n, listed.fallback);
  std::vector<bool> seen(n, false);
  for (const auto& [state, members] : listed.members) {
    for (std::size_t id : members) {
      if (id < 1 || id > n) {
        throw ValidationError(fmt::format("starting state lists individual {} but the population has {}", id, n));
      }
      if (seen[id - 1]) throw ValidationError(fmt::format("individual {} has two starting states", id));
      seen[id - 1] = true;
      states[id - 1] = state;
    }
  }
  return states;
}

std::vector<DiseaseState> RunConfig::fit_states(std::size_t n) const {
  if (fit && fit->starting_states) return fit->starting_states->resolve(n);
  if (simulate) return simulate->starting_states.resolve(n);
  return std::vector<DiseaseState>(n, DiseaseState::S);
}

double RunConfig::fit_start_time() const {
  if (fit && fit->start_time) return *fit->start_time;
  if (simulate) return simulate->start_time;
  return 0.0;
}

Distribution parse_distribution(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family")) fail(where, "expected an object with a 'family'");
  const std::string family = text(j.at("family"), where + ".family");
  try {
    if (family == "uniform") {
      allow_keys(j, where, {"family", "a", "b"});
      return Distribution::uniform(number_at(j, "a", where), number_at(j, "b", where));
    }
    if (family == "exponential") {
      allow_keys(j, where, {"family", "mean"});
      return Distribution::exponential(number_at(j, "mean", where));
    }
    if (family == "gamma") {
      allow_keys(j, where, {"family", "shape", "scale"});
      return Distribution::gamma(number_at(j, "shape", where), number_at(j, "scale", where));
    }
    if (family == "normal") {
      allow_keys(j, where, {"family", "mu", "sigma", "truncated"});
      const bool trunc = j.contains("truncated") && flag(j.at("truncated"), where + ".truncated");
      return Distribution::normal(number_at(j, "mu", where), number_at(j, "sigma", where), trunc);
    }
    if (family == "beta") {
      allow_keys(j, where, {"family", "alpha", "beta"});
      return Distribution::beta(number_at(j, "alpha", where), number_at(j, "beta", where));
    }
    if (family == "flat") {
      allow_keys(j, where, {"family", "lo", "hi"});
      const double lo = j.contains("lo") ? number_at(j, "lo", where) : -kInf;
      const double hi = j.contains("hi") ? number_at(j, "hi", where) : kInf;
      return Distribution::flat(lo, hi);
    }
    if (family == "point") {
      allow_keys(j, where, {"family", "value"});
      return Distribution::point(number_at(j, "value", where));
    }
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    fail(where, msg);
  }
  fail(where, fmt::format("unknown distribution family '{}'", family));
}

json distribution_to_json(const Distribution& d) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        auto num = [](double v) -> json {
          if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
          return v;
        };
        if constexpr (std::is_same_v<T, Distribution::Uniform>) return {{"family", "uniform"}, {"a", f.a}, {"b", f.b}};
        if constexpr (std::is_same_v<T, Distribution::Exponential>) return {{"family", "exponential"}, {"mean", f.mean}};
        if constexpr (std::is_same_v<T, Distribution::Gamma>) {
          return {{"family", "gamma"}, {"shape", f.shape}, {"scale", f.scale}};
        }
        if constexpr (std::is_same_v<T, Distribution::Normal>) {
          return {{"family", "normal"}, {"mu", f.mu}, {"sigma", f.sigma}, {"truncated", f.truncated}};
        }
        if constexpr (std::is_same_v<T, Distribution::Beta>) return {{"family", "beta"}, {"alpha", f.alpha}, {"beta", f.beta}};
        if constexpr (std::is_same_v<T, Distribution::Flat>) return {{"family", "flat"}, {"lo", num(f.lo)}, {"hi", num(f.hi)}};
        if constexpr (std::is_same_v<T, Distribution::Point>) return {{"family", "point"}, {"value", f.value}};
      },
      d.family());
}

RunConfig parse_config(const json& j, const std::filesystem::path& base) {
  RunConfig cfg;
  allow_keys(j, "config", {"seed", "output_dir", "population", "model", "simulate", "fit"});
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) cfg.output_dir = resolve(base, text(j.at("output_dir"), "output_dir"));

  if (!j.contains("population")) fail("config", "missing 'population' section");
  {
    const json& p = j.at("population");
    allow_keys(p, "population", {"risks", "distances"});
    if (!p.contains("risks")) fail("population", "missing 'risks'");
    cfg.population.risks = resolve(base, text(p.at("risks"), "population.risks"));
    if (p.contains("distances")) {
      const json& d = p.at("distances");
      if (!d.is_array()) fail("population.distances", "expected a list");
      for (std::size_t c = 0; c < d.size(); ++c) {
        const std::string w = fmt::format("population.distances[{}]", c + 1);
        if (d[c].contains("euclidean")) {
          allow_keys(d[c], w, {"euclidean"});
          DistanceSpec::Euclidean e;
          if (!d[c].at("euclidean").is_array()) fail(w, "expected a list of column names");
          for (const auto& col : d[c].at("euclidean")) e.columns.push_back(text(col, w));
          cfg.population.distances.components.emplace_back(std::move(e));
        } else if (d[c].contains("matrix")) {
          allow_keys(d[c], w, {"matrix"});
          cfg.population.distances.components.emplace_back(
              DistanceSpec::MatrixFile{resolve(base, text(d[c].at("matrix"), w))});
        } else {
          fail(w, "expected {\"euclidean\": [...]} or {\"matrix\": path}");
        }
      }
    }
  }

  if (!j.contains("model")) fail("config", "missing 'model' section");
  {
    const json& m = j.at("model");
    allow_keys(m, "model", {"class", "functions", "parameters", "priors", "extents"});
    if (!m.contains("class")) fail("model", "missing 'class'");
    try {
      cfg.model.cls = parse_model_class(text(m.at("class"), "model.class"));
    } catch (const ValidationError& e) {
      fail("model.class", e.what());
    }
    if (!m.contains("functions")) fail("model", "missing 'functions'");
    const json& f = m.at("functions");
    if (!f.is_object()) fail("model.functions", "expected an object");
    for (const auto& [k, v] : f.items()) {
      const std::string w = "model.functions." + k;
      const Role r = role_key(k, "model.functions");
      try {
        cfg.model.functions.slots[r] = parse_risk_expr(text(v, w), role_context(r));
      } catch (const ParseError& e) {
        fail(w, e.what());
      }
    }
    auto arity = [&](Role r) { return cfg.model.functions.has(r) ? cfg.model.functions.at(r).param_count() : 0; };
    if (m.contains("parameters")) {
      const json& pj = m.at("parameters");
      if (!pj.is_object()) fail("model.parameters", "expected an object");
      RiskParameters rp;
      for (const auto r : kRoles) {
        if (cfg.model.functions.has(r)) rp.slots[r] = std::vector<double>{};
      }
      for (const auto& [k, v] : pj.items()) {
        const std::string w = "model.parameters." + k;
        const Role r = role_key(k, "model.parameters");
        if (!v.is_array()) fail(w, "expected a list of numbers");
        std::vector<double> vals;
        for (const auto& x : v) vals.push_back(number(x, w));
        rp.slots[r] = std::move(vals);
      }
      cfg.model.parameters = std::move(rp);
    }
    if (m.contains("priors")) {
      const json& pj = m.at("priors");
      if (!pj.is_object()) fail("model.priors", "expected an object");
      RiskPriors pr;
      for (const auto r : kRoles) {
        if (cfg.model.functions.has(r) && arity(r) == 0) pr.slots[r] = std::vector<Distribution>{};
      }
      for (const auto& [k, v] : pj.items()) {
        const std::string w = "model.priors." + k;
        const Role r = role_key(k, "model.priors");
        if (!v.is_array()) fail(w, "expected a list of distributions");
        std::vector<Distribution> ds;
        for (std::size_t x = 0; x < v.size(); ++x) ds.push_back(parse_distribution(v[x], fmt::format("{}[{}]", w, x + 1)));
        pr.slots[r] = std::move(ds);
      }
      cfg.model.priors = std::move(pr);
    }
    if (m.contains("extents")) {
      const json& e = m.at("extents");
      allow_keys(e, "model.extents", {"exposure", "infection", "removal"});
      EventExtents ex;
      if (e.contains("exposure")) ex.exposure = parse_extent(e.at("exposure"), "model.extents.exposure");
      if (e.contains("infection")) ex.infection = parse_extent(e.at("infection"), "model.extents.infection");
      if (e.contains("removal")) ex.removal = parse_extent(e.at("removal"), "model.extents.removal");
      try {
        validate_extents(cfg.model.cls, ex);
      } catch (const ValidationError& err) {
        fail("model.extents", err.what());
      }
      cfg.model.extents = ex;
    }
    if (cfg.model.parameters) {
      const auto report = validate_model(cfg.model.cls, cfg.model.functions, *cfg.model.parameters);
      if (!report.ok()) fail("model", report.message());
    }
    if (cfg.model.priors) {
      auto report = validate_priors(cfg.model.cls, cfg.model.functions, *cfg.model.priors);
      if (!report.ok()) fail("model.priors", report.message());
    }
    if (!cfg.model.parameters && !cfg.model.priors) {
      const auto report = validate_model(cfg.model.cls, cfg.model.functions, [&] {
        RiskParameters rp;
        for (const auto r : kRoles) {
          if (cfg.model.functions.has(r)) rp.slots[r] = std::vector<double>(arity(r), 0.0);
        }
        return rp;
      }());
      if (!report.ok()) fail("model", report.message());
    }
  }

  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    allow_keys(s, "simulate", {"starting_states", "start_time", "tmax", "max_iterations", "max_wall_seconds", "observe"});
    SimulateConfig sc;
    if (s.contains("starting_states")) sc.starting_states = parse_states(s.at("starting_states"), "simulate.starting_states", base);
    if (s.contains("start_time")) sc.start_time = number(s.at("start_time"), "simulate.start_time");
    if (s.contains("tmax")) sc.tmax = number(s.at("tmax"), "simulate.tmax");
    if (s.contains("max_iterations")) sc.max_iterations = count(s.at("max_iterations"), "simulate.max_iterations");
    if (s.contains("max_wall_seconds")) sc.max_wall_seconds = number(s.at("max_wall_seconds"), "simulate.max_wall_seconds");
    if (!sc.tmax && !sc.max_iterations && !sc.max_wall_seconds) {
      fail("simulate", "give at least one of tmax, max_iterations, max_wall_seconds");
    }
    if (s.contains("observe")) {
      const json& o = s.at("observe");
      allow_keys(o, "simulate.observe", {"infection_delay", "removal_delay", "force"});
      ObserveConfig oc;
      if (o.contains("infection_delay")) oc.infection_delay = parse_distribution(o.at("infection_delay"), "simulate.observe.infection_delay");
      if (o.contains("removal_delay")) oc.removal_delay = parse_distribution(o.at("removal_delay"), "simulate.observe.removal_delay");
      if (o.contains("force")) oc.force = flag(o.at("force"), "simulate.observe.force");
      for (const auto* d : {&oc.infection_delay, &oc.removal_delay}) {
        if (d->support_lo() < 0.0) fail("simulate.observe", "observation delays must be non-negative");
      }
      sc.observe = oc;
    }
    cfg.simulate = std::move(sc);
  }

  if (j.contains("fit")) {
    const json& f = j.at("fit");
    allow_keys(f, "fit", {"init_attempts", "iterations", "event_sigma", "event_batches", "per_event_acceptance",
                          "condition_on_network", "adapt", "chains", "output_thin", "burnin", "thin",
                          "observations", "starting_states", "start_time", "threads"});
    FitConfig fc;
    auto& st = fc.settings;
    if (f.contains("init_attempts")) st.init_attempts = count(f.at("init_attempts"), "fit.init_attempts");
    if (f.contains("iterations")) fc.iterations = count(f.at("iterations"), "fit.iterations");
    if (f.contains("event_sigma")) st.event_sigma = number(f.at("event_sigma"), "fit.event_sigma");
    if (f.contains("event_batches")) st.event_batches = count(f.at("event_batches"), "fit.event_batches");
    if (f.contains("per_event_acceptance")) st.per_event_acceptance = flag(f.at("per_event_acceptance"), "fit.per_event_acceptance");
    if (f.contains("condition_on_network")) st.condition_on_network = flag(f.at("condition_on_network"), "fit.condition_on_network");
    if (f.contains("chains")) st.chains = count(f.at("chains"), "fit.chains");
    if (f.contains("output_thin")) st.store_thin = count(f.at("output_thin"), "fit.output_thin");
    if (f.contains("threads")) st.threads = count(f.at("threads"), "fit.threads");
    if (f.contains("burnin")) fc.burnin = count(f.at("burnin"), "fit.burnin");
    if (f.contains("thin")) fc.thin = count(f.at("thin"), "fit.thin");
    if (f.contains("observations")) fc.observations = resolve(base, text(f.at("observations"), "fit.observations"));
    if (f.contains("starting_states")) fc.starting_states = parse_states(f.at("starting_states"), "fit.starting_states", base);
    if (f.contains("start_time")) fc.start_time = number(f.at("start_time"), "fit.start_time");
    if (f.contains("adapt")) {
      const json& a = f.at("adapt");
      allow_keys(a, "fit.adapt", {"enabled", "scale", "mix", "jitter", "fixed_sd", "forget"});
      if (a.contains("enabled")) st.adapt.enabled = flag(a.at("enabled"), "fit.adapt.enabled");
      if (a.contains("scale")) st.adapt.scale = number(a.at("scale"), "fit.adapt.scale");
      if (a.contains("mix")) st.adapt.mix = number(a.at("mix"), "fit.adapt.mix");
      if (a.contains("jitter")) st.adapt.jitter = number(a.at("jitter"), "fit.adapt.jitter");
      if (a.contains("fixed_sd")) st.adapt.fixed_sd = number(a.at("fixed_sd"), "fit.adapt.fixed_sd");
      if (a.contains("forget")) st.adapt.forget = flag(a.at("forget"), "fit.adapt.forget");
    }
    if (!(st.event_sigma > 0.0) || !std::isfinite(st.event_sigma)) fail("fit.event_sigma", "must be positive");
    if (st.event_batches == 0) fail("fit.event_batches", "must be at least 1");
    if (st.chains == 0) fail("fit.chains", "must be at least 1");
    if (st.store_thin == 0) fail("fit.output_thin", "must be at least 1");
    if (st.init_attempts == 0) fail("fit.init_attempts", "must be at least 1");
    if (fc.thin == 0) fail("fit.thin", "must be at least 1");
    if (!(st.adapt.mix >= 0.0 && st.adapt.mix <= 1.0)) fail("fit.adapt.mix", "must be in [0, 1]");
    if (!(st.adapt.jitter >= 0.0)) fail("fit.adapt.jitter", "must be non-negative");
    if (!(st.adapt.fixed_sd > 0.0)) fail("fit.adapt.fixed_sd", "must be positive");
    if (st.adapt.scale && !(*st.adapt.scale > 0.0)) fail("fit.adapt.scale", "must be positive");
    st.seed = cfg.seed;
    cfg.fit = std::move(fc);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  RunConfig cfg = parse_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  cfg.source = path;
  return cfg;
}

}  // namespace tnilm
