#include "tnilm/mcmc.hpp"

#include <fmt/format.h>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "tnilm/error.hpp"
#include "tnilm/parallel.hpp"

namespace tnilm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double first_time(const Events& events, std::size_t i) {
  return events.raw(i, first_transition(events.model_class()));
}

Interval bounds_impl(const EventRef& target, const Events& events, const TransmissionNetwork* network,
                     const std::vector<std::vector<std::size_t>>* children, const McmcProblem& p) {
  const ModelClass cls = events.model_class();
  const std::size_t i = target.individual;
  const double start = p.start.time;
  Interval b{start, kInf};

  auto tighten = [&b](double lo, double hi) {
    b.lo = std::max(b.lo, lo);
    b.hi = std::min(b.hi, hi);
  };
  auto source_window = [&] {
    if (network == nullptr) return;
    const auto k = network->source_individual(i);
    if (!k) return;
    const double entry = events.has(*k, Transition::infection) ? events.raw(*k, Transition::infection) : -kInf;
    const double exit = events.has(*k, Transition::removal) ? events.raw(*k, Transition::removal) : kInf;
    tighten(entry, exit);
  };
  auto offspring_times = [&](bool earliest) {
    double t = earliest ? kInf : -kInf;
    if (children == nullptr) return t;
    for (std::size_t j : (*children)[i]) {
      const double tj = first_time(events, j);
      t = earliest ? std::min(t, tj) : std::max(t, tj);
    }
    return t;
  };

  switch (target.kind) {
    case Transition::exposure: {
      const double inf = events.raw(i, Transition::infection);
      tighten(inf - p.extents.exposure->hi, std::min(inf, inf - p.extents.exposure->lo));
      source_window();
      break;
    }
    case Transition::infection: {
      if (has_exposed(cls)) {
        if (events.has(i, Transition::exposure)) {
          const double e = events.raw(i, Transition::exposure);
          tighten(std::max(e, e + p.extents.exposure->lo), e + p.extents.exposure->hi);
        }
      } else {
        source_window();
      }
      const double obs = p.observations.infection[i];
      tighten(obs - p.extents.infection->hi, obs - p.extents.infection->lo);
      if (events.has(i, Transition::removal)) tighten(-kInf, events.raw(i, Transition::removal));
      tighten(-kInf, offspring_times(true));
      break;
    }
    case Transition::removal: {
      if (events.has(i, Transition::infection)) tighten(events.raw(i, Transition::infection), kInf);
      const double obs = p.observations.removal[i];
      tighten(obs - p.extents.removal->hi, obs - p.extents.removal->lo);
      tighten(offspring_times(false), kInf);
      break;
    }
  }
  return b;
}

// Standard normal mass between a and b, accurate in either tail.
double normal_mass(double a, double b) {
  constexpr double r = std::numbers::sqrt2;
  if (a >= 0.0) return 0.5 * (std::erfc(a / r) - std::erfc(b / r));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / r) - std::erfc(-a / r));
  return 0.5 * (std::erf(b / r) - std::erf(a / r));
}

// log P(Z > x) for x >= 0; asymptotic series once erfc underflows.
double log_upper_tail(double x) {
  if (x == kInf) return -kInf;
  if (x < 35.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  const double x2 = x * x;
  return -0.5 * x2 - std::log(x * std::sqrt(2.0 * std::numbers::pi)) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
}

double log_normal_mass(double a, double b) {
  if (b <= 0.0) return log_normal_mass(-b, -a);
  if (a < 0.0) return std::log(normal_mass(a, b));
  const double la = log_upper_tail(a);
  const double lb = log_upper_tail(b);
  return la + std::log1p(-std::exp(lb - la));
}

// Standard normal restricted to [a, b] with a far in the upper tail.
double sample_upper_tail(double a, double b, Rng& rng) {
  if (b - a <= 1.0 / a) {
    for (;;) {
      const double z = rng.uniform(a, b);
      if (std::log(rng.uniform_open()) <= -0.5 * (z * z - a * a)) return z;
    }
  }
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.uniform_open()) / alpha;
    if (z >= b) continue;
    if (std::log(rng.uniform_open()) <= -0.5 * (z - alpha) * (z - alpha)) return z;
  }
}

// Uniform draws within each extent window, restricted so every individual's
// path stays ordered and after the start time. False if some window is empty.
bool draw_initial_events(const McmcProblem& p, Events& ev, Rng& rng) {
  const double start = p.start.time;
  // Uniform on [lo, hi] above `floor`; a degenerate window is a fixed time.
  auto draw = [&rng](double lo, double hi, double floor, double& out) {
    if (lo == hi) {
      out = lo;
      return out > floor;
    }
    lo = std::max(lo, floor);
    if (!(lo < hi)) return false;
    out = rng.uniform(lo, hi);
    return out > lo;
  };
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const DiseaseState s = p.start.states[i];
    double floor = start;
    if ((s == DiseaseState::S || s == DiseaseState::E) && p.observations.infection_observed(i)) {
      const double obs = p.observations.infection[i];
      double inf = 0.0;
      if (!draw(obs - p.extents.infection->hi, obs - p.extents.infection->lo, start, inf)) {
        return false;
      }
      ev.set(i, Transition::infection, inf);
      if (s == DiseaseState::S && has_exposed(p.cls)) {
        double e = 0.0;
        if (!draw(inf - p.extents.exposure->hi, inf - p.extents.exposure->lo, start, e)) return false;
        ev.set(i, Transition::exposure, e);
      }
      floor = inf;
    }
    if (has_removed(p.cls) && s != DiseaseState::R && p.observations.removal_observed(i)) {
      const double obs = p.observations.removal[i];
      double rem = 0.0;
      if (!draw(obs - p.extents.removal->hi, obs - p.extents.removal->lo, floor, rem)) return false;
      ev.set(i, Transition::removal, rem);
    }
  }
  return true;
}

std::optional<std::size_t> threads_from_env() {
  const char* env = std::getenv("TNILM_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) {
    throw ValidationError(fmt::format("TNILM_THREADS must be a positive integer, got '{}'", env));
  }
  return static_cast<std::size_t>(v);
}

// At each power of two past 64 samples, rebuilds the covariance from the most
// recent half of the history so the burn-in transient stops widening the kernel.
void forget_early_history(MarkovChain& chain, std::span<const std::size_t> free) {
  const std::size_t total = chain.parameters.size();
  if (total < 64 || (total & (total - 1)) != 0) return;
  OnlineCovariance fresh(free.size());
  std::vector<double> sub(free.size());
  for (std::size_t s = total / 2; s < total; ++s) {
    for (std::size_t j = 0; j < free.size(); ++j) sub[j] = chain.parameters[s][free[j]];
    fresh.add(sub);
  }
  chain.covariance = std::move(fresh);
}

}  // namespace

void validate_problem(const McmcProblem& p) {
  if (!p.population) throw ValidationError("problem has no population");
  const std::size_t n = p.population->size();
  validate_extents(p.cls, p.extents);
  if (p.start.states.size() != n) {
    throw ValidationError(
        fmt::format("{} starting states given for a population of {}", p.start.states.size(), n));
  }
  if (p.observations.size() != n || p.observations.removal.size() != n) {
    throw ValidationError(
        fmt::format("{} observations given for a population of {}", p.observations.size(), n));
  }
  validate_observations(p.cls, p.observations, p.start.states);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.observations.infection_observed(i) && p.observations.infection[i] < p.start.time) {
      throw ValidationError(fmt::format("individual {} observed infected before the start time", i + 1));
    }
  }
  auto report = validate_model(p.cls, p.functions, p.priors.shape());
  if (!report.ok()) throw ValidationError(report.message());
  report = validate_references(p.functions, *p.population);
  if (!report.ok()) throw ValidationError(report.message());
  report = validate_priors(p.cls, p.functions, p.priors);
  if (!report.ok()) throw ValidationError(report.message());
}

OnlineCovariance::OnlineCovariance(std::size_t dim)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      scatter_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

void OnlineCovariance::add(std::span<const double> x) {
  if (x.size() != dim()) {
    throw std::invalid_argument(fmt::format("expected {} values, got {}", dim(), x.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  ++count_;
  const Eigen::VectorXd delta = v - mean_;
  mean_ += delta / static_cast<double>(count_);
  scatter_.noalias() += delta * (v - mean_).transpose();
}

Eigen::MatrixXd OnlineCovariance::covariance() const {
  if (count_ < 2) return Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
  return scatter_ / static_cast<double>(count_ - 1);
}

std::vector<EventRef> augmented_events(const McmcProblem& p) {
  std::vector<EventRef> refs;
  const std::size_t n = p.start.states.size();
  for (std::size_t i = 0; i < n; ++i) {
    const DiseaseState s = p.start.states[i];
    const bool inf_obs = p.observations.infection_observed(i);
    if (s == DiseaseState::S && inf_obs && has_exposed(p.cls)) refs.push_back({i, Transition::exposure});
    if ((s == DiseaseState::S || s == DiseaseState::E) && inf_obs) refs.push_back({i, Transition::infection});
    if (has_removed(p.cls) && s != DiseaseState::R && p.observations.removal_observed(i)) {
      refs.push_back({i, Transition::removal});
    }
  }
  return refs;
}

Interval event_time_bounds(const EventRef& target, const Events& events,
                           const TransmissionNetwork* network, const McmcProblem& problem) {
  if (!events.has(target.individual, target.kind)) {
    throw std::invalid_argument(fmt::format("individual {} has no {} time", target.individual + 1,
                                            to_string(target.kind)));
  }
  std::vector<std::vector<std::size_t>> children;
  if (network != nullptr) children = network->children();
  return bounds_impl(target, events, network, network ? &children : nullptr, problem);
}

double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng) {
  if (!(lo < hi)) throw std::invalid_argument("empty truncation interval");
  const boost::math::normal_distribution<double> z;
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  constexpr double kTail = 8.0;
  for (;;) {
    double x;
    if (a >= kTail) {
      x = sample_upper_tail(a, b, rng);
    } else if (b <= -kTail) {
      x = -sample_upper_tail(-b, -a, rng);
    } else {
      const double u = rng.uniform_open();
      if (a >= 0.0) {
        const double qa = cdf(complement(z, a));
        const double qb = cdf(complement(z, b));
        x = quantile(complement(z, qa - u * (qa - qb)));
      } else if (b <= 0.0) {
        const double pa = cdf(z, a);
        const double pb = cdf(z, b);
        x = quantile(z, pa + u * (pb - pa));
      } else {
        const double pa = cdf(z, a);
        const double p = pa + u * normal_mass(a, b);
        x = p < 0.5 ? quantile(z, p) : quantile(complement(z, 1.0 - p));
      }
    }
    const double y = mean + sd * x;
    if (y > lo && y < hi) return y;
  }
}

double truncated_normal_log_density(double x, double mean, double sd, double lo, double hi) {
  if (!(x >= lo && x <= hi)) return -kInf;
  const double z = (x - mean) / sd;
  const double log_mass = log_normal_mass((lo - mean) / sd, (hi - mean) / sd);
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - log_mass;
}

bool mh_accept(double log_post_new, double log_post_old, double log_proposal_correction, Rng& rng) {
  if (log_post_new == -kInf) return false;
  const double log_ratio = log_post_new - log_post_old + log_proposal_correction;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform_open()) < log_ratio;
}

std::vector<std::size_t> free_parameters(const RiskPriors& priors) {
  std::vector<std::size_t> free;
  const auto flat = priors.flatten();
  for (std::size_t j = 0; j < flat.size(); ++j) {
    if (!std::holds_alternative<Distribution::Point>(flat[j]->family())) free.push_back(j);
  }
  return free;
}

std::vector<double> propose_parameters(const MarkovChain& chain, std::span<const std::size_t> free,
                                       const AdaptSettings& adapt, Rng& rng) {
  std::vector<double> next = chain.current_parameters();
  const std::size_t p = free.size();
  if (p == 0) return next;
  const auto dim = static_cast<Eigen::Index>(p);

  Eigen::VectorXd step(dim);
  for (Eigen::Index j = 0; j < dim; ++j) step[j] = rng.normal();

  const bool adaptive = adapt.enabled && chain.covariance.count() >= 2 * p && rng.uniform() >= adapt.mix;
  bool done = false;
  if (adaptive) {
    const double scale = adapt.scale.value_or(2.38 * 2.38 / static_cast<double>(p));
    const Eigen::MatrixXd base = scale * chain.covariance.covariance();
    double jitter = adapt.jitter;
    for (int attempt = 0; attempt < 12 && !done; ++attempt, jitter *= 10.0) {
      Eigen::LLT<Eigen::MatrixXd> llt(base + jitter * Eigen::MatrixXd::Identity(dim, dim));
      if (llt.info() != Eigen::Success) continue;
      step = llt.matrixL() * step;
      done = true;
    }
  }
  if (!done) step *= adapt.fixed_sd / std::sqrt(static_cast<double>(p));
  for (std::size_t j = 0; j < p; ++j) next[free[j]] += step[static_cast<Eigen::Index>(j)];
  return next;
}

std::int32_t sample_source(const ExposureSnapshot& snapshot, Rng& rng) {
  if (!(snapshot.total > 0.0)) {
    throw InferenceError(
        fmt::format("individual {} has zero exposure rate at its exposure", snapshot.individual + 1));
  }
  double target = rng.uniform() * snapshot.total;
  for (const auto& sr : snapshot.endogenous) {
    target -= sr.rate;
    if (target < 0.0) return static_cast<std::int32_t>(sr.source);
  }
  if (snapshot.exogenous > 0.0) return kExternalSource;
  // Rounding left a sliver past the last endogenous rate.
  for (auto it = snapshot.endogenous.rbegin(); it != snapshot.endogenous.rend(); ++it) {
    if (it->rate > 0.0) return static_cast<std::int32_t>(it->source);
  }
  return kExternalSource;
}

GibbsResult gibbs_update_network(RiskEvaluator& risk, const EpidemicStart& start, const Events& events,
                                 Rng& rng) {
  LikelihoodConfig cfg;
  cfg.collect_snapshots = true;
  const auto ilm = log_likelihood_ilm(risk, start, events, cfg);
  if (ilm.log_likelihood == -kInf) {
    throw InferenceError("network update reached a state with zero likelihood");
  }
  GibbsResult out{TransmissionNetwork(events.size()), ilm.log_likelihood, ilm.log_likelihood};
  for (const auto& snap : ilm.snapshots) {
    const std::int32_t src = sample_source(snap, rng);
    out.network.set_raw(snap.individual, src);
    const double rate = src == kExternalSource ? snap.exogenous
                                               : risk.endogenous(snap.individual, static_cast<std::size_t>(src));
    out.log_likelihood_tnilm += std::log(rate) - std::log(snap.total);
  }
  return out;
}

double log_posterior(const McmcProblem& problem, std::span<const double> parameters, const Events& events,
                     const TransmissionNetwork& network) {
  const double lp = log_prior(parameters, problem.priors);
  if (lp == -kInf) return lp;
  const RiskParameters rp = problem.priors.shape().with_values(parameters);
  RiskEvaluator risk(problem.cls, *problem.population, problem.functions, rp);
  return lp + log_likelihood_tnilm(risk, problem.start, events, network).log_likelihood;
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested;
  if (w == 0) {
    w = threads_from_env().value_or(std::max(1u, std::thread::hardware_concurrency()));
  }
  return std::max<std::size_t>(1, std::min(w, std::max<std::size_t>(jobs, 1)));
}

MarkovChain initialize_chain(const McmcRun& run, std::size_t attempts, Rng rng) {
  const McmcProblem& p = run.problem;
  if (attempts == 0) throw ValidationError("initialization needs at least one attempt");
  const std::size_t n = p.population->size();
  const RiskParameters shape = p.priors.shape();

  Events trial(p.cls, n);
  std::vector<double> best_theta;
  Events best_events;
  double best = -kInf;
  for (std::size_t a = 0; a < attempts; ++a) {
    const std::vector<double> theta = p.priors.sample(rng).flatten();
    if (!draw_initial_events(p, trial, rng)) continue;
    const double lp = log_prior(theta, p.priors);
    if (lp == -kInf) continue;
    RiskEvaluator risk(p.cls, *p.population, p.functions, shape.with_values(theta));
    LikelihoodConfig cfg;
    cfg.early_stop_threshold = best - lp;
    const double ll = log_likelihood_ilm(risk, p.start, trial, cfg).log_likelihood;
    if (lp + ll > best) {
      best = lp + ll;
      best_theta = theta;
      best_events = trial;
    }
  }
  if (best == -kInf) {
    throw InferenceError(fmt::format(
        "no initial state with finite posterior found in {} attempts; widen the event extents or priors",
        attempts));
  }

  MarkovChain chain;
  chain.rng = rng;
  chain.store_thin = std::max<std::size_t>(1, run.settings.store_thin);
  RiskEvaluator risk(p.cls, *p.population, p.functions, shape.with_values(best_theta));
  auto g = gibbs_update_network(risk, p.start, best_events, chain.rng);
  chain.covariance = OnlineCovariance(free_parameters(p.priors).size());
  chain.current_events = std::move(best_events);
  chain.current_network = std::move(g.network);
  chain.log_posterior.push_back(log_prior(best_theta, p.priors) + g.log_likelihood_tnilm);
  chain.parameters.push_back(best_theta);
  chain.events.push_back(chain.current_events);
  chain.networks.push_back(chain.current_network);
  const auto free = free_parameters(p.priors);
  std::vector<double> sub;
  for (std::size_t j : free) sub.push_back(best_theta[j]);
  chain.covariance.add(sub);
  return chain;
}

void start(McmcRun& run) {
  validate_problem(run.problem);
  if (run.settings.chains == 0) throw ValidationError("at least one chain is required");
  run.chains.assign(run.settings.chains, MarkovChain{});
  parallel_for(run.settings.chains, worker_count(run.settings.threads, run.settings.chains),
               [&](std::size_t c) {
                 run.chains[c] = initialize_chain(run, run.settings.init_attempts, Rng(run.settings.seed + c));
               });
}

namespace {

double target_likelihood(const McmcProblem& p, RiskEvaluator& risk, const Events& events,
                         const TransmissionNetwork& network, bool conditioned) {
  return conditioned ? log_likelihood_tnilm(risk, p.start, events, network).log_likelihood
                     : log_likelihood_ilm(risk, p.start, events).log_likelihood;
}

}  // namespace

void update_event_times(MarkovChain& chain, const McmcProblem& p, RiskEvaluator& risk,
                        const McmcSettings& settings, double& target_ll) {
  auto refs = augmented_events(p);
  if (refs.empty()) return;
  Rng& rng = chain.rng;
  for (std::size_t j = refs.size(); j > 1; --j) std::swap(refs[j - 1], refs[rng.index(j)]);

  const bool conditioned = settings.condition_on_network;
  const TransmissionNetwork* network = conditioned ? &chain.current_network : nullptr;
  std::vector<std::vector<std::size_t>> children;
  if (conditioned) children = chain.current_network.children();
  const auto* kids = conditioned ? &children : nullptr;

  std::size_t batches = settings.per_event_acceptance ? refs.size() : settings.event_batches;
  batches = std::clamp<std::size_t>(batches, 1, refs.size());
  const double sigma = settings.event_sigma;

  std::vector<char> moved;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * refs.size() / batches;
    const std::size_t hi = (b + 1) * refs.size() / batches;
    if (lo == hi) continue;

    Events proposal = chain.current_events;
    double log_forward = 0.0;
    moved.assign(hi - lo, 0);
    for (std::size_t j = lo; j < hi; ++j) {
      const EventRef& r = refs[j];
      const Interval iv = bounds_impl(r, proposal, network, kids, p);
      if (!(iv.hi > iv.lo)) continue;
      const double cur = proposal.raw(r.individual, r.kind);
      const double x = sample_truncated_normal(cur, sigma, iv.lo, iv.hi, rng);
      log_forward += truncated_normal_log_density(x, cur, sigma, iv.lo, iv.hi);
      proposal.set(r.individual, r.kind, x);
      moved[j - lo] = 1;
    }

    Events reverse = proposal;
    double log_reverse = 0.0;
    for (std::size_t j = lo; j < hi && log_reverse > -kInf; ++j) {
      if (!moved[j - lo]) continue;
      const EventRef& r = refs[j];
      const Interval iv = bounds_impl(r, reverse, network, kids, p);
      const double from = reverse.raw(r.individual, r.kind);
      const double to = chain.current_events.raw(r.individual, r.kind);
      log_reverse += iv.hi > iv.lo ? truncated_normal_log_density(to, from, sigma, iv.lo, iv.hi) : -kInf;
      reverse.set(r.individual, r.kind, to);
    }

    ++chain.counters.event_proposals;
    if (log_reverse == -kInf) continue;
    const double ll = target_likelihood(p, risk, proposal, chain.current_network, conditioned);
    if (mh_accept(ll, target_ll, log_reverse - log_forward, rng)) {
      chain.current_events = std::move(proposal);
      target_ll = ll;
      ++chain.counters.event_accepts;
    }
  }
}

void iterate(McmcRun& run, std::size_t n, const ProgressFn& progress) {
  if (run.chains.empty()) throw InferenceError("chains must be initialized before iterating");
  const McmcProblem& p = run.problem;
  const McmcSettings& settings = run.settings;
  const auto free = free_parameters(p.priors);
  const RiskParameters shape = p.priors.shape();
  const bool conditioned = settings.condition_on_network;

  parallel_for(run.chains.size(), worker_count(settings.threads, run.chains.size()), [&](std::size_t c) {
    MarkovChain& chain = run.chains[c];
    std::vector<double> theta = chain.current_parameters();
    double lp = log_prior(theta, p.priors);
    auto risk = std::make_unique<RiskEvaluator>(p.cls, *p.population, p.functions, shape.with_values(theta));
    double target_ll = target_likelihood(p, *risk, chain.current_events, chain.current_network, conditioned);
    const std::size_t report_every = std::max<std::size_t>(1, n / 100);
    std::vector<double> sub(free.size());

    for (std::size_t it = 0; it < n; ++it) {
      update_event_times(chain, p, *risk, settings, target_ll);

      if (!free.empty()) {
        auto proposal = propose_parameters(chain, free, settings.adapt, chain.rng);
        ++chain.counters.parameter_proposals;
        const double lp_new = log_prior(proposal, p.priors);
        if (lp_new > -kInf) {
          auto risk_new =
              std::make_unique<RiskEvaluator>(p.cls, *p.population, p.functions, shape.with_values(proposal));
          double ll_new;
          try {
            ll_new = target_likelihood(p, *risk_new, chain.current_events, chain.current_network, conditioned);
          } catch (const RiskEvalError&) {
            ll_new = -kInf;
          }
          if (mh_accept(lp_new + ll_new, lp + target_ll, 0.0, chain.rng)) {
            theta = std::move(proposal);
            lp = lp_new;
            target_ll = ll_new;
            risk = std::move(risk_new);
            ++chain.counters.parameter_accepts;
          }
        }
      }

      auto g = gibbs_update_network(*risk, p.start, chain.current_events, chain.rng);
      chain.current_network = std::move(g.network);
      target_ll = conditioned ? g.log_likelihood_tnilm : g.log_likelihood_ilm;

      chain.parameters.push_back(theta);
      chain.log_posterior.push_back(lp + g.log_likelihood_tnilm);
      if (chain.iterations() % chain.store_thin == 0) {
        chain.events.push_back(chain.current_events);
        chain.networks.push_back(chain.current_network);
      }
      for (std::size_t j = 0; j < free.size(); ++j) sub[j] = theta[free[j]];
      chain.covariance.add(sub);
      if (settings.adapt.forget) forget_early_history(chain, free);
      if (progress && ((it + 1) % report_every == 0 || it + 1 == n)) progress(c, it + 1, n);
    }
  });
}

}  // namespace tnilm
