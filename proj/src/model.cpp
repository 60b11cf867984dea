#include "tnilm/model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "tnilm/error.hpp"

namespace tnilm {

std::string_view to_string(ModelClass cls) {
  switch (cls) {
    case ModelClass::SEIR: return "SEIR";
    case ModelClass::SEI: return "SEI";
    case ModelClass::SIR: return "SIR";
    case ModelClass::SI: return "SI";
  }
  return "?";
}

ModelClass parse_model_class(std::string_view text) {
  if (text == "SEIR") return ModelClass::SEIR;
  if (text == "SEI") return ModelClass::SEI;
  if (text == "SIR") return ModelClass::SIR;
  if (text == "SI") return ModelClass::SI;
  throw ValidationError(fmt::format("unknown model class '{}' (expected SEIR, SEI, SIR or SI)", text));
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::sparks: return "sparks";
    case Role::susceptibility: return "susceptibility";
    case Role::infectivity: return "infectivity";
    case Role::transmissibility: return "transmissibility";
    case Role::latency: return "latency";
    case Role::removal: return "removal";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) {
  for (const auto r : kRoles) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

const RiskExpr& RiskFunctions::at(Role r) const {
  if (!slots[r]) {
    throw ValidationError(fmt::format("risk function '{}' is not defined", to_string(r)));
  }
  return *slots[r];
}

std::span<const double> RiskParameters::at(Role r) const {
  if (!slots[r]) return {};
  return *slots[r];
}

std::size_t RiskParameters::size() const {
  std::size_t n = 0;
  for (const auto r : kRoles) {
    if (slots[r]) n += slots[r]->size();
  }
  return n;
}

std::vector<double> RiskParameters::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto r : kRoles) {
    if (slots[r]) out.insert(out.end(), slots[r]->begin(), slots[r]->end());
  }
  return out;
}

RiskParameters RiskParameters::with_values(std::span<const double> flat) const {
  if (flat.size() != size()) {
    throw ValidationError(fmt::format("expected {} parameters, got {}", size(), flat.size()));
  }
  RiskParameters out = *this;
  std::size_t pos = 0;
  for (const auto r : kRoles) {
    if (!out.slots[r]) continue;
    for (auto& v : *out.slots[r]) v = flat[pos++];
  }
  return out;
}

std::size_t RiskPriors::size() const {
  std::size_t n = 0;
  for (const auto r : kRoles) {
    if (slots[r]) n += slots[r]->size();
  }
  return n;
}

std::vector<const Distribution*> RiskPriors::flatten() const {
  std::vector<const Distribution*> out;
  for (const auto r : kRoles) {
    if (!slots[r]) continue;
    for (const auto& d : *slots[r]) out.push_back(&d);
  }
  return out;
}

RiskParameters RiskPriors::sample(Rng& rng) const {
  RiskParameters rp;
  for (const auto r : kRoles) {
    if (!slots[r]) continue;
    std::vector<double> v;
    for (const auto& d : *slots[r]) v.push_back(d.sample(rng));
    rp.slots[r] = std::move(v);
  }
  return rp;
}

RiskParameters RiskPriors::shape() const {
  RiskParameters rp;
  for (const auto r : kRoles) {
    if (slots[r]) rp.slots[r] = std::vector<double>(slots[r]->size(), 0.0);
  }
  return rp;
}

std::vector<std::string> parameter_names(const RiskParameters& rp) {
  std::vector<std::string> names;
  for (const auto r : kRoles) {
    if (!rp.slots[r]) continue;
    for (std::size_t j = 0; j < rp.slots[r]->size(); ++j) {
      names.push_back(fmt::format("{}[{}]", to_string(r), j + 1));
    }
  }
  return names;
}

void validate_extents(ModelClass cls, const EventExtents& extents) {
  auto check = [](const std::optional<Extent>& e, std::string_view name) {
    if (!e) return;
    if (!(std::isfinite(e->lo) && std::isfinite(e->hi) && e->lo >= 0.0 && e->lo <= e->hi)) {
      throw ValidationError(
          fmt::format("{} extent ({}, {}) must satisfy 0 <= lo <= hi", name, e->lo, e->hi));
    }
  };
  check(extents.exposure, "exposure");
  check(extents.infection, "infection");
  check(extents.removal, "removal");
  if (has_exposed(cls) != extents.exposure.has_value()) {
    throw ValidationError(fmt::format("{} model {} an exposure extent", to_string(cls),
                                      has_exposed(cls) ? "requires" : "does not take"));
  }
  if (!extents.infection) {
    throw ValidationError("an infection extent is required");
  }
  if (has_removed(cls) && !extents.removal) {
    throw ValidationError(fmt::format("{} model requires a removal extent", to_string(cls)));
  }
  if (!has_removed(cls) && extents.removal) {
    throw ValidationError(fmt::format("{} model does not take a removal extent", to_string(cls)));
  }
}

std::string ValidationReport::message() const {
  std::string out;
  for (const auto& p : problems) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

ValidationReport validate_model(ModelClass cls, const RiskFunctions& rf, const RiskParameters& rp,
                                const Population* probe) {
  ValidationReport report;
  for (const auto r : kRoles) {
    const bool required = role_required(cls, r);
    if (required && !rf.has(r)) {
      report.problems.push_back(fmt::format("missing role: {}", to_string(r)));
    } else if (!required && rf.has(r)) {
      report.problems.push_back(fmt::format("extra role: {}", to_string(r)));
    }
    if (!rf.has(r)) continue;
    const auto& expr = rf.at(r);
    if (expr.context() != role_context(r)) {
      report.problems.push_back(fmt::format("role {} parsed in the wrong context", to_string(r)));
    }
    const std::size_t given = rp.slots[r] ? rp.slots[r]->size() : 0;
    if (given != expr.param_count()) {
      report.problems.push_back(fmt::format("arity mismatch: {} takes {} parameters, {} given",
                                            to_string(r), expr.param_count(), given));
    }
  }
  for (const auto r : kRoles) {
    if (!rf.has(r) && rp.slots[r] && !rp.slots[r]->empty()) {
      report.problems.push_back(
          fmt::format("parameters given for undefined role: {}", to_string(r)));
    }
    if (rp.slots[r]) {
      for (const double v : *rp.slots[r]) {
        if (!std::isfinite(v)) {
          report.problems.push_back(fmt::format("non-finite parameter in {}", to_string(r)));
        }
      }
    }
  }
  if (probe != nullptr && report.ok()) {
    auto refs = validate_references(rf, *probe);
    report.problems.insert(report.problems.end(), refs.problems.begin(), refs.problems.end());
    if (report.ok()) {
      for (const auto r : kRoles) {
        if (!rf.has(r)) continue;
        try {
          if (role_context(r) == ExprContext::pair) {
            if (probe->size() > 1) rf.at(r).evaluate(rp.at(r), *probe, 0, 1);
          } else {
            rf.at(r).evaluate(rp.at(r), *probe, 0);
          }
        } catch (const RiskEvalError& e) {
          report.problems.push_back(fmt::format("{}: {}", to_string(r), e.what()));
        }
      }
    }
  }
  return report;
}

ValidationReport validate_references(const RiskFunctions& rf, const Population& pop) {
  ValidationReport report;
  for (const auto r : kRoles) {
    if (!rf.has(r)) continue;
    const auto& expr = rf.at(r);
    for (const auto& column : expr.covariates()) {
      if (!pop.column_index(column)) {
        report.problems.push_back(
            fmt::format("{}: population has no risk column '{}'", to_string(r), column));
      }
    }
    if (expr.max_distance_component() > pop.distance_dims()) {
      report.problems.push_back(fmt::format("{}: uses dist component {} but population has {}",
                                            to_string(r), expr.max_distance_component(),
                                            pop.distance_dims()));
    }
  }
  return report;
}

ValidationReport validate_priors(ModelClass cls, const RiskFunctions& rf, const RiskPriors& priors) {
  ValidationReport report;
  for (const auto r : kRoles) {
    const std::size_t want = rf.has(r) ? rf.at(r).param_count() : 0;
    const std::size_t given = priors.slots[r] ? priors.slots[r]->size() : 0;
    if (want != given) {
      report.problems.push_back(fmt::format("priors for {}: expected {}, got {}", to_string(r),
                                            want, given));
    }
    if (!role_required(cls, r) && given > 0) {
      report.problems.push_back(fmt::format("priors given for unused role {}", to_string(r)));
    }
  }
  return report;
}

double log_prior(std::span<const double> flat, const RiskPriors& priors) {
  const auto dists = priors.flatten();
  if (dists.size() != flat.size()) {
    throw ValidationError(
        fmt::format("prior shape mismatch: {} priors for {} parameters", dists.size(), flat.size()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < flat.size(); ++j) {
    const double lp = dists[j]->log_density(flat[j]);
    if (lp == -std::numeric_limits<double>::infinity()) return lp;
    total += lp;
  }
  return total;
}

double log_prior(const RiskParameters& rp, const RiskPriors& priors) {
  for (const auto r : kRoles) {
    const std::size_t a = rp.slots[r] ? rp.slots[r]->size() : 0;
    const std::size_t b = priors.slots[r] ? priors.slots[r]->size() : 0;
    if (a != b) {
      throw ValidationError(fmt::format("prior shape mismatch for {}: {} parameters, {} priors",
                                        to_string(r), a, b));
    }
  }
  return log_prior(rp.flatten(), priors);
}

}  // namespace tnilm
