#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnilm/distribution.hpp"
#include "tnilm/population.hpp"
#include "tnilm/riskdsl.hpp"

namespace tnilm {

enum class ModelClass { SEIR, SEI, SIR, SI };

std::string_view to_string(ModelClass cls);
ModelClass parse_model_class(std::string_view text);

constexpr bool has_exposed(ModelClass cls) { return cls == ModelClass::SEIR || cls == ModelClass::SEI; }
constexpr bool has_removed(ModelClass cls) { return cls == ModelClass::SEIR || cls == ModelClass::SIR; }

// Risk-function slots, in parameter-vector order.
enum class Role : std::size_t { sparks, susceptibility, infectivity, transmissibility, latency, removal };
inline constexpr std::size_t kRoleCount = 6;
inline constexpr std::array<Role, kRoleCount> kRoles{Role::sparks,           Role::susceptibility,
                                                     Role::infectivity,      Role::transmissibility,
                                                     Role::latency,          Role::removal};

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

constexpr bool role_required(ModelClass cls, Role role) {
  switch (role) {
    case Role::latency: return has_exposed(cls);
    case Role::removal: return has_removed(cls);
    default: return true;
  }
}

constexpr ExprContext role_context(Role role) {
  return role == Role::infectivity ? ExprContext::pair : ExprContext::single;
}

template <class T>
class PerRole {
 public:
  std::optional<T>& operator[](Role r) { return slots_[static_cast<std::size_t>(r)]; }
  const std::optional<T>& operator[](Role r) const { return slots_[static_cast<std::size_t>(r)]; }

 private:
  std::array<std::optional<T>, kRoleCount> slots_{};
};

// One expression per populated role.
struct RiskFunctions {
  PerRole<RiskExpr> slots;

  const RiskExpr& at(Role r) const;
  bool has(Role r) const { return slots[r].has_value(); }
};

// One real vector per populated role.
struct RiskParameters {
  PerRole<std::vector<double>> slots;

  std::span<const double> at(Role r) const;
  std::size_t size() const;
  std::vector<double> flatten() const;
  // Rebuild from a flat vector using this object's per-role lengths.
  RiskParameters with_values(std::span<const double> flat) const;
};

// One prior per scalar parameter; same shape as RiskParameters.
struct RiskPriors {
  PerRole<std::vector<Distribution>> slots;

  std::size_t size() const;
  std::vector<const Distribution*> flatten() const;
  // Parameters drawn independently from each prior.
  RiskParameters sample(Rng& rng) const;
  // Zero-valued parameters with the priors' shape.
  RiskParameters shape() const;
};

// Names like "infectivity[2]" in flat order.
std::vector<std::string> parameter_names(const RiskParameters& rp);

struct Extent {
  double lo = 0.0;
  double hi = 0.0;
};

// Uniform prior bounds for data augmentation.
//   exposure:  infection_time - exposure_time in [lo, hi]      (classes with E)
//   infection: observed_infection - infection_time in [lo, hi]
//   removal:   observed_removal - removal_time in [lo, hi]     (classes with R)
struct EventExtents {
  std::optional<Extent> exposure;
  std::optional<Extent> infection;
  std::optional<Extent> removal;
};

void validate_extents(ModelClass cls, const EventExtents& extents);

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
  std::string message() const;
};

// Checks role slots against the class, parameter arities against each
// expression, and (when a population is given) that every expression yields
// a finite non-negative value on individual 1 (with source 2 for kernels).
ValidationReport validate_model(ModelClass cls, const RiskFunctions& rf, const RiskParameters& rp,
                                const Population* probe = nullptr);

// Checks that every covariate and distance component referenced exists.
ValidationReport validate_references(const RiskFunctions& rf, const Population& pop);

// Checks that priors have the same per-role shape as the functions' arities.
ValidationReport validate_priors(ModelClass cls, const RiskFunctions& rf, const RiskPriors& priors);

// Sum of per-scalar log prior densities; -inf outside support.
double log_prior(const RiskParameters& rp, const RiskPriors& priors);
double log_prior(std::span<const double> flat, const RiskPriors& priors);

}  // namespace tnilm
