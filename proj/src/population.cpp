#include "tnilm/population.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "tnilm/csv.hpp"
#include "tnilm/error.hpp"

namespace tnilm {

Population::Population(std::vector<std::string> columns, std::vector<double> risks, std::size_t n)
    : Population(std::move(columns), std::move(risks), n, {}, 0) {}

Population::Population(std::vector<std::string> columns, std::vector<double> risks, std::size_t n,
                       std::vector<double> distances, std::size_t dims)
    : columns_(std::move(columns)),
      risks_(std::move(risks)),
      n_(n),
      distances_(std::move(distances)),
      dims_(dims) {
  if (n_ == 0) {
    throw ValidationError("population must contain at least one individual");
  }
  if (risks_.size() != n_ * columns_.size()) {
    throw ValidationError(fmt::format("risk table has {} values, expected {} rows x {} columns",
                                      risks_.size(), n_, columns_.size()));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (!std::isfinite(risk(i, c))) {
        throw ValidationError(fmt::format("risk value for individual {}, column '{}' is not finite",
                                          i + 1, columns_[c]));
      }
    }
  }
  if (distances_.size() != n_ * n_ * dims_) {
    throw ValidationError(fmt::format("distance structure has {} values, expected {}x{}x{}",
                                      distances_.size(), n_, n_, dims_));
  }
  for (std::size_t idx = 0; idx < distances_.size(); ++idx) {
    const double d = distances_[idx];
    if (std::isnan(d) || d < 0.0) {
      const std::size_t cell = idx / dims_;
      throw ValidationError(fmt::format("distance ({}, {}) component {} is {}; must be >= 0 or inf",
                                        cell / n_ + 1, cell % n_ + 1, idx % dims_ + 1, d));
    }
  }
}

std::optional<std::size_t> Population::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c] == name) return c;
  }
  return std::nullopt;
}

double Population::risk(std::size_t i, std::string_view column) const {
  const auto c = column_index(column);
  if (!c) {
    throw ValidationError(fmt::format("population has no risk column '{}'", column));
  }
  if (i >= n_) {
    throw ValidationError(fmt::format("individual {} out of range 1..{}", i + 1, n_));
  }
  return risk(i, *c);
}

double Population::distance(std::size_t i, std::size_t k, std::size_t component) const {
  if (!has_distances()) {
    throw ValidationError("population has no distance structure");
  }
  if (i >= n_ || k >= n_) {
    throw ValidationError(fmt::format("distance index ({}, {}) out of range 1..{}", i + 1, k + 1, n_));
  }
  if (component >= dims_) {
    throw ValidationError(
        fmt::format("distance component {} out of range 1..{}", component + 1, dims_));
  }
  return distance_unchecked(i, k, component);
}

bool Population::distances_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = i + 1; k < n_; ++k) {
      for (std::size_t c = 0; c < dims_; ++c) {
        if (distance_unchecked(i, k, c) != distance_unchecked(k, i, c)) return false;
      }
    }
  }
  return true;
}

namespace {

std::vector<double> euclidean_component(const std::vector<std::string>& columns,
                                        const std::vector<double>& risks, std::size_t n,
                                        const std::vector<std::string>& use) {
  if (use.empty()) {
    throw ValidationError("euclidean distance needs at least one column");
  }
  std::vector<std::size_t> idx;
  for (const auto& name : use) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
      throw ValidationError(fmt::format("euclidean distance: missing column '{}'", name));
    }
    idx.push_back(static_cast<std::size_t>(it - columns.begin()));
  }
  const std::size_t width = columns.size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      double sq = 0.0;
      for (const auto c : idx) {
        const double diff = risks[i * width + c] - risks[k * width + c];
        sq += diff * diff;
      }
      out[i * n + k] = out[k * n + i] = std::sqrt(sq);
    }
  }
  return out;
}

std::vector<double> matrix_component(const std::filesystem::path& path, std::size_t n) {
  const auto table = csv::read(path, /*has_header=*/false);
  if (table.rows.size() != n) {
    throw ValidationError(fmt::format("{}: distance matrix has {} rows, population has {}",
                                      path.string(), table.rows.size(), n));
  }
  std::vector<double> out(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (row.size() != n) {
      throw ValidationError(fmt::format("{}: row {} has {} columns, expected {}", path.string(),
                                        r + 1, row.size(), n));
    }
    for (std::size_t c = 0; c < n; ++c) {
      out[r * n + c] = csv::parse_number(row[c], path, r + 1, c + 1);
    }
  }
  return out;
}

}  // namespace

Population make_population(std::vector<std::string> columns, std::vector<double> risks,
                           std::size_t n, const DistanceSpec& spec) {
  if (spec.components.empty()) {
    return Population(std::move(columns), std::move(risks), n);
  }
  const std::size_t dims = spec.components.size();
  std::vector<double> distances(n * n * dims);
  for (std::size_t c = 0; c < dims; ++c) {
    const auto component = std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, DistanceSpec::Euclidean>) {
            return euclidean_component(columns, risks, n, s.columns);
          } else {
            return matrix_component(s.path, n);
          }
        },
        spec.components[c]);
    for (std::size_t cell = 0; cell < n * n; ++cell) {
      distances[cell * dims + c] = component[cell];
    }
  }
  return Population(std::move(columns), std::move(risks), n, std::move(distances), dims);
}

Population load_population(const std::filesystem::path& risk_file, const DistanceSpec& spec) {
  const auto table = csv::read(risk_file, /*has_header=*/true);
  const std::size_t n = table.rows.size();
  if (n == 0) {
    throw ValidationError(fmt::format("{}: no individuals", risk_file.string()));
  }
  const std::size_t width = table.header.size();
  std::vector<double> risks(n * width);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (row.size() != width) {
      throw ValidationError(fmt::format("{}: row {} has {} cells, header has {}",
                                        risk_file.string(), r + 1, row.size(), width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      risks[r * width + c] = csv::parse_number(row[c], risk_file, r + 1, c + 1);
    }
  }
  return make_population(table.header, std::move(risks), n, spec);
}

}  // namespace tnilm
