#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tnilm {

// How pairwise distance components are built. Each component contributes one
// entry to every pairwise distance vector, in list order. No components means
// the population has no distance structure.
struct DistanceSpec {
  struct Euclidean {
    std::vector<std::string> columns;
  };
  struct MatrixFile {
    std::filesystem::path path;
  };
  using Component = std::variant<Euclidean, MatrixFile>;

  std::vector<Component> components;

  static DistanceSpec none() { return {}; }
  static DistanceSpec euclidean(std::vector<std::string> columns) {
    return {{Euclidean{std::move(columns)}}};
  }
};

// Individual-level covariates plus an optional n x n structure of
// fixed-length distance vectors. Individuals are indexed 0..n-1 in code and
// reported 1-based in files. Immutable after construction.
class Population {
 public:
  Population(std::vector<std::string> columns, std::vector<double> risks, std::size_t n);
  Population(std::vector<std::string> columns, std::vector<double> risks, std::size_t n,
             std::vector<double> distances, std::size_t dims);

  std::size_t size() const { return n_; }

  const std::vector<std::string>& columns() const { return columns_; }
  std::optional<std::size_t> column_index(std::string_view name) const;
  double risk(std::size_t i, std::size_t column) const { return risks_[i * columns_.size() + column]; }
  double risk(std::size_t i, std::string_view column) const;

  bool has_distances() const { return dims_ > 0; }
  std::size_t distance_dims() const { return dims_; }

  // Entry (i, k) of component c. Bounds-checked; throws when distances are absent.
  double distance(std::size_t i, std::size_t k, std::size_t component) const;
  double distance_unchecked(std::size_t i, std::size_t k, std::size_t component) const {
    return distances_[(i * n_ + k) * dims_ + component];
  }

  bool distances_symmetric() const;

 private:
  std::vector<std::string> columns_;
  std::vector<double> risks_;
  std::size_t n_;
  std::vector<double> distances_;
  std::size_t dims_ = 0;
};

// Reads a header-row CSV of numeric covariates and builds the requested
// distance components. Euclidean components are computed once from the named
// columns; matrix files are n x n CSVs without header (inf accepted).
Population load_population(const std::filesystem::path& risk_file, const DistanceSpec& spec);

// Same, from an already loaded covariate table.
Population make_population(std::vector<std::string> columns, std::vector<double> risks,
                           std::size_t n, const DistanceSpec& spec);

}  // namespace tnilm
