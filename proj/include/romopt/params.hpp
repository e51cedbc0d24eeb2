#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "romopt/core.hpp"

namespace romopt {

/// One plate-thickness design variable: a bounded grid of admissible values
/// in millimetres.
struct ParameterDim {
  std::string name;
  std::string region;
  double default_mm = 0.0;
  double lower_mm = 0.0;
  double upper_mm = 0.0;
  double step_mm = 0.5;

  /// Number of admissible grid values (lower + k * step, k = 0..count-1).
  std::int64_t grid_count() const {
    return std::int64_t(std::llround((upper_mm - lower_mm) / step_mm)) + 1;
  }

  double grid_value(std::int64_t k) const { return lower_mm + double(k) * step_mm; }

  /// Index of the nearest grid value, clamped to bounds.
  std::int64_t snap_index(double v) const {
    std::int64_t k = std::int64_t(std::llround((v - lower_mm) / step_mm));
    return std::clamp<std::int64_t>(k, 0, grid_count() - 1);
  }
};

/// Discrete thickness design space with a uniform density over the grid.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterDim> dims) : dims_(std::move(dims)) {
    validate();
  }

  int dims() const { return int(dims_.size()); }
  const ParameterDim& dim(int i) const { return dims_.at(std::size_t(i)); }
  const std::vector<ParameterDim>& all_dims() const { return dims_; }

  Eigen::VectorXd defaults() const {
    Eigen::VectorXd v(dims());
    for (int i = 0; i < dims(); ++i) v[i] = dims_[std::size_t(i)].default_mm;
    return v;
  }
  Eigen::VectorXd lower() const {
    Eigen::VectorXd v(dims());
    for (int i = 0; i < dims(); ++i) v[i] = dims_[std::size_t(i)].lower_mm;
    return v;
  }
  Eigen::VectorXd upper() const {
    Eigen::VectorXd v(dims());
    for (int i = 0; i < dims(); ++i) v[i] = dims_[std::size_t(i)].upper_mm;
    return v;
  }

  AffineNormalizer normalizer() const { return AffineNormalizer(lower(), upper()); }

  bool in_bounds(const Eigen::VectorXd& mu) const {
    if (mu.size() != dims()) return false;
    for (int i = 0; i < dims(); ++i) {
      const auto& d = dims_[std::size_t(i)];
      if (mu[i] < d.lower_mm - 1e-12 || mu[i] > d.upper_mm + 1e-12) return false;
    }
    return true;
  }

  void require_in_bounds(const Eigen::VectorXd& mu) const {
    if (!in_bounds(mu)) throw ArgumentError("parameter vector out of bounds");
  }

  bool on_grid(const Eigen::VectorXd& mu, double rel_tol = 1e-9) const {
    if (mu.size() != dims()) return false;
    for (int i = 0; i < dims(); ++i) {
      const auto& d = dims_[std::size_t(i)];
      const double k = (mu[i] - d.lower_mm) / d.step_mm;
      if (std::abs(k - std::round(k)) > rel_tol * std::max(1.0, std::abs(k)) + 1e-9)
        return false;
    }
    return in_bounds(mu);
  }

  /// Grid cardinality, saturating at int64 max for huge spaces.
  std::int64_t grid_cardinality() const {
    std::int64_t total = 1;
    for (const auto& d : dims_) {
      const std::int64_t c = d.grid_count();
      if (total > std::numeric_limits<std::int64_t>::max() / c)
        return std::numeric_limits<std::int64_t>::max();
      total *= c;
    }
    return total;
  }

  Eigen::VectorXd from_grid_indices(const std::vector<std::int64_t>& idx) const {
    if (int(idx.size()) != dims()) throw ArgumentError("grid index dimension mismatch");
    Eigen::VectorXd v(dims());
    for (int i = 0; i < dims(); ++i) v[i] = dims_[std::size_t(i)].grid_value(idx[std::size_t(i)]);
    return v;
  }

  std::vector<std::int64_t> to_grid_indices(const Eigen::VectorXd& mu) const {
    require_in_bounds(mu);
    std::vector<std::int64_t> idx(std::size_t(dims()));
    for (int i = 0; i < dims(); ++i) idx[std::size_t(i)] = dims_[std::size_t(i)].snap_index(mu[i]);
    return idx;
  }

  /// Snaps an arbitrary in-range vector to the nearest grid point.
  Eigen::VectorXd snap(const Eigen::VectorXd& mu) const {
    Eigen::VectorXd v(dims());
    for (int i = 0; i < dims(); ++i) {
      const auto& d = dims_[std::size_t(i)];
      v[i] = d.grid_value(d.snap_index(mu[i]));
    }
    return v;
  }

 private:
  void validate() const {
    if (dims_.empty()) throw ArgumentError("parameter space needs at least one dim");
    for (const auto& d : dims_) {
      if (d.step_mm <= 0.0) throw ArgumentError("step must be positive: " + d.name);
      if (d.lower_mm > d.default_mm || d.default_mm > d.upper_mm)
        throw ArgumentError("default outside bounds: " + d.name);
      const double k = (d.upper_mm - d.lower_mm) / d.step_mm;
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, std::abs(k)))
        throw ArgumentError("range not a multiple of step: " + d.name);
      const double kd = (d.default_mm - d.lower_mm) / d.step_mm;
      if (std::abs(kd - std::round(kd)) > 1e-9 * std::max(1.0, std::abs(kd)))
        throw ArgumentError("default not on grid: " + d.name);
    }
  }

  std::vector<ParameterDim> dims_;
};

/// A batch of grid-admissible design points (rows) with its generating seed.
struct SampleSet {
  Eigen::MatrixXd points;  // M x d, millimetres
  std::uint64_t seed = 0;
};

/// The 16-parameter passenger-hull thickness space (all values mm).
inline ParameterSpace hull16_space(double step_mm = 0.5) {
  std::vector<ParameterDim> dims = {
      {"mu01", "Deck 15", 7.5, 5.0, 15.0, step_mm},
      {"mu02", "Deck 16", 8.0, 5.0, 20.0, step_mm},
      {"mu03", "Deck 17", 9.0, 5.0, 20.0, step_mm},
      {"mu04", "Deck 14", 7.5, 5.0, 15.0, step_mm},
      {"mu05", "Deck 13", 7.0, 5.0, 15.0, step_mm},
      {"mu06", "Deck 12", 6.5, 5.0, 15.0, step_mm},
      {"mu07", "Deck 11", 6.0, 5.0, 15.0, step_mm},
      {"mu08", "Deck 10", 5.5, 5.0, 15.0, step_mm},
      {"mu09", "Deck 17", 6.0, 5.0, 20.0, step_mm},
      {"mu10", "Deck 17", 15.0, 5.0, 20.0, step_mm},
      {"mu11", "Deck 17", 6.0, 5.0, 20.0, step_mm},
      {"mu12", "Deck 16", 6.0, 5.0, 20.0, step_mm},
      {"mu13", "Deck 16", 6.0, 5.0, 20.0, step_mm},
      {"mu14", "Deck 09", 8.0, 5.0, 15.0, step_mm},
      {"mu15", "Deck 01", 16.0, 12.0, 25.0, step_mm},
      {"mu16", "Deck 00", 20.0, 12.0, 25.0, step_mm},
  };
  return ParameterSpace(std::move(dims));
}

namespace detail {

inline std::uint64_t grid_point_key(const std::vector<std::int64_t>& idx) {
  return fnv1a64(idx.data(), idx.size() * sizeof(std::int64_t));
}

}  // namespace detail

/// Draws `n_sets` independent sets of `M` distinct uniform grid points.
/// Duplicates within a set are rejected and redrawn. Deterministic in seed;
/// set i uses its own stream so generation order never matters.
inline std::vector<SampleSet> generate_candidate_sets(const ParameterSpace& space,
                                                      int M, int n_sets,
                                                      std::uint64_t seed) {
  if (M < 2) throw ArgumentError("generate_candidate_sets: M must be >= 2");
  if (n_sets < 1) throw ArgumentError("generate_candidate_sets: n_sets must be >= 1");
  if (space.grid_cardinality() < M)
    throw CapacityError("grid too small to hold M distinct points");

  std::vector<SampleSet> sets(std::size_t(n_sets));
  Rng root(seed);
  parallel_for(std::size_t(n_sets), [&](std::size_t si) {
    Rng rng = root.stream(si);
    Eigen::MatrixXd pts(M, space.dims());
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::int64_t> idx(std::size_t(space.dims()));
    const std::int64_t max_attempts = 1000ll * std::int64_t(M) + 100000ll;
    std::int64_t attempts = 0;
    int row = 0;
    while (row < M) {
      if (++attempts > max_attempts)
        throw CapacityError("rejection sampling failed to fill a distinct set");
      for (int j = 0; j < space.dims(); ++j)
        idx[std::size_t(j)] = rng.uniform_int(0, space.dim(j).grid_count() - 1);
      const std::uint64_t key = detail::grid_point_key(idx);
      if (!seen.insert(key).second) continue;
      pts.row(row) = space.from_grid_indices(idx).transpose();
      ++row;
    }
    sets[si] = SampleSet{std::move(pts), seed};
  });
  return sets;
}

/// Minimum Euclidean distance over all unordered pairs, in mm-space.
inline double min_pairwise_distance(const SampleSet& set) {
  const Eigen::Index M = set.points.rows();
  if (M < 2) throw ArgumentError("min_pairwise_distance: need at least 2 points");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = i + 1; j < M; ++j) {
      const double d = (set.points.row(i) - set.points.row(j)).norm();
      if (d < best) best = d;
    }
  return best;
}

/// Retains the candidate set with maximal minimum pairwise distance.
/// Ties break toward the lowest list index.
inline const SampleSet& maximin_select(const std::vector<SampleSet>& sets) {
  if (sets.empty()) throw ArgumentError("maximin_select: empty candidate list");
  std::vector<double> score(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) {
    score[i] = min_pairwise_distance(sets[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < sets.size(); ++i)
    if (score[i] > score[best]) best = i;
  return sets[best];
}

// ---------------------------------------------------------------------------
// Parameter-space definition file: CSV with one record per dim,
// fields name, region, default, lower, upper, step (all mm).
// ---------------------------------------------------------------------------

inline void write_space_file(const ParameterSpace& space,
                             const std::filesystem::path& path) {
  std::ostringstream out;
  out << "name,region,default,lower,upper,step\n";
  for (const auto& d : space.all_dims())
    out << d.name << ',' << d.region << ',' << fmt_g17(d.default_mm) << ','
        << fmt_g17(d.lower_mm) << ',' << fmt_g17(d.upper_mm) << ','
        << fmt_g17(d.step_mm) << '\n';
  write_text_file(path, out.str());
}

inline ParameterSpace read_space_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<ParameterDim> dims;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 6)
      throw IntegrityError("space file: expected 6 fields, got line '" + line + "'");
    ParameterDim d;
    d.name = trim(fields[0]);
    d.region = trim(fields[1]);
    d.default_mm = parse_double(fields[2]);
    d.lower_mm = parse_double(fields[3]);
    d.upper_mm = parse_double(fields[4]);
    d.step_mm = parse_double(fields[5]);
    dims.push_back(std::move(d));
  }
  return ParameterSpace(std::move(dims));
}

// ---------------------------------------------------------------------------
// Sample-set CSV: one row per point, header = dim names.
// ---------------------------------------------------------------------------

inline std::string sample_csv_string(const ParameterSpace& space,
                                     const SampleSet& set) {
  std::ostringstream out;
  for (int j = 0; j < space.dims(); ++j)
    out << (j ? "," : "") << space.dim(j).name;
  out << '\n';
  for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.points.cols(); ++j)
      out << (j ? "," : "") << fmt_g17(set.points(i, j));
    out << '\n';
  }
  return out.str();
}

inline void write_sample_csv(const ParameterSpace& space, const SampleSet& set,
                             const std::filesystem::path& path) {
  write_text_file(path, sample_csv_string(space, set));
}

inline SampleSet read_sample_csv(const ParameterSpace& space,
                                 const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<Eigen::VectorXd> rows;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split(line, ',');
    if (int(fields.size()) != space.dims())
      throw IntegrityError("sample csv: wrong column count");
    Eigen::VectorXd v(space.dims());
    for (int j = 0; j < space.dims(); ++j) v[j] = parse_double(fields[std::size_t(j)]);
    rows.push_back(std::move(v));
  }
  SampleSet set;
  set.points.resize(Eigen::Index(rows.size()), space.dims());
  for (std::size_t i = 0; i < rows.size(); ++i) set.points.row(Eigen::Index(i)) = rows[i].transpose();
  return set;
}

}  // namespace romopt
