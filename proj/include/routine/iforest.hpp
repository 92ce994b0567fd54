#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "routine/detection.hpp"
#include "routine/numerics.hpp"
#include "routine/rng.hpp"

namespace routine {

/// Average path length of an unsuccessful binary-search-tree lookup among n
/// points: 2 H(n-1) - 2 (n-1)/n with H(i) ~ ln(i) + Euler's constant, and 0
/// for n <= 1.
double average_path_length(std::size_t n) noexcept;

inline constexpr double kEulerGamma = 0.5772156649;

struct IsoNode {
  int feature = -1;  // -1 marks an external node
  double split = 0.0;
  int left = -1;
  int right = -1;
  std::size_t size = 0;  // training points that reached the node

  bool external() const noexcept { return feature < 0; }
  bool operator==(const IsoNode&) const = default;
};

/// Isolation tree as a flat node array; node 0 is the root. A point goes left
/// when x[feature] < split.
struct IsoTree {
  std::vector<IsoNode> nodes;
  std::size_t dim = 0;

  std::size_t height() const;
  bool operator==(const IsoTree&) const = default;
};

struct IForestParams {
  std::size_t n_trees = 100;
  std::size_t max_subsample = 256;
  std::size_t threads = 1;
};

struct IsoForest {
  std::vector<IsoTree> trees;
  std::size_t n_trees = 0;
  std::size_t subsample_size = 0;
  std::size_t height_limit = 0;
  std::size_t train_n = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;

  bool operator==(const IsoForest&) const = default;
};

/// Builds a single tree on the rows of `points` selected by `sample`.
IsoTree build_tree(std::span<const Vector> points, std::vector<std::size_t> sample,
                   std::size_t height_limit, Rng& rng);

/// Tree t draws its subsample and splits from `rng.split(t)`, so the result
/// does not depend on params.threads.
IsoForest fit_iforest(std::span<const Vector> points, const IForestParams& params,
                      const Rng& rng);

/// Edges from the root to x's external node, plus c(size) of that node.
double path_length(const IsoTree& tree, std::span<const double> x);

double mean_path_length(const IsoForest& forest, std::span<const double> x);

/// 2^(-E[h] / c(psi)).
double score_from_path(double mean_path, std::size_t subsample_size) noexcept;

double anomaly_score(const IsoForest& forest, std::span<const double> x);

std::vector<double> anomaly_scores(const IsoForest& forest, std::span<const Vector> points);

/// Fit on the days, score them, threshold by contamination.
DetectionOutcome detect_iforest(std::span<const Vector> points, const IForestParams& params,
                                double contamination, const Rng& rng);

/// Versioned JSON document (format "routine-iforest", version 1).
nlohmann::json to_json(const IsoForest& forest);
IsoForest iforest_from_json(const nlohmann::json& doc);

}  // namespace routine
