#include "routine/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "routine/error.hpp"

namespace routine {

double average_path_length(std::size_t n) noexcept {
  if (n <= 1) return 0.0;
  const double m = static_cast<double>(n);
  const double harmonic = std::log(m - 1.0) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (m - 1.0) / m;
}

std::size_t IsoTree::height() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    const auto [idx, depth] = stack.back();
    stack.pop_back();
    best = std::max(best, depth);
    const IsoNode& node = nodes[static_cast<std::size_t>(idx)];
    if (!node.external()) {
      stack.emplace_back(node.left, depth + 1);
      stack.emplace_back(node.right, depth + 1);
    }
  }
  return best;
}

namespace {

struct TreeBuilder {
  std::span<const Vector> points;
  std::size_t height_limit;
  Rng& rng;
  IsoTree tree;

  int grow(std::vector<std::size_t> idx, std::size_t depth) {
    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(IsoNode{-1, 0.0, -1, -1, idx.size()});
    if (depth >= height_limit || idx.size() <= 1) return self;

    // Only features with a representable value strictly inside (min, max)
    // can be split.
    std::vector<std::size_t> candidates;
    std::vector<std::pair<double, double>> ranges;
    for (std::size_t f = 0; f < tree.dim; ++f) {
      double lo = points[idx[0]][f];
      double hi = lo;
      for (std::size_t i : idx) {
        lo = std::min(lo, points[i][f]);
        hi = std::max(hi, points[i][f]);
      }
      if (std::nextafter(lo, hi) < hi) {
        candidates.push_back(f);
        ranges.emplace_back(lo, hi);
      }
    }
    if (candidates.empty()) return self;

    const std::size_t pick = rng.below(candidates.size());
    const std::size_t f = candidates[pick];
    const auto [lo, hi] = ranges[pick];
    double split = lo + rng.uniform_open() * (hi - lo);
    if (!(split > lo && split < hi)) split = lo + 0.5 * (hi - lo);
    if (!(split > lo && split < hi)) split = std::nextafter(lo, hi);

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (points[i][f] < split ? left : right).push_back(i);

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    IsoNode& node = tree.nodes[static_cast<std::size_t>(self)];
    node.feature = static_cast<int>(f);
    node.split = split;
    node.left = l;
    node.right = r;
    return self;
  }
};

std::size_t ceil_log2(std::size_t n) {
  std::size_t h = 0;
  while ((std::size_t{1} << h) < n) ++h;
  return h;
}

}  // namespace

IsoTree build_tree(std::span<const Vector> points, std::vector<std::size_t> sample,
                   std::size_t height_limit, Rng& rng) {
  TreeBuilder b{points, height_limit, rng, {}};
  b.tree.dim = points.empty() ? 0 : points.front().size();
  b.grow(std::move(sample), 0);
  return std::move(b.tree);
}

IsoForest fit_iforest(std::span<const Vector> points, const IForestParams& params,
                      const Rng& rng) {
  if (points.size() < 2) throw Error("isolation forest needs at least two points");
  const std::size_t d = check_points(points);
  if (d < 1) throw Error("isolation forest needs at least one feature");
  if (params.n_trees < 1) throw Error("isolation forest needs at least one tree");
  if (params.max_subsample < 2) throw Error("subsample size must be at least 2");

  IsoForest forest;
  forest.n_trees = params.n_trees;
  forest.train_n = points.size();
  forest.subsample_size = std::min(params.max_subsample, points.size());
  forest.height_limit = ceil_log2(forest.subsample_size);
  forest.dim = d;
  forest.seed = rng.seed();
  forest.trees.resize(params.n_trees);

  auto build = [&](std::size_t t) {
    Rng tree_rng = rng.split(t);
    auto sample = tree_rng.sample_without_replacement(points.size(), forest.subsample_size);
    forest.trees[t] = build_tree(points, std::move(sample), forest.height_limit, tree_rng);
  };

  const std::size_t workers = std::clamp<std::size_t>(params.threads, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < params.n_trees; t += workers) build(t);
      });
  }
  return forest;
}

double path_length(const IsoTree& tree, std::span<const double> x) {
  if (x.size() != tree.dim)
    throw Error("query has dimension " + std::to_string(x.size()) + ", tree expects " +
                std::to_string(tree.dim));
  if (tree.nodes.empty()) throw Error("empty isolation tree");
  std::size_t idx = 0;
  double edges = 0.0;
  for (;;) {
    const IsoNode& node = tree.nodes[idx];
    if (node.external()) return edges + average_path_length(node.size);
    idx = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature)] < node.split ? node.left : node.right);
    edges += 1.0;
  }
}

double mean_path_length(const IsoForest& forest, std::span<const double> x) {
  if (forest.trees.empty()) throw Error("forest is not fitted");
  double sum = 0.0;
  for (const auto& t : forest.trees) sum += path_length(t, x);
  return sum / static_cast<double>(forest.trees.size());
}

double score_from_path(double mean_path, std::size_t subsample_size) noexcept {
  return std::exp2(-mean_path / average_path_length(subsample_size));
}

double anomaly_score(const IsoForest& forest, std::span<const double> x) {
  return score_from_path(mean_path_length(forest, x), forest.subsample_size);
}

std::vector<double> anomaly_scores(const IsoForest& forest, std::span<const Vector> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(anomaly_score(forest, p));
  return out;
}

DetectionOutcome detect_iforest(std::span<const Vector> points, const IForestParams& params,
                                double contamination, const Rng& rng) {
  const IsoForest forest = fit_iforest(points, params, rng);
  const auto scores = anomaly_scores(forest, points);
  return decide(scores, contamination);
}

nlohmann::json to_json(const IsoForest& forest) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : forest.trees) {
    nlohmann::json feature = nlohmann::json::array(), split = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(),
                   size = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      split.push_back(n.split);
      left.push_back(n.left);
      right.push_back(n.right);
      size.push_back(n.size);
    }
    trees.push_back({{"feature", feature},
                     {"split", split},
                     {"left", left},
                     {"right", right},
                     {"size", size}});
  }
  return {{"format", "routine-iforest"},
          {"version", 1},
          {"params",
           {{"n_trees", forest.n_trees},
            {"subsample_size", forest.subsample_size},
            {"height_limit", forest.height_limit},
            {"train_n", forest.train_n},
            {"dim", forest.dim}}},
          {"seed", forest.seed},
          {"trees", trees}};
}

IsoForest iforest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "routine-iforest") throw Error("not an isolation forest document");
    if (doc.at("version").get<int>() != 1)
      throw Error("unsupported isolation forest document version");
    IsoForest f;
    const auto& p = doc.at("params");
    f.n_trees = p.at("n_trees").get<std::size_t>();
    f.subsample_size = p.at("subsample_size").get<std::size_t>();
    f.height_limit = p.at("height_limit").get<std::size_t>();
    f.train_n = p.at("train_n").get<std::size_t>();
    f.dim = p.at("dim").get<std::size_t>();
    f.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& jt : doc.at("trees")) {
      IsoTree t;
      t.dim = f.dim;
      const auto& feature = jt.at("feature");
      const std::size_t count = feature.size();
      for (std::size_t i = 0; i < count; ++i) {
        IsoNode n;
        n.feature = feature.at(i).get<int>();
        n.split = jt.at("split").at(i).get<double>();
        n.left = jt.at("left").at(i).get<int>();
        n.right = jt.at("right").at(i).get<int>();
        n.size = jt.at("size").at(i).get<std::size_t>();
        const auto limit = static_cast<int>(count);
        if (!n.external() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                              n.left >= limit || n.right >= limit ||
                              n.feature >= static_cast<int>(f.dim)))
          throw Error("malformed tree node");
        t.nodes.push_back(n);
      }
      f.trees.push_back(std::move(t));
    }
    if (f.trees.size() != f.n_trees) throw Error("tree count does not match params");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed isolation forest document: ") + e.what());
  }
}

}  // namespace routine
