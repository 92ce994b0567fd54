#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "routine/dataset.hpp"
#include "routine/daysig.hpp"
#include "routine/detection.hpp"
#include "routine/error.hpp"
#include "routine/iforest.hpp"

using namespace routine;

namespace {

// Checks the structural invariants of a tree against the data it was built on.
void check_tree(const IsoTree& t, const Points& x, std::size_t height_limit) {
  CHECK(t.height() <= height_limit);
  for (const auto& nd : t.nodes) {
    CHECK(nd.size >= 1);
    if (nd.external()) continue;
    const auto& l = t.nodes[static_cast<std::size_t>(nd.left)];
    const auto& r = t.nodes[static_cast<std::size_t>(nd.right)];
    CHECK(l.size + r.size == nd.size);
  }
  // The split lies strictly inside the range of the points reaching the node.
  std::vector<std::vector<std::size_t>> reach(t.nodes.size());
  for (std::size_t i = 0; i < x.size(); ++i) reach[0].push_back(i);
  for (std::size_t n = 0; n < t.nodes.size(); ++n) {
    const auto& nd = t.nodes[n];
    if (nd.external() || reach[n].empty()) continue;
    double lo = INFINITY, hi = -INFINITY;
    for (auto i : reach[n]) {
      lo = std::min(lo, x[i][static_cast<std::size_t>(nd.feature)]);
      hi = std::max(hi, x[i][static_cast<std::size_t>(nd.feature)]);
    }
    if (reach[n].size() == nd.size) {
      CHECK(nd.split > lo);
      CHECK(nd.split < hi);  // only valid when the reaching set equals the sample
    }
    for (auto i : reach[n])
      reach[static_cast<std::size_t>(x[i][static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left
                                                                                               : nd.right)]
          .push_back(i);
  }
}

}  // namespace

TEST_CASE("average path length") {
  CHECK(average_path_length(0) == 0.0);
  CHECK(average_path_length(1) == 0.0);
  const double c2 = 2.0 * (std::log(1.0) + 0.5772156649) - 2.0 * 1.0 / 2.0;
  const double c256 = 2.0 * (std::log(255.0) + 0.5772156649) - 2.0 * 255.0 / 256.0;
  CHECK(std::abs(average_path_length(2) - c2) <= 1e-12);
  CHECK(std::abs(average_path_length(2) - 0.1544313298) <= 1e-9);
  CHECK(std::abs(average_path_length(256) - c256) <= 1e-12);
  CHECK(std::abs(average_path_length(256) - 10.2445) <= 5e-4);
  for (std::size_t n = 3; n <= 10000; ++n)
    REQUIRE(average_path_length(n) > average_path_length(n - 1));
}

TEST_CASE("two points force a single split") {
  const Points x{{1.0}, {3.0}};
  const auto f = fit_iforest(x, {1, 256, 1}, Rng(9));
  REQUIRE(f.trees.size() == 1);
  const auto& t = f.trees[0];
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].split > 1.0);
  CHECK(t.nodes[0].split < 3.0);
  CHECK(t.nodes[1].size == 1);
  CHECK(t.nodes[2].size == 1);
  CHECK(path_length(t, Vector{0.0}) == 1.0);
  CHECK(f.height_limit == 1);
}

TEST_CASE("identical points give single-node trees") {
  const Points x(9, Vector{2.0, -1.0});
  const auto f = fit_iforest(x, {25, 256, 1}, Rng(1));
  for (const auto& t : f.trees) {
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].size == 9);
    CHECK(path_length(t, Vector{5.0, 5.0}) == doctest::Approx(average_path_length(9)));
  }
}

TEST_CASE("forest parameters and determinism") {
  Rng rng(3);
  const auto x = oracle::random_points(rng, 300, 4);
  const auto f = fit_iforest(x, {}, Rng(5));
  CHECK(f.n_trees == 100);
  CHECK(f.subsample_size == 256);
  CHECK(f.height_limit == 8);
  CHECK(f.train_n == 300);
  CHECK(f == fit_iforest(x, {}, Rng(5)));
  CHECK_FALSE(f == fit_iforest(x, {}, Rng(6)));

  const auto small = fit_iforest(Points(x.begin(), x.begin() + 19), {}, Rng(5));
  CHECK(small.subsample_size == 19);
  CHECK(small.height_limit == 5);

  CHECK_THROWS_AS(fit_iforest(Points{{1.0}}, {}, Rng(1)), Error);
  CHECK_THROWS_AS(path_length(f.trees[0], Vector{1.0}), Error);
}

TEST_CASE("forest does not depend on the thread count") {
  Rng rng(14);
  const auto x = oracle::random_points(rng, 40, 6);
  const auto one = fit_iforest(x, {100, 256, 1}, Rng(2));
  CHECK(one == fit_iforest(x, {100, 256, 4}, Rng(2)));
  CHECK(one == fit_iforest(x, {100, 256, 13}, Rng(2)));
}

TEST_CASE("tree invariants on random data") {
  Rng rng(55);
  for (int t = 0; t < 30; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(2, 60));
    auto x = oracle::random_points(rng, n, 3);
    for (auto& p : x) p[1] = 4.0;  // constant feature never splits
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    Rng tree_rng(static_cast<std::uint64_t>(t));
    const std::size_t limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
    const auto tree = build_tree(x, all, limit, tree_rng);
    check_tree(tree, x, limit);
    for (const auto& nd : tree.nodes) CHECK(nd.feature != 1);
  }
}

TEST_CASE("path length equals an independent traversal") {
  Rng rng(60);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::random_points(rng, 16, 2);
    const auto f = fit_iforest(x, {1, 256, 1}, rng.split(static_cast<std::uint64_t>(t)));
    const Vector q{rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
    CHECK(path_length(f.trees[0], q) == oracle::path_length(f.trees[0], q));
  }
}

TEST_CASE("score anchors") {
  for (std::size_t psi : {2u, 10u, 256u}) {
    const double c = average_path_length(psi);
    CHECK(std::abs(score_from_path(c, psi) - 0.5) <= 1e-12);
    CHECK(score_from_path(0.0, psi) == 1.0);
    CHECK(score_from_path(1e3 * c, psi) < 1e-100);
  }
  double prev = 2.0;
  for (double h = 0.0; h < 20.0; h += 0.25) {
    const double s = score_from_path(h, 64);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("scores lie in (0, 1]") {
  Rng rng(70);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(2, 30));
    const auto x = oracle::random_points(rng, n, 2);
    const auto f = fit_iforest(x, {10, 256, 1}, rng.split(static_cast<std::uint64_t>(t)));
    for (int q = 0; q < 5; ++q) {
      const double s = anomaly_score(f, Vector{rng.normal(0, 5), rng.normal(0, 5)});
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("decide") {
  const std::vector<double> s{0.1, 0.2, 0.9, 0.95};
  const auto d = decide(s, 0.5);
  CHECK(d.decisions == std::vector<Label>{Label::Routine, Label::Routine, Label::NonRoutine,
                                         Label::NonRoutine});
  CHECK(d.threshold == 0.9);

  const auto all = decide(std::vector<double>(5, 0.4), 0.3);
  CHECK(all.flagged() == 5);

  for (std::size_t n = 1; n <= 40; ++n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>((i * 7) % n);
    for (double c : {0.1, 0.2, 0.3, 0.5}) {
      const auto o = decide(v, c);
      for (std::size_t i = 0; i < n; ++i)
        CHECK((o.decisions[i] == Label::NonRoutine) == (v[i] >= o.threshold));
      CHECK(o.flagged() >= 1);
    }
  }
  CHECK_THROWS_AS(decide(std::vector<double>{}, 0.3), Error);
  CHECK_THROWS_AS(decide(s, 0.0), Error);
  CHECK_THROWS_AS(decide(s, 0.6), Error);
}

TEST_CASE("far outlier gets the top score") {
  Points x;
  for (int i = 0; i < 10; ++i) x.push_back({0.1 * i});
  x.push_back({10.0});
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = anomaly_scores(fit_iforest(x, {}, Rng(seed)), x);
    wins += std::max_element(s.begin(), s.end()) - s.begin() == 10;
  }
  CHECK(wins >= 95);
}

TEST_CASE("a duplicated inlier barely moves") {
  Rng rng(90);
  for (int t = 0; t < 20; ++t) {
    auto x = oracle::random_points(rng, 20, 3);
    const Rng seed = rng.split(static_cast<std::uint64_t>(t));
    const auto before = anomaly_score(fit_iforest(x, {}, seed), x[0]);
    x.push_back(x[0]);
    const auto after = anomaly_score(fit_iforest(x, {}, seed), x[0]);
    CHECK(std::abs(after - before) <= 0.05);
  }
}

TEST_CASE("planted outliers are flagged exactly") {
  SyntheticConfig cfg;
  cfg.users = {{"u", 20, std::nullopt}};
  cfg.outlier_fraction = 0.2;
  cfg.delta = 0.8;
  const auto ds = generate_synthetic(cfg, 7);
  const auto sigs = build_signatures(ds, FeatureMode::Act, false).at("u");
  Points x;
  for (const auto& s : sigs) x.push_back(s.vector);
  const auto o = detect_iforest(x, {}, 0.2, Rng(7));
  for (std::size_t i = 0; i < sigs.size(); ++i) CHECK(o.decisions[i] == *sigs[i].gt_label);
}

TEST_CASE("forest JSON round trip") {
  Rng rng(4);
  const auto x = oracle::random_points(rng, 30, 3);
  const auto f = fit_iforest(x, {7, 256, 1}, Rng(12));
  const auto doc = to_json(f);
  CHECK(doc.at("format") == "routine-iforest");
  CHECK(doc.at("version") == 1);
  const auto back = iforest_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back == f);
  auto bad = doc;
  bad["version"] = 2;
  CHECK_THROWS_AS(iforest_from_json(bad), Error);
}
