// Acceptance checks: one PASS/FAIL line per criterion.
//
//   acceptance <routine-discovery binary> <fixture.toml>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "../unit/tmpdir.hpp"
#include "routine/baselines.hpp"
#include "routine/error.hpp"
#include "routine/eval.hpp"
#include "routine/experiment.hpp"
#include "routine/iforest.hpp"

using namespace routine;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s [%d] %s: %s (%.2fs)\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str(), s);
  std::fflush(stdout);
  failures += !v.pass;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig fixture(const fs::path& file, std::uint64_t seed) {
  auto kv = KeyValueConfig::load(file);
  kv.set("run.seed", std::to_string(seed));
  return parse_run_config(kv);
}

Verdict c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double want2 = 0.1544313298;
  const double want256 = 2.0 * (std::log(255.0) + 0.5772156649) - 2.0 * 255.0 / 256.0;
  const double c2 = average_path_length(2), c256 = average_path_length(256);
  bool ok = std::abs(c2 - want2) <= 1e-9 && std::abs(c256 - want256) <= 1e-9 &&
            std::abs(c256 - 10.2445) < 5e-4;
  std::size_t first_bad = 0;
  for (std::size_t n = 3; n <= 10000 && !first_bad; ++n)
    if (!(average_path_length(n) > average_path_length(n - 1))) first_bad = n;
  ok = ok && first_bad == 0;
  const double s = seconds_since(t0);
  ok = ok && s < 1.0;
  return {ok, fmt("c(2)=%.10f c(256)=%.10f, increasing to 1e4", c2, c256) +
                  (first_bad ? " broken at " + std::to_string(first_bad) : "")};
}

Verdict c2() {
  double worst_anchor = 0.0;
  for (std::size_t psi = 2; psi <= 256; ++psi)
    worst_anchor = std::max(worst_anchor,
                            std::abs(score_from_path(average_path_length(psi), psi) - 0.5));
  Rng rng(2);
  std::size_t queries = 0, outside = 0;
  for (int fit = 0; fit < 1000; ++fit) {
    const auto n = static_cast<std::size_t>(rng.between(2, 40));
    const auto d = static_cast<std::size_t>(rng.between(1, 5));
    const auto x = oracle::random_points(rng, n, d);
    const auto forest = fit_iforest(x, {10, 256, 1}, rng.split(static_cast<std::uint64_t>(fit)));
    for (int q = 0; q < 10; ++q) {
      Vector v(d);
      for (double& e : v) e = rng.normal(0.0, 3.0);
      const double s = anomaly_score(forest, v);
      outside += !(s > 0.0 && s <= 1.0);
      ++queries;
    }
  }
  return {worst_anchor <= 1e-12 && outside == 0,
          fmt("max |s(c(psi)) - 0.5| = %.2e; %.0f of %.0f scores outside (0,1]", worst_anchor,
              static_cast<double>(outside), static_cast<double>(queries))};
}

Verdict c3(const fs::path& config) {
  const auto t0 = std::chrono::steady_clock::now();
  std::array<std::vector<double>, 3> acc;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = fixture(config, seed);
    cfg.methods = {Method::IsolationForest};
    cfg.plots = false;
    const auto m = run_experiments(cfg, load_or_generate(cfg));
    if (m.any_failed()) return {false, "cell failure at seed " + std::to_string(seed)};
    for (FeatureMode mode : kAllModes)
      acc[static_cast<std::size_t>(mode)].push_back(
          m.summary_for(Method::IsolationForest, mode)->values[0]);
  }
  const double s = seconds_since(t0);
  bool ok = s < 30.0;
  std::string detail;
  for (FeatureMode mode : kAllModes) {
    const auto& a = acc[static_cast<std::size_t>(mode)];
    double mean = 0.0;
    for (double v : a) mean += v / static_cast<double>(a.size());
    const auto above = std::count_if(a.begin(), a.end(), [](double v) { return v >= 0.76; });
    ok = ok && mean >= 0.85 && above >= 15;
    detail += std::string(to_string(mode)) + fmt(" mean %.4f, %.0f/20 >= 0.76; ", mean,
                                                 static_cast<double>(above));
  }
  return {ok, detail + fmt("%.1fs for 20 seeds", s)};
}

Verdict c4(const fs::path& config) {
  const auto cfg = fixture(config, 7);
  const auto m = run_experiments(cfg, load_or_generate(cfg));
  bool ok = !m.any_failed();
  std::string detail;
  for (FeatureMode mode : cfg.modes) {
    const double iforest = m.summary_for(Method::IsolationForest, mode)->values[0];
    double best = 0.0;
    const char* best_name = "";
    for (Method b : cfg.methods) {
      if (b == Method::IsolationForest) continue;
      const double v = m.summary_for(b, mode)->values[0];
      if (v > best) best = v, best_name = method_id(b);
    }
    ok = ok && iforest >= best;
    detail += std::string(to_string(mode)) + fmt(" IF %.4f vs best baseline %.4f", iforest, best) +
              " (" + best_name + "); ";
  }
  return {ok, detail};
}

Verdict c5() {
  Rng rng(5);
  int dbscan_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(1, 40));
    const auto x = oracle::random_points(rng, n, static_cast<std::size_t>(rng.between(1, 4)));
    const double eps = rng.uniform(0.05, 2.0);
    const auto min_pts = static_cast<std::size_t>(rng.between(1, 8));
    const auto got = dbscan(x, {eps, min_pts});
    dbscan_bad += !oracle::same_partition(got.cluster, oracle::dbscan(oracle::distances(x), eps, min_pts));
  }
  int eval_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(1, 100));
    std::vector<Label> gt, pred;
    for (std::size_t i = 0; i < n; ++i) {
      gt.push_back(rng.below(3) ? Label::Routine : Label::NonRoutine);
      pred.push_back(rng.below(3) ? Label::Routine : Label::NonRoutine);
    }
    const auto r = evaluate(gt, pred);
    std::size_t tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0}, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto g = static_cast<std::size_t>(gt[i]), p = static_cast<std::size_t>(pred[i]);
      if (g == p) ++tp[g], ++correct;
      else ++fp[p], ++fn[g];
    }
    auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
    bool same = r.accuracy == ratio(correct, n);
    for (Label cls : {Label::Routine, Label::NonRoutine}) {
      const auto c = static_cast<std::size_t>(cls);
      const double p = ratio(tp[c], tp[c] + fp[c]), q = ratio(tp[c], tp[c] + fn[c]);
      const double f = p + q > 0 ? 2.0 * (p * q / (p + q)) : 0.0;
      same = same && r.of(cls).precision == p && r.of(cls).recall == q && r.of(cls).f_score == f;
    }
    eval_bad += !same;
  }
  int path_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(2, 64));
    const auto x = oracle::random_points(rng, n, 3);
    const auto f = fit_iforest(x, {1, 256, 1}, rng.split(static_cast<std::uint64_t>(t)));
    const Vector q{rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 2)};
    path_bad += path_length(f.trees[0], q) != oracle::path_length(f.trees[0], q);
  }
  return {dbscan_bad == 0 && eval_bad == 0 && path_bad == 0,
          fmt("mismatches: dbscan %.0f/200, eval %.0f/1000", dbscan_bad, eval_bad) +
              fmt(", path length %.0f/100", path_bad)};
}

Verdict c6() {
  Rng rng(6);
  double worst_res = 0.0, worst_orth = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(1, 64));
    const auto m = oracle::random_symmetric(rng, n);
    const auto e = sym_eigen(m, n);
    const double scale = std::max(1.0, m.matrix().norm_inf());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += m(r, c) * e[i].vector[c];
        worst_res = std::max(worst_res, std::abs(s - e[i].value * e[i].vector[r]) / scale);
      }
      for (std::size_t j = 0; j <= i; ++j) {
        double d = 0.0;
        for (std::size_t r = 0; r < n; ++r) d += e[i].vector[r] * e[j].vector[r];
        worst_orth = std::max(worst_orth, std::abs(d - (i == j ? 1.0 : 0.0)));
      }
    }
  }
  double min_lap = INFINITY;
  for (int t = 0; t < 50; ++t) {
    const auto x = oracle::random_points(rng, static_cast<std::size_t>(rng.between(3, 40)), 3);
    const auto w = gaussian_affinity(pairwise_euclidean(x), rng.uniform(0.1, 3.0));
    for (auto kind : {LaplacianKind::Unnormalized, LaplacianKind::Symmetric})
      min_lap = std::min(min_lap, sym_eigen(graph_laplacian(w, kind), 1)[0].value);
  }
  int kmeans_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(2, 80));
    const auto x = oracle::random_points(rng, n, 2);
    const auto k = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(std::min<std::size_t>(n, 5))));
    const auto r = kmeans(x, k, rng);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i)
      kmeans_bad += r.objective_history[i] > r.objective_history[i - 1];
  }
  double worst_var = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_points(rng, 20, 21);
    const auto p = pca_project(x, 2);
    Matrix cov(21, 21);
    for (std::size_t a = 0; a < 21; ++a)
      for (std::size_t b = 0; b < 21; ++b) {
        double s = 0.0;
        for (const auto& r : x) s += (r[a] - p.mean[a]) * (r[b] - p.mean[b]);
        cov(a, b) = s / 19.0;
      }
    for (std::size_t a = 0; a < 21; ++a)
      for (std::size_t b = 0; b < a; ++b) cov(a, b) = cov(b, a);
    const auto ev = oracle::eigenvalues_by_bisection(SymMatrix(cov));
    for (std::size_t c = 0; c < 2; ++c) {
      double v = 0.0;
      for (const auto& r : p.coords) v += r[c] * r[c] / 19.0;
      worst_var = std::max(worst_var, std::abs(v - ev[20 - c]));
    }
  }
  const bool ok = worst_res <= 1e-8 && worst_orth <= 1e-8 && min_lap >= -1e-8 &&
                  kmeans_bad == 0 && worst_var <= 1e-8;
  return {ok, fmt("residual %.1e, orthogonality %.1e, min Laplacian eigenvalue %.1e", worst_res,
                  worst_orth, min_lap) +
                  fmt(", k-means increases %.0f, PCA variance error %.1e", kmeans_bad, worst_var)};
}

Verdict c7() {
  Rng rng(7);
  int nu_bad = 0;
  double worst_excess = -INFINITY;
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(10, 80));
    const auto x = oracle::random_points(rng, n, static_cast<std::size_t>(rng.between(1, 8)));
    const double nu = rng.uniform(0.05, 0.6);
    const auto o = detect_ocsvm(x, {nu, std::nullopt, 1e-6, 100000});
    const double frac = static_cast<double>(o.flagged()) / static_cast<double>(n);
    worst_excess = std::max(worst_excess, frac - (nu + 2.0 / static_cast<double>(n)));
    nu_bad += frac > nu + 2.0 / static_cast<double>(n);
  }
  // fit_envelope throws on any determinant increase; count fits that did.
  int mcd_fits = 0, mcd_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.between(6, 50));
    const auto d = static_cast<std::size_t>(rng.between(1, std::min<std::int64_t>(5, static_cast<std::int64_t>(n) - 2)));
    const auto x = oracle::random_points(rng, n, d);
    try {
      const auto m = fit_envelope(x, {}, rng);
      for (std::size_t i = 1; i < m.log_det_history.size(); ++i)
        mcd_bad += m.log_det_history[i] > m.log_det_history[i - 1] + 1e-9 * std::max(1.0, std::abs(m.log_det_history[i - 1]));
    } catch (const Error&) {
      ++mcd_bad;
    }
    ++mcd_fits;
  }
  return {nu_bad == 0 && mcd_bad == 0,
          fmt("nu-property violations %.0f/20 (worst margin %.3f); ", nu_bad, worst_excess) +
              fmt("MCD determinant increases in %.0f of %.0f fits", mcd_bad, mcd_fits)};
}

Verdict c8(const std::string& cli, const fs::path& config) {
  TempDir a, b;
  auto run = [&](const fs::path& out) {
    const std::string cmd = "\"" + cli + "\" run --config \"" + config.string() + "\" --seed 7 --out \"" +
                            out.string() + "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  if (run(a.path()) != 0 || run(b.path()) != 0) return {false, "CLI run failed"};
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a.path());
    if (rel == "manifest.json") continue;
    ++files;
    differ += read_text(e.path()) != read_text(b.path() / rel);
  }
  const bool has_csv = fs::exists(a.path() / "results.csv");
  return {has_csv && files > 1 && differ == 0,
          fmt("%.0f files compared (results.csv + SVGs), %.0f differ", static_cast<double>(files),
              static_cast<double>(differ))};
}

Verdict c9() {
  // Vote rows: agreement level, routine-majority count, non-routine count.
  struct Level {
    int agree, routine, non_routine;
  };
  const Level levels[] = {{6, 28, 6}, {5, 16, 5}, {4, 7, 4}};
  TempDir tmp;
  std::string text = "day,v1,v2,v3,v4,v5,v6\n";
  int day = 0;
  auto add = [&](int r_votes) {
    char id[32];
    std::snprintf(id, sizeof id, "2018-%02d-%02d", 1 + day / 28, 1 + day % 28);
    ++day;
    text += id;
    for (int v = 0; v < 6; ++v) text += v < r_votes ? ",R" : ",N";
    text += "\n";
  };
  for (const auto& l : levels) {
    for (int i = 0; i < l.routine; ++i) add(l.agree);
    for (int i = 0; i < l.non_routine; ++i) add(6 - l.agree);
  }
  for (int i = 0; i < 6; ++i) add(3);
  write_text(tmp.path() / "votes.csv", text);
  int r = 0, n = 0;
  for (const auto& v : load_votes(tmp.path() / "votes.csv"))
    (aggregate_votes(v) == Label::Routine ? r : n)++;
  return {r == 51 && n == 21 && day == 72, fmt("%.0f Routine / %.0f NonRoutine from %.0f days", r, n, day)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <routine-discovery> <fixture.toml>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path config = argv[2];
  report(1, "average path length values and monotonicity", c1);
  report(2, "anomaly score anchor and range", c2);
  report(3, "planted-outlier recovery over 20 seeds", [&] { return c3(config); });
  report(4, "isolation forest ranks first on the fixture", [&] { return c4(config); });
  report(5, "oracle equivalence", c5);
  report(6, "numerical kernels", c6);
  report(7, "solver properties", c7);
  report(8, "byte-identical reruns", [&] { return c8(cli, config); });
  report(9, "ground-truth vote rule", c9);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
