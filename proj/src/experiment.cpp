#include "routine/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "routine/error.hpp"
#include "routine/version.hpp"

namespace routine {

namespace fs = std::filesystem;

const char* method_id(Method m) noexcept {
  switch (m) {
    case Method::RobustCovariance: return "robust_covariance";
    case Method::OneClassSvm: return "ocsvm";
    case Method::Dbscan: return "dbscan";
    case Method::Spectral: return "spectral";
    case Method::IsolationForest: return "iforest";
  }
  return "?";
}

const char* method_label(Method m) noexcept {
  switch (m) {
    case Method::RobustCovariance: return "Robust covariance";
    case Method::OneClassSvm: return "One-Class SVM";
    case Method::Dbscan: return "DBSCAN";
    case Method::Spectral: return "Spectral Clustering";
    case Method::IsolationForest: return "Isolation Forest";
  }
  return "?";
}

Method parse_method(std::string_view id) {
  for (Method m : kAllMethods)
    if (id == method_id(m)) return m;
  throw ConfigError("unknown method '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::set<std::string> kKnownKeys = {
    "corpus.path",
    "synthetic.days", "synthetic.users", "synthetic.outliers", "synthetic.outlier_fraction",
    "synthetic.images_min", "synthetic.images_max", "synthetic.delta", "synthetic.global",
    "synthetic.seed", "synthetic.prototype_support", "synthetic.background",
    "synthetic.day_concentration", "synthetic.image_concentration", "synthetic.global_day_sd",
    "synthetic.global_image_sd", "synthetic.start_date",
    "run.seed", "run.out", "run.methods", "run.modes", "run.contamination", "run.threads",
    "run.plots",
    "iforest.n_trees", "iforest.max_subsample",
    "ocsvm.nu", "ocsvm.gamma", "ocsvm.tolerance", "ocsvm.max_iterations",
    "dbscan.eps", "dbscan.min_pts",
    "spectral.sigma", "spectral.laplacian",
    "envelope.support_fraction", "envelope.trials", "envelope.max_csteps",
    "standardize.Act", "standardize.Glo", "standardize.ActGlo"};

std::size_t positive(const KeyValueConfig& kv, const std::string& key, std::size_t fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_int(key);
  if (v < 1) throw ConfigError("key '" + key + "' must be at least 1");
  return static_cast<std::size_t>(v);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list_of(const std::vector<std::string>& items, bool quote) {
  std::string s = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ", ";
    s += quote ? "\"" + items[i] + "\"" : items[i];
  }
  return s + "]";
}

}  // namespace

SyntheticConfig parse_synthetic_config(const KeyValueConfig& kv) {
  SyntheticConfig cfg;
  const auto days = kv.get_list("synthetic.days");
  std::vector<std::string> names;
  if (kv.has("synthetic.users")) {
    names = kv.get_list("synthetic.users");
    if (names.size() != days.size())
      throw ConfigError("synthetic.users and synthetic.days differ in length");
  } else {
    for (std::size_t u = 0; u < days.size(); ++u) names.push_back("user" + std::to_string(u + 1));
  }
  std::vector<std::string> outliers;
  if (kv.has("synthetic.outliers")) {
    outliers = kv.get_list("synthetic.outliers");
    if (outliers.size() != days.size())
      throw ConfigError("synthetic.outliers and synthetic.days differ in length");
  }
  for (std::size_t u = 0; u < days.size(); ++u) {
    SyntheticUser user;
    user.user_id = names[u];
    try {
      user.days = std::stoi(days[u]);
      if (!outliers.empty()) user.outliers = std::stoi(outliers[u]);
    } catch (const std::exception&) {
      throw ConfigError("synthetic day/outlier counts must be integers");
    }
    if (user.days < 1) throw ConfigError("synthetic day counts must be positive");
    cfg.users.push_back(user);
  }
  cfg.outlier_fraction = kv.get_double("synthetic.outlier_fraction", cfg.outlier_fraction);
  cfg.images_min = static_cast<int>(kv.get_int("synthetic.images_min", cfg.images_min));
  cfg.images_max = static_cast<int>(kv.get_int("synthetic.images_max", cfg.images_max));
  cfg.delta = kv.get_double("synthetic.delta", cfg.delta);
  cfg.emit_global = kv.get_bool("synthetic.global", true);
  cfg.prototype_support =
      static_cast<int>(kv.get_int("synthetic.prototype_support", cfg.prototype_support));
  cfg.background = kv.get_double("synthetic.background", cfg.background);
  cfg.day_concentration = kv.get_double("synthetic.day_concentration", cfg.day_concentration);
  cfg.image_concentration =
      kv.get_double("synthetic.image_concentration", cfg.image_concentration);
  cfg.global_day_sd = kv.get_double("synthetic.global_day_sd", cfg.global_day_sd);
  cfg.global_image_sd = kv.get_double("synthetic.global_image_sd", cfg.global_image_sd);
  cfg.start_date = kv.get_string("synthetic.start_date", cfg.start_date);
  if (!(cfg.outlier_fraction >= 0.0 && cfg.outlier_fraction <= 0.5))
    throw ConfigError("synthetic.outlier_fraction must lie in [0, 0.5]");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0))
    throw ConfigError("synthetic.delta must lie in (0, 1]");
  if (cfg.images_min < 1 || cfg.images_max < cfg.images_min)
    throw ConfigError("synthetic image range is empty");
  if (!is_day_id(cfg.start_date)) throw ConfigError("synthetic.start_date must be YYYY-MM-DD");
  return cfg;
}

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (modes.empty()) throw ConfigError("at least one feature mode is required");
  if (!(contamination > 0.0 && contamination <= 0.5))
    throw ConfigError("contamination must lie in (0, 0.5]");
  if (corpus_path.has_value() == synthetic.has_value())
    throw ConfigError("exactly one of corpus.path and [synthetic] must be given");
  if (!(ocsvm.nu > 0.0 && ocsvm.nu <= 1.0)) throw ConfigError("ocsvm.nu must lie in (0, 1]");
  if (ocsvm.gamma && !(*ocsvm.gamma > 0.0)) throw ConfigError("ocsvm.gamma must be positive");
  if (dbscan_eps && !(*dbscan_eps > 0.0)) throw ConfigError("dbscan.eps must be positive");
  if (spectral.sigma && !(*spectral.sigma > 0.0))
    throw ConfigError("spectral.sigma must be positive");
  if (!(envelope.support_fraction > 0.5 && envelope.support_fraction <= 1.0))
    throw ConfigError("envelope.support_fraction must lie in (0.5, 1]");
  if (iforest.max_subsample < 2) throw ConfigError("iforest.max_subsample must be at least 2");
}

RunConfig parse_run_config(const KeyValueConfig& kv) {
  for (const auto& [key, _] : kv.raw())
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

  RunConfig cfg;
  if (kv.has("corpus.path")) cfg.corpus_path = kv.get_string("corpus.path");
  if (kv.has("synthetic.days")) {
    cfg.synthetic = parse_synthetic_config(kv);
    if (kv.has("synthetic.seed")) cfg.synthetic_seed = kv.get_uint("synthetic.seed");
  }
  if (kv.has("run.seed")) cfg.seed = kv.get_uint("run.seed");
  if (kv.has("run.out")) cfg.out_dir = kv.get_string("run.out");
  if (kv.has("run.methods")) {
    cfg.methods.clear();
    for (const auto& m : kv.get_list("run.methods")) cfg.methods.push_back(parse_method(m));
  }
  if (kv.has("run.modes")) {
    cfg.modes.clear();
    for (const auto& m : kv.get_list("run.modes")) cfg.modes.push_back(parse_feature_mode(m));
  }
  cfg.contamination = kv.get_double("run.contamination", cfg.contamination);
  cfg.threads = positive(kv, "run.threads", cfg.threads);
  cfg.plots = kv.get_bool("run.plots", cfg.plots);

  cfg.iforest.n_trees = positive(kv, "iforest.n_trees", cfg.iforest.n_trees);
  cfg.iforest.max_subsample = positive(kv, "iforest.max_subsample", cfg.iforest.max_subsample);

  cfg.ocsvm.nu = kv.get_double("ocsvm.nu", cfg.ocsvm.nu);
  if (kv.has("ocsvm.gamma") && kv.get_string("ocsvm.gamma") != "scale")
    cfg.ocsvm.gamma = kv.get_double("ocsvm.gamma");
  cfg.ocsvm.tolerance = kv.get_double("ocsvm.tolerance", cfg.ocsvm.tolerance);
  cfg.ocsvm.max_iterations = positive(kv, "ocsvm.max_iterations", cfg.ocsvm.max_iterations);

  if (kv.has("dbscan.eps") && kv.get_string("dbscan.eps") != "auto")
    cfg.dbscan_eps = kv.get_double("dbscan.eps");
  cfg.dbscan_min_pts = positive(kv, "dbscan.min_pts", cfg.dbscan_min_pts);

  if (kv.has("spectral.sigma") && kv.get_string("spectral.sigma") != "median")
    cfg.spectral.sigma = kv.get_double("spectral.sigma");
  if (kv.has("spectral.laplacian")) {
    const auto l = kv.get_string("spectral.laplacian");
    if (l == "unnormalized") {
      cfg.spectral.laplacian = LaplacianKind::Unnormalized;
    } else if (l == "symmetric") {
      cfg.spectral.laplacian = LaplacianKind::Symmetric;
    } else {
      throw ConfigError("spectral.laplacian must be unnormalized or symmetric");
    }
  }

  cfg.envelope.support_fraction =
      kv.get_double("envelope.support_fraction", cfg.envelope.support_fraction);
  cfg.envelope.trials = positive(kv, "envelope.trials", cfg.envelope.trials);
  cfg.envelope.max_csteps = positive(kv, "envelope.max_csteps", cfg.envelope.max_csteps);

  for (FeatureMode m : kAllModes) {
    const std::string key = std::string("standardize.") + to_string(m);
    cfg.standardize[static_cast<std::size_t>(m)] =
        kv.get_bool(key, cfg.standardize[static_cast<std::size_t>(m)]);
  }
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> echo_config(const RunConfig& cfg) {
  std::map<std::string, std::string> e;
  if (cfg.corpus_path) e["corpus.path"] = "\"" + cfg.corpus_path->generic_string() + "\"";
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    std::vector<std::string> names, days, outliers;
    for (const auto& u : s.users) {
      names.push_back(u.user_id);
      days.push_back(std::to_string(u.days));
    }
    for (int c : planned_outliers(s)) outliers.push_back(std::to_string(c));
    e["synthetic.users"] = list_of(names, true);
    e["synthetic.days"] = list_of(days, false);
    e["synthetic.outliers"] = list_of(outliers, false);
    e["synthetic.outlier_fraction"] = num(s.outlier_fraction);
    e["synthetic.images_min"] = std::to_string(s.images_min);
    e["synthetic.images_max"] = std::to_string(s.images_max);
    e["synthetic.delta"] = num(s.delta);
    e["synthetic.global"] = s.emit_global ? "true" : "false";
    e["synthetic.seed"] = std::to_string(cfg.synthetic_seed.value_or(cfg.seed));
    e["synthetic.prototype_support"] = std::to_string(s.prototype_support);
    e["synthetic.background"] = num(s.background);
    e["synthetic.day_concentration"] = num(s.day_concentration);
    e["synthetic.image_concentration"] = num(s.image_concentration);
    e["synthetic.global_day_sd"] = num(s.global_day_sd);
    e["synthetic.global_image_sd"] = num(s.global_image_sd);
    e["synthetic.start_date"] = "\"" + s.start_date + "\"";
  }
  std::vector<std::string> methods, modes;
  for (Method m : cfg.methods) methods.push_back(method_id(m));
  for (FeatureMode m : cfg.modes) modes.push_back(to_string(m));
  e["run.seed"] = std::to_string(cfg.seed);
  e["run.methods"] = list_of(methods, true);
  e["run.modes"] = list_of(modes, true);
  e["run.contamination"] = num(cfg.contamination);
  e["run.plots"] = cfg.plots ? "true" : "false";
  e["iforest.n_trees"] = std::to_string(cfg.iforest.n_trees);
  e["iforest.max_subsample"] = std::to_string(cfg.iforest.max_subsample);
  e["ocsvm.nu"] = num(cfg.ocsvm.nu);
  e["ocsvm.gamma"] = cfg.ocsvm.gamma ? num(*cfg.ocsvm.gamma) : "\"scale\"";
  e["ocsvm.tolerance"] = num(cfg.ocsvm.tolerance);
  e["ocsvm.max_iterations"] = std::to_string(cfg.ocsvm.max_iterations);
  e["dbscan.eps"] = cfg.dbscan_eps ? num(*cfg.dbscan_eps) : "\"auto\"";
  e["dbscan.min_pts"] = std::to_string(cfg.dbscan_min_pts);
  e["spectral.sigma"] = cfg.spectral.sigma ? num(*cfg.spectral.sigma) : "\"median\"";
  e["spectral.laplacian"] = cfg.spectral.laplacian == LaplacianKind::Unnormalized
                                ? "\"unnormalized\""
                                : "\"symmetric\"";
  e["envelope.support_fraction"] = num(cfg.envelope.support_fraction);
  e["envelope.trials"] = std::to_string(cfg.envelope.trials);
  e["envelope.max_csteps"] = std::to_string(cfg.envelope.max_csteps);
  for (FeatureMode m : kAllModes)
    e[std::string("standardize.") + to_string(m)] = cfg.standardize_mode(m) ? "true" : "false";
  return e;
}

StudyDataset load_or_generate(const RunConfig& cfg) {
  if (cfg.corpus_path) return load_corpus(*cfg.corpus_path);
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, cfg.synthetic_seed.value_or(cfg.seed));
  throw ConfigError("no corpus source configured");
}

// ---------------------------------------------------------------------------
// Running

bool RunManifest::any_failed() const noexcept {
  return std::any_of(cells.begin(), cells.end(), [](const auto& c) { return !c.ok; });
}

const CellOutcome* RunManifest::find(const std::string& user, Method m, FeatureMode mode) const {
  for (const auto& c : cells)
    if (c.user == user && c.method == m && c.mode == mode) return &c;
  return nullptr;
}

const SummaryRow* RunManifest::summary_for(Method m, FeatureMode mode) const {
  for (const auto& r : summary)
    if (r.method == m && r.mode == mode) return &r;
  return nullptr;
}

Rng cell_rng(std::uint64_t master, const std::string& user, Method m, FeatureMode mode) {
  return Rng(master).split(user).split(method_id(m)).split(to_string(mode));
}

DetectionOutcome run_method(Method method, std::span<const DaySignature> days,
                            const RunConfig& cfg, Rng rng) {
  Points x;
  x.reserve(days.size());
  for (const auto& d : days) x.push_back(d.vector);
  switch (method) {
    case Method::IsolationForest:
      return detect_iforest(x, cfg.iforest, cfg.contamination, rng);
    case Method::RobustCovariance:
      return detect_envelope(reduce_for_covariance(x), cfg.envelope, cfg.contamination, rng);
    case Method::OneClassSvm:
      return detect_ocsvm(x, cfg.ocsvm);
    case Method::Dbscan: {
      const SymMatrix dist = pairwise_euclidean(x);
      const double eps =
          cfg.dbscan_eps ? *cfg.dbscan_eps : dbscan_default_eps(dist, cfg.dbscan_min_pts);
      return dbscan(dist, {eps, cfg.dbscan_min_pts}).outcome;
    }
    case Method::Spectral:
      return spectral_cluster(reduce_for_covariance(x), cfg.spectral, rng).outcome;
  }
  throw Error("unknown method");
}

RunManifest run_experiments(const RunConfig& cfg, const StudyDataset& ds) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config = echo_config(cfg);

  for (const auto& [user, days] : ds.users) {
    manifest.users.push_back(make_histograms(user, days));
    manifest.user_plots.push_back(cfg.plots ? "plots/" + user + "_activities.svg" : "");
  }

  // Signatures per mode and user; a failure poisons that mode's cells only.
  struct ModeSigs {
    UserSignatures sigs;
    std::map<std::string, std::string> errors;
  };
  std::vector<ModeSigs> by_mode(kAllModes.size());
  for (FeatureMode mode : cfg.modes) {
    auto& slot = by_mode[static_cast<std::size_t>(mode)];
    for (const auto& [user, days] : ds.users) {
      try {
        auto one = build_signatures(StudyDataset{{{user, days}}}, mode, cfg.standardize_mode(mode));
        slot.sigs[user] = std::move(one[user]);
      } catch (const std::exception& e) {
        slot.errors[user] = e.what();
      }
    }
  }

  for (const auto& [user, _] : ds.users)
    for (Method m : cfg.methods)
      for (FeatureMode mode : cfg.modes) {
        CellOutcome c;
        c.user = user;
        c.method = m;
        c.mode = mode;
        manifest.cells.push_back(std::move(c));
      }

  auto run_cell = [&](CellOutcome& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& slot = by_mode[static_cast<std::size_t>(cell.mode)];
    try {
      if (auto it = slot.errors.find(cell.user); it != slot.errors.end())
        throw Error(it->second);
      const auto& days = slot.sigs.at(cell.user);
      cell.outcome = run_method(cell.method, days, cfg,
                                cell_rng(cfg.seed, cell.user, cell.method, cell.mode));
      std::vector<Label> truth;
      for (const auto& d : days)
        if (d.gt_label) truth.push_back(*d.gt_label);
      if (truth.size() == days.size()) cell.report = evaluate(truth, cell.outcome.decisions);
      if (cfg.plots && days.size() >= 2) {
        cell.scatter = make_scatter(cell.user, method_label(cell.method), to_string(cell.mode),
                                    days, cell.outcome);
        cell.plot = "plots/" + cell.user + "_pca_" + method_id(cell.method) + "_" +
                    to_string(cell.mode) + ".svg";
      }
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.reason = e.what();
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                       .count();
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, manifest.cells.size());
  if (workers <= 1) {
    for (auto& c : manifest.cells) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < manifest.cells.size(); i = next++) run_cell(manifest.cells[i]);
      });
  }

  for (Method m : cfg.methods)
    for (FeatureMode mode : cfg.modes) {
      SummaryRow row{m, mode, 0, {}};
      for (const auto& c : manifest.cells) {
        if (c.method != m || c.mode != mode || !c.ok || !c.report) continue;
        const auto& r = *c.report;
        const double w = static_cast<double>(r.total);
        const std::array<double, 7> v = {r.accuracy,        r.weighted.f_score, r.weighted.precision,
                                         r.weighted.recall, r.macro.f_score,    r.macro.precision,
                                         r.macro.recall};
        for (std::size_t k = 0; k < 7; ++k) row.values[k] += w * v[k];
        row.days += r.total;
      }
      if (row.days > 0)
        for (double& v : row.values) v /= static_cast<double>(row.days);
      manifest.summary.push_back(row);
    }
  manifest.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return manifest;
}

std::string results_csv(const RunManifest& manifest) {
  std::string out = kResultsHeader;
  out += '\n';
  char buf[64];
  for (const auto& row : manifest.summary) {
    out += method_label(row.method);
    out += ',';
    out += to_string(row.mode);
    for (double v : row.values) {
      out += ',';
      if (row.days > 0) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json labels_json(const std::vector<Label>& labels) {
  nlohmann::json a = nlohmann::json::array();
  for (Label l : labels) a.push_back(to_string(l));
  return a;
}

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f_score", m.f_score},
          {"support", m.support}};
}

std::optional<Label> label_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>() == "R" ? Label::Routine : Label::NonRoutine;
}

}  // namespace

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json doc;
  doc["tool"] = "routine-discovery";
  doc["version"] = kVersion;
  doc["config"] = m.config;

  std::vector<std::string> artifacts{"results.csv"};
  nlohmann::json users = nlohmann::json::array();
  for (std::size_t u = 0; u < m.users.size(); ++u) {
    const auto& h = m.users[u];
    nlohmann::json days = nlohmann::json::array();
    for (std::size_t d = 0; d < h.day_ids.size(); ++d) {
      nlohmann::json hist = nlohmann::json::array();
      for (double v : h.histograms[d]) hist.push_back(v);
      days.push_back({{"day", h.day_ids[d]},
                      {"label", h.truth[d] ? nlohmann::json(to_string(*h.truth[d])) : nullptr},
                      {"activity_histogram", hist}});
    }
    users.push_back({{"user", h.user}, {"plot", m.user_plots[u]}, {"days", days}});
    if (!m.user_plots[u].empty()) artifacts.push_back(m.user_plots[u]);
  }
  doc["users"] = users;

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : m.cells) {
    nlohmann::json j{{"user", c.user},
                     {"method", method_id(c.method)},
                     {"mode", to_string(c.mode)},
                     {"status", c.ok ? "ok" : "failed"},
                     {"wall_ms", c.wall_ms}};
    if (!c.ok) j["reason"] = c.reason;
    if (c.ok) {
      j["threshold"] = c.outcome.threshold;
      j["scores"] = c.outcome.scores;
      j["decisions"] = labels_json(c.outcome.decisions);
    }
    if (c.report) {
      const auto& r = *c.report;
      j["metrics"] = {{"accuracy", r.accuracy},
                      {"routine", class_json(r.routine)},
                      {"non_routine", class_json(r.non_routine)},
                      {"macro", class_json(r.macro)},
                      {"weighted", class_json(r.weighted)}};
    }
    if (c.scatter) {
      j["pca"] = {{"coords", c.scatter->coords}, {"explained", c.scatter->explained}};
      j["plot"] = c.plot;
      artifacts.push_back(c.plot);
    }
    cells.push_back(std::move(j));
  }
  doc["cells"] = cells;

  nlohmann::json summary = nlohmann::json::array();
  static const char* kCols[] = {"Acc", "wF", "wP", "wR", "mF", "mP", "mR"};
  for (const auto& r : m.summary) {
    nlohmann::json j{{"method", method_id(r.method)}, {"mode", to_string(r.mode)}, {"days", r.days}};
    for (std::size_t k = 0; k < 7; ++k) j[kCols[k]] = r.values[k];
    summary.push_back(std::move(j));
  }
  doc["summary"] = summary;
  doc["artifacts"] = artifacts;
  doc["failed_cells"] = std::count_if(m.cells.begin(), m.cells.end(), [](auto& c) { return !c.ok; });
  doc["wall_ms"] = m.wall_ms;
  return doc;
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw Error("failed writing " + p.string());
}

}  // namespace

void write_run(const RunManifest& manifest, const fs::path& out) {
  fs::create_directories(out);
  fs::remove_all(out / "plots");
  write_file(out / "results.csv", results_csv(manifest));
  for (std::size_t u = 0; u < manifest.users.size(); ++u)
    if (!manifest.user_plots[u].empty())
      write_file(out / manifest.user_plots[u], activity_svg(manifest.users[u]));
  for (const auto& c : manifest.cells)
    if (c.scatter) write_file(out / c.plot, scatter_svg(*c.scatter));
  write_file(out / "manifest.json", manifest_to_json(manifest).dump(1) + "\n");
}

std::size_t render_report(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw Error("no manifest.json in " + dir.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }

  std::size_t written = 0;
  std::map<std::string, HistogramData> users;
  try {
    for (const auto& ju : doc.at("users")) {
      HistogramData h;
      h.user = ju.at("user").get<std::string>();
      for (const auto& jd : ju.at("days")) {
        h.day_ids.push_back(jd.at("day").get<std::string>());
        h.truth.push_back(label_from(jd.at("label")));
        std::array<double, kNumActivities> hist{};
        const auto& jh = jd.at("activity_histogram");
        if (jh.size() != kNumActivities) throw Error("histogram has wrong length");
        for (std::size_t a = 0; a < kNumActivities; ++a) hist[a] = jh.at(a).get<double>();
        h.histograms.push_back(hist);
      }
      const auto plot = ju.at("plot").get<std::string>();
      if (!plot.empty()) {
        write_file(dir / plot, activity_svg(h));
        ++written;
      }
      users[h.user] = std::move(h);
    }
    for (const auto& jc : doc.at("cells")) {
      if (!jc.contains("pca")) continue;
      const auto& h = users.at(jc.at("user").get<std::string>());
      ScatterData s;
      s.user = h.user;
      s.method = method_label(parse_method(jc.at("method").get<std::string>()));
      s.mode = jc.at("mode").get<std::string>();
      s.day_ids = h.day_ids;
      s.truth = h.truth;
      s.coords = jc.at("pca").at("coords").get<Points>();
      s.explained = jc.at("pca").at("explained").get<Vector>();
      for (const auto& d : jc.at("decisions"))
        s.predicted.push_back(d.get<std::string>() == "R" ? Label::Routine : Label::NonRoutine);
      if (s.coords.size() != s.day_ids.size() || s.predicted.size() != s.day_ids.size())
        throw Error("cell does not match its user's days");
      write_file(dir / jc.at("plot").get<std::string>(), scatter_svg(s));
      ++written;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  return written;
}

}  // namespace routine
