#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "routine/baselines.hpp"
#include "routine/config.hpp"
#include "routine/dataset.hpp"
#include "routine/daysig.hpp"
#include "routine/detection.hpp"
#include "routine/eval.hpp"
#include "routine/iforest.hpp"
#include "routine/plots.hpp"

namespace routine {

enum class Method { RobustCovariance, OneClassSvm, Dbscan, Spectral, IsolationForest };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::RobustCovariance, Method::OneClassSvm, Method::Dbscan, Method::Spectral,
    Method::IsolationForest};
inline constexpr std::array<FeatureMode, 3> kAllModes = {FeatureMode::Act, FeatureMode::Glo,
                                                         FeatureMode::ActGlo};

/// Config id (`iforest`, `robust_covariance`, `ocsvm`, `dbscan`, `spectral`).
const char* method_id(Method m) noexcept;
/// Name used in results.csv.
const char* method_label(Method m) noexcept;
Method parse_method(std::string_view id);

struct RunConfig {
  std::optional<std::filesystem::path> corpus_path;
  std::optional<SyntheticConfig> synthetic;
  std::optional<std::uint64_t> synthetic_seed;  // defaults to `seed`

  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<FeatureMode> modes{kAllModes.begin(), kAllModes.end()};
  std::array<bool, 3> standardize{default_standardize(FeatureMode::Act),
                                  default_standardize(FeatureMode::Glo),
                                  default_standardize(FeatureMode::ActGlo)};
  double contamination = 0.3;
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "out";
  std::size_t threads = 1;
  bool plots = true;

  IForestParams iforest;
  OcsvmParams ocsvm;
  std::optional<double> dbscan_eps;  // nullopt: k-distance heuristic
  std::size_t dbscan_min_pts = 3;
  SpectralParams spectral;
  EnvelopeParams envelope;

  bool standardize_mode(FeatureMode m) const noexcept {
    return standardize[static_cast<std::size_t>(m)];
  }
  void validate() const;
};

/// Reads every recognised key; unknown keys are a ConfigError.
RunConfig parse_run_config(const KeyValueConfig& kv);

/// Canonical key=value echo of a RunConfig (written into the manifest).
std::map<std::string, std::string> echo_config(const RunConfig& cfg);

SyntheticConfig parse_synthetic_config(const KeyValueConfig& kv);

StudyDataset load_or_generate(const RunConfig& cfg);

struct CellOutcome {
  std::string user;
  Method method = Method::IsolationForest;
  FeatureMode mode = FeatureMode::Act;
  bool ok = false;
  std::string reason;
  DetectionOutcome outcome;
  std::optional<EvalReport> report;
  std::optional<ScatterData> scatter;
  std::string plot;  // relative path, empty when no plot
  double wall_ms = 0.0;
};

struct SummaryRow {
  Method method = Method::IsolationForest;
  FeatureMode mode = FeatureMode::Act;
  std::size_t days = 0;  // evaluated days
  // Day-count-weighted means over users: Acc, wF, wP, wR, mF, mP, mR.
  std::array<double, 7> values{};
};

struct RunManifest {
  std::map<std::string, std::string> config;
  std::vector<HistogramData> users;
  std::vector<std::string> user_plots;
  std::vector<CellOutcome> cells;
  std::vector<SummaryRow> summary;
  double wall_ms = 0.0;

  bool any_failed() const noexcept;
  const CellOutcome* find(const std::string& user, Method m, FeatureMode mode) const;
  const SummaryRow* summary_for(Method m, FeatureMode mode) const;
};

/// Seed of one (user, method, mode) cell.
Rng cell_rng(std::uint64_t master, const std::string& user, Method m, FeatureMode mode);

/// Runs one detector on one user's signatures.
DetectionOutcome run_method(Method method, std::span<const DaySignature> days,
                            const RunConfig& cfg, Rng rng);

/// The full users x methods x modes matrix. Cell failures are recorded, not
/// thrown.
RunManifest run_experiments(const RunConfig& cfg, const StudyDataset& ds);

std::string results_csv(const RunManifest& manifest);
nlohmann::json manifest_to_json(const RunManifest& manifest);

/// Writes results.csv, manifest.json and plots/ under `out`. Any previous
/// plots/ directory is replaced.
void write_run(const RunManifest& manifest, const std::filesystem::path& out);

/// Redraws every plot listed in `<dir>/manifest.json` into `<dir>/plots`.
/// Returns the number of files written.
std::size_t render_report(const std::filesystem::path& dir);

}  // namespace routine
