#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "routine/rng.hpp"

namespace routine {

inline constexpr std::size_t kNumActivities = 21;
inline constexpr std::size_t kGlobalDim = 2048;
inline constexpr int kSecondsPerDay = 86400;
inline constexpr std::size_t kNumAnnotators = 6;

enum class Label : std::uint8_t { Routine = 0, NonRoutine = 1 };

const char* to_string(Label label) noexcept;

/// One image's descriptor payload.
struct ImageDescriptor {
  std::int32_t timestamp = 0;  // seconds since midnight
  std::array<double, kNumActivities> activity_probs{};
  std::optional<std::vector<double>> global_feats;

  bool operator==(const ImageDescriptor&) const = default;
};

struct DayRecord {
  std::string user_id;
  std::string day_id;  // YYYY-MM-DD
  std::vector<ImageDescriptor> images;
  std::optional<Label> gt_label;

  bool has_global() const noexcept {
    return !images.empty() && images.front().global_feats.has_value();
  }

  bool operator==(const DayRecord&) const = default;
};

struct AnnotatorVotes {
  std::string day_id;
  std::vector<Label> votes;
};

/// Days of every user. Users are ordered by id, days by day id.
struct StudyDataset {
  std::map<std::string, std::vector<DayRecord>> users;

  std::size_t num_days() const noexcept;
  bool operator==(const StudyDataset&) const = default;
};

/// Throws routine::Error when a record breaks an ImageDescriptor or
/// DayRecord invariant.
void validate(const ImageDescriptor& image, double simplex_tol = 1e-6);
void validate(const DayRecord& day);
void validate(const StudyDataset& ds);

bool is_day_id(std::string_view s) noexcept;

/// Reads `<root>/<user>/<YYYY-MM-DD>.csv` day files plus the optional
/// `<root>/<user>/votes.csv`. Throws ParseError naming file and line.
StudyDataset load_corpus(const std::filesystem::path& root);

/// Inverse of load_corpus. Labelled days get a unanimous votes.csv row.
void write_corpus(const StudyDataset& ds, const std::filesystem::path& root);

/// Majority of six annotators; a 3-3 draw counts as NonRoutine.
Label aggregate_votes(const AnnotatorVotes& votes);

std::vector<AnnotatorVotes> load_votes(const std::filesystem::path& file);

struct SyntheticUser {
  std::string user_id;
  int days = 0;
  /// Overrides the share computed from SyntheticConfig::outlier_fraction.
  std::optional<int> outliers;
};

struct SyntheticConfig {
  std::vector<SyntheticUser> users;
  double outlier_fraction = 0.3;
  int images_min = 20;
  int images_max = 60;
  /// Share of a non-routine day's activity mass moved to activities the
  /// user's prototype never uses. Also scales the global-feature shift.
  double delta = 0.8;
  bool emit_global = false;

  int prototype_support = 6;
  double background = 0.03;
  double day_concentration = 60.0;
  double image_concentration = 5.0;
  double global_day_sd = 0.3;
  double global_image_sd = 1.0;
  std::string start_date = "2018-03-05";

  /// Five users with 14/10/16/19/13 days and 21 of 72 days non-routine.
  static SyntheticConfig table1_fixture();
};

/// Number of planted non-routine days per user, in cfg.users order.
/// Largest-remainder apportionment of round(fraction * total days) unless a
/// user sets an explicit count.
std::vector<int> planned_outliers(const SyntheticConfig& cfg);

StudyDataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace routine
