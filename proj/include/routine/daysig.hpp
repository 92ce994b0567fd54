#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "routine/dataset.hpp"

namespace routine {

/// Day descriptor families: averaged activity probabilities, averaged
/// global CNN descriptors, or both concatenated (activity block first).
enum class FeatureMode { Act, Glo, ActGlo };

const char* to_string(FeatureMode mode) noexcept;
FeatureMode parse_feature_mode(std::string_view name);
std::size_t signature_length(FeatureMode mode) noexcept;

struct DaySignature {
  std::string user_id;
  std::string day_id;
  FeatureMode mode = FeatureMode::Act;
  std::vector<double> vector;
  std::optional<Label> gt_label;
};

using UserSignatures = std::map<std::string, std::vector<DaySignature>>;

/// Mean of the day's per-image feature vectors.
DaySignature aggregate_day(const DayRecord& day, FeatureMode mode);

/// Z-scores each dimension across the given days (population variance).
/// Zero-variance dimensions become 0.
void standardize(std::vector<DaySignature>& days);

/// Aggregates every day of every user; standardization is per user.
UserSignatures build_signatures(const StudyDataset& ds, FeatureMode mode,
                                bool standardize);

/// Default standardization flag for a mode (on only for ActGlo).
constexpr bool default_standardize(FeatureMode mode) noexcept {
  return mode == FeatureMode::ActGlo;
}

/// Share of images whose argmax activity is k (ties go to the lower index).
std::array<double, kNumActivities> activity_histogram(const DayRecord& day);

/// `user,day,label,f0..f{d-1}` CSV of the given signatures.
std::string signatures_to_csv(const std::vector<DaySignature>& sigs);

}  // namespace routine
