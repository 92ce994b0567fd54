#include "routine/daysig.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "routine/error.hpp"

namespace routine {

const char* to_string(FeatureMode mode) noexcept {
  switch (mode) {
    case FeatureMode::Act: return "Act";
    case FeatureMode::Glo: return "Glo";
    case FeatureMode::ActGlo: return "ActGlo";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "Act") return FeatureMode::Act;
  if (name == "Glo") return FeatureMode::Glo;
  if (name == "ActGlo") return FeatureMode::ActGlo;
  throw ConfigError("unknown feature mode '" + std::string(name) + "'");
}

std::size_t signature_length(FeatureMode mode) noexcept {
  switch (mode) {
    case FeatureMode::Act: return kNumActivities;
    case FeatureMode::Glo: return kGlobalDim;
    case FeatureMode::ActGlo: return kNumActivities + kGlobalDim;
  }
  return 0;
}

DaySignature aggregate_day(const DayRecord& day, FeatureMode mode) {
  if (day.images.empty())
    throw Error("day " + day.user_id + "/" + day.day_id + " has no images");
  const bool want_act = mode != FeatureMode::Glo;
  const bool want_glo = mode != FeatureMode::Act;
  if (want_glo)
    for (const auto& img : day.images)
      if (!img.global_feats)
        throw Error("day " + day.user_id + "/" + day.day_id + ": mode " +
                    to_string(mode) + " needs global descriptors");

  DaySignature sig{day.user_id, day.day_id, mode,
                   std::vector<double>(signature_length(mode), 0.0), day.gt_label};
  for (const auto& img : day.images) {
    std::size_t off = 0;
    if (want_act) {
      for (std::size_t k = 0; k < kNumActivities; ++k) sig.vector[k] += img.activity_probs[k];
      off = kNumActivities;
    }
    if (want_glo) {
      const auto& g = *img.global_feats;
      for (std::size_t k = 0; k < kGlobalDim; ++k) sig.vector[off + k] += g[k];
    }
  }
  const double n = static_cast<double>(day.images.size());
  for (double& v : sig.vector) v /= n;
  return sig;
}

void standardize(std::vector<DaySignature>& days) {
  if (days.size() < 2) throw Error("standardization needs at least two days");
  const std::size_t d = days.front().vector.size();
  const double n = static_cast<double>(days.size());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& s : days) mean += s.vector[j];
    mean /= n;
    double var = 0.0;
    for (const auto& s : days) var += (s.vector[j] - mean) * (s.vector[j] - mean);
    var /= n;
    const double sd = std::sqrt(var);
    // Relative cut so that rounding noise on a constant column is not blown up.
    const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (auto& s : days) s.vector[j] = constant ? 0.0 : (s.vector[j] - mean) / sd;
  }
}

UserSignatures build_signatures(const StudyDataset& ds, FeatureMode mode,
                                bool standardize_days) {
  UserSignatures out;
  for (const auto& [user, days] : ds.users) {
    if (standardize_days && days.size() < 2)
      throw Error("user " + user + ": standardization needs at least two days");
    auto& sigs = out[user];
    sigs.reserve(days.size());
    for (const auto& day : days) sigs.push_back(aggregate_day(day, mode));
    if (standardize_days) standardize(sigs);
  }
  return out;
}

std::array<double, kNumActivities> activity_histogram(const DayRecord& day) {
  if (day.images.empty()) throw Error("activity histogram of an empty day");
  std::array<double, kNumActivities> hist{};
  for (const auto& img : day.images) {
    const auto it = std::max_element(img.activity_probs.begin(), img.activity_probs.end());
    hist[static_cast<std::size_t>(it - img.activity_probs.begin())] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(day.images.size());
  return hist;
}

std::string signatures_to_csv(const std::vector<DaySignature>& sigs) {
  std::string out = "user,day,label";
  const std::size_t d = sigs.empty() ? 0 : sigs.front().vector.size();
  for (std::size_t j = 0; j < d; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  char buf[32];
  for (const auto& s : sigs) {
    out += s.user_id + "," + s.day_id + "," + (s.gt_label ? to_string(*s.gt_label) : "");
    for (double v : s.vector) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ',';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace routine
