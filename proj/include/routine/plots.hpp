#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "routine/daysig.hpp"
#include "routine/detection.hpp"
#include "routine/numerics.hpp"

namespace routine {

/// Everything a PCA scatter needs; also what the run manifest stores so
/// `report` can redraw byte-identical plots.
struct ScatterData {
  std::string user;
  std::string method;
  std::string mode;
  std::vector<std::string> day_ids;
  Points coords;     // n x 2
  Vector explained;  // 2 fractions
  std::vector<Label> predicted;
  std::vector<std::optional<Label>> truth;
};

ScatterData make_scatter(const std::string& user, const std::string& method,
                         const std::string& mode, std::span<const DaySignature> days,
                         const DetectionOutcome& outcome);

/// One circle per day: fill is the prediction, outline the ground truth
/// (red routine, blue non-routine, grey unlabelled).
std::string scatter_svg(const ScatterData& data);

struct HistogramData {
  std::string user;
  std::vector<std::string> day_ids;
  std::vector<std::array<double, kNumActivities>> histograms;
  std::vector<std::optional<Label>> truth;
};

HistogramData make_histograms(const std::string& user, std::span<const DayRecord> days);

/// One stacked bar per day of activity_histogram shares; orange for routine
/// days, blue for non-routine ones.
std::string activity_svg(const HistogramData& data);

}  // namespace routine
