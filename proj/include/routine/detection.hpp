#pragma once

#include <span>
#include <string>
#include <vector>

#include "routine/dataset.hpp"

namespace routine {

/// Per-day scores and the routine/non-routine split they induce. A day is
/// NonRoutine exactly when its score is >= threshold. Scores are
/// detector-specific; larger always means more anomalous.
struct DetectionOutcome {
  std::vector<double> scores;
  std::vector<Label> decisions;
  double threshold = 0.0;

  std::size_t flagged() const noexcept;
};

/// Thresholds at the (1 - contamination) nearest-rank quantile, taken as the
/// (floor((1 - c) * n) + 1)-th smallest score. Ties at the threshold are all
/// flagged, so a constant score list is flagged in full.
DetectionOutcome decide(std::span<const double> scores, double contamination);

/// Wraps an already-binary labelling (score 1 flagged, 0 not; threshold 1).
DetectionOutcome from_labels(std::vector<Label> decisions);

}  // namespace routine
