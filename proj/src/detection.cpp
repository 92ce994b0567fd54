#include "routine/detection.hpp"

#include <algorithm>
#include <cmath>

#include "routine/error.hpp"

namespace routine {

std::size_t DetectionOutcome::flagged() const noexcept {
  return static_cast<std::size_t>(
      std::count(decisions.begin(), decisions.end(), Label::NonRoutine));
}

DetectionOutcome decide(std::span<const double> scores, double contamination) {
  if (scores.empty()) throw Error("decide: empty score list");
  if (!(contamination > 0.0 && contamination <= 0.5))
    throw Error("contamination must lie in (0, 0.5]");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double q = 1.0 - contamination;
  // The epsilon absorbs products like 0.7 * 10 = 7.000000000000001.
  auto rank = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9)) + 1;
  rank = std::min(rank, n);

  DetectionOutcome out;
  out.scores.assign(scores.begin(), scores.end());
  out.threshold = sorted[rank - 1];
  out.decisions.reserve(n);
  for (double s : scores)
    out.decisions.push_back(s >= out.threshold ? Label::NonRoutine : Label::Routine);
  return out;
}

DetectionOutcome from_labels(std::vector<Label> decisions) {
  DetectionOutcome out;
  out.threshold = 1.0;
  out.scores.reserve(decisions.size());
  for (Label l : decisions) out.scores.push_back(l == Label::NonRoutine ? 1.0 : 0.0);
  out.decisions = std::move(decisions);
  return out;
}

}  // namespace routine
