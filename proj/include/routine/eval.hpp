#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "routine/dataset.hpp"

namespace routine {

/// Binary confusion matrix, indexed [truth][prediction] by Label value.
struct Confusion {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  struct ClassView {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  };

  /// Counts with `positive` taken as the positive class.
  ClassView view(Label positive) const noexcept;
  std::size_t support(Label cls) const noexcept;
  std::size_t total() const noexcept;
};

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  ClassMetrics routine;
  ClassMetrics non_routine;
  ClassMetrics macro;     // unweighted mean of the two classes
  ClassMetrics weighted;  // support-weighted mean
  std::size_t total = 0;

  const ClassMetrics& of(Label cls) const noexcept {
    return cls == Label::Routine ? routine : non_routine;
  }
};

/// Zero denominators give 0 for the affected metric.
EvalReport metrics(const Confusion& conf);

inline EvalReport evaluate(std::span<const Label> truth, std::span<const Label> predicted) {
  return metrics(confusion(truth, predicted));
}

/// Column order of results.csv.
inline constexpr const char* kResultsHeader = "method,features,Acc,wF,wP,wR,mF,mP,mR";

std::string results_row(const std::string& method, const std::string& features,
                        const EvalReport& report);

}  // namespace routine
