#include "routine/eval.hpp"

#include <cstdio>

#include "routine/error.hpp"

namespace routine {

namespace {
constexpr std::size_t idx(Label l) noexcept { return static_cast<std::size_t>(l); }

double ratio(std::size_t num, std::size_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

Confusion::ClassView Confusion::view(Label positive) const noexcept {
  const std::size_t p = idx(positive);
  const std::size_t q = 1 - p;
  return {counts[p][p], counts[q][p], counts[p][q], counts[q][q]};
}

std::size_t Confusion::support(Label cls) const noexcept {
  return counts[idx(cls)][0] + counts[idx(cls)][1];
}

std::size_t Confusion::total() const noexcept {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size())
    throw Error("confusion: " + std::to_string(truth.size()) + " labels vs " +
                std::to_string(predicted.size()) + " predictions");
  if (truth.empty()) throw Error("confusion: no labels");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) ++c.counts[idx(truth[i])][idx(predicted[i])];
  return c;
}

EvalReport metrics(const Confusion& conf) {
  EvalReport r;
  r.total = conf.total();
  r.accuracy = ratio(conf.counts[0][0] + conf.counts[1][1], r.total);
  for (Label cls : {Label::Routine, Label::NonRoutine}) {
    const auto v = conf.view(cls);
    ClassMetrics m;
    m.precision = ratio(v.tp, v.tp + v.fp);
    m.recall = ratio(v.tp, v.tp + v.fn);
    const double pr = m.precision + m.recall;
    m.f_score = pr > 0.0 ? 2.0 * (m.precision * m.recall / pr) : 0.0;
    m.support = v.tp + v.fn;
    (cls == Label::Routine ? r.routine : r.non_routine) = m;
  }
  auto mean = [&](auto field) {
    return 0.5 * (r.routine.*field + r.non_routine.*field);
  };
  auto weighted = [&](auto field) {
    if (r.total == 0) return 0.0;
    return (r.routine.*field * static_cast<double>(r.routine.support) +
            r.non_routine.*field * static_cast<double>(r.non_routine.support)) /
           static_cast<double>(r.total);
  };
  r.macro = {mean(&ClassMetrics::precision), mean(&ClassMetrics::recall),
             mean(&ClassMetrics::f_score), r.total};
  r.weighted = {weighted(&ClassMetrics::precision), weighted(&ClassMetrics::recall),
                weighted(&ClassMetrics::f_score), r.total};
  // Support-weighted recall is (TP_R + TP_N) / total; use the count form so
  // it matches accuracy bit for bit.
  r.weighted.recall = r.accuracy;
  return r;
}

std::string results_row(const std::string& method, const std::string& features,
                        const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f", method.c_str(),
                features.c_str(), r.accuracy, r.weighted.f_score, r.weighted.precision,
                r.weighted.recall, r.macro.f_score, r.macro.precision, r.macro.recall);
  return buf;
}

}  // namespace routine
