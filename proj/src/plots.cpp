#include "routine/plots.hpp"

#include <algorithm>
#include <cstdio>

#include "routine/error.hpp"

namespace routine {

namespace {

constexpr const char* kRed = "#d62728";
constexpr const char* kBlue = "#1f77b4";
constexpr const char* kGrey = "#7f7f7f";
constexpr const char* kOrange = "#ff7f0e";

const char* scatter_color(std::optional<Label> l) {
  if (!l) return kGrey;
  return *l == Label::Routine ? kRed : kBlue;
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps [lo, hi] onto [a, b]; a degenerate range lands in the middle.
struct Axis {
  double lo, hi, a, b;
  double operator()(double v) const {
    if (!(hi > lo)) return 0.5 * (a + b);
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

}  // namespace

ScatterData make_scatter(const std::string& user, const std::string& method,
                         const std::string& mode, std::span<const DaySignature> days,
                         const DetectionOutcome& outcome) {
  if (days.size() < 2) throw Error("scatter plot needs at least two days");
  if (outcome.decisions.size() != days.size())
    throw Error("scatter plot: outcome does not match the days");
  Points x;
  for (const auto& d : days) x.push_back(d.vector);
  const std::size_t k = std::min<std::size_t>(2, x.front().size());
  PcaResult pca = pca_project(x, k);
  ScatterData s{user, method, mode, {}, {}, pca.explained, outcome.decisions, {}};
  for (auto& c : pca.coords) {
    c.resize(2, 0.0);
    s.coords.push_back(std::move(c));
  }
  s.explained.resize(2, 0.0);
  for (const auto& d : days) {
    s.day_ids.push_back(d.day_id);
    s.truth.push_back(d.gt_label);
  }
  return s;
}

std::string scatter_svg(const ScatterData& data) {
  constexpr double W = 520, H = 420, L = 60, R = 150, T = 40, B = 50;
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  if (!data.coords.empty()) {
    xlo = xhi = data.coords[0][0];
    ylo = yhi = data.coords[0][1];
    for (const auto& c : data.coords) {
      xlo = std::min(xlo, c[0]);
      xhi = std::max(xhi, c[0]);
      ylo = std::min(ylo, c[1]);
      yhi = std::max(yhi, c[1]);
    }
  }
  const double padx = 0.05 * (xhi - xlo), pady = 0.05 * (yhi - ylo);
  const Axis ax{xlo - padx, xhi + padx, L, W - R};
  const Axis ay{ylo - pady, yhi + pady, H - B, T};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"420\" "
       "viewBox=\"0 0 520 420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"520\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", (L + W - R) / 2) + "\" y=\"22\" text-anchor=\"middle\" "
       "font-size=\"14\">" + escape(data.user + " - " + data.method + " (" + data.mode + ")") +
       "</text>\n";
  s += "<rect x=\"60\" y=\"40\" width=\"310\" height=\"330\" fill=\"none\" stroke=\"#444\"/>\n";
  s += "<text x=\"" + fmt("%.1f", (L + W - R) / 2) + "\" y=\"400\" text-anchor=\"middle\">PC1 (" +
       fmt("%.1f", 100.0 * data.explained.at(0)) + "%)</text>\n";
  s += "<text x=\"20\" y=\"" + fmt("%.1f", (T + H - B) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " + fmt("%.1f", (T + H - B) / 2) +
       ")\">PC2 (" + fmt("%.1f", 100.0 * data.explained.at(1)) + "%)</text>\n";

  for (std::size_t i = 0; i < data.coords.size(); ++i) {
    s += "<circle class=\"day\" cx=\"" + fmt("%.2f", ax(data.coords[i][0])) + "\" cy=\"" +
         fmt("%.2f", ay(data.coords[i][1])) + "\" r=\"6\" fill=\"" +
         scatter_color(data.predicted[i]) + "\" stroke=\"" + scatter_color(data.truth[i]) +
         "\" stroke-width=\"2.5\"><title>" + escape(data.day_ids[i]) + "</title></circle>\n";
  }

  // Legend uses squares so that circles count days.
  const double lx = W - R + 20;
  s += "<text x=\"" + fmt("%.0f", lx) + "\" y=\"60\">fill: predicted</text>\n";
  s += "<text x=\"" + fmt("%.0f", lx) + "\" y=\"76\">outline: truth</text>\n";
  s += "<rect x=\"" + fmt("%.0f", lx) + "\" y=\"90\" width=\"12\" height=\"12\" fill=\"" +
       std::string(kRed) + "\"/><text x=\"" + fmt("%.0f", lx + 18) +
       "\" y=\"101\">routine</text>\n";
  s += "<rect x=\"" + fmt("%.0f", lx) + "\" y=\"110\" width=\"12\" height=\"12\" fill=\"" +
       std::string(kBlue) + "\"/><text x=\"" + fmt("%.0f", lx + 18) +
       "\" y=\"121\">non-routine</text>\n";
  s += "</svg>\n";
  return s;
}

HistogramData make_histograms(const std::string& user, std::span<const DayRecord> days) {
  if (days.empty()) throw Error("activity histograms need at least one day");
  HistogramData h{user, {}, {}, {}};
  for (const auto& d : days) {
    h.day_ids.push_back(d.day_id);
    h.histograms.push_back(activity_histogram(d));
    h.truth.push_back(d.gt_label);
  }
  return h;
}

std::string activity_svg(const HistogramData& data) {
  constexpr double bar = 22, gap = 8, L = 50, T = 40, plot_h = 260, B = 90;
  const double n = static_cast<double>(data.day_ids.size());
  const double width = L + n * (bar + gap) + gap + 20;
  const double height = T + plot_h + B;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) +
       "\" height=\"" + fmt("%.0f", height) + "\" viewBox=\"0 0 " + fmt("%.0f", width) + " " +
       fmt("%.0f", height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"" + fmt("%.0f", width) + "\" height=\"" + fmt("%.0f", height) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.0f", L) + "\" y=\"22\" font-size=\"14\">" +
       escape(data.user + " - activity occurrence per day") + "</text>\n";
  s += "<line x1=\"" + fmt("%.0f", L) + "\" y1=\"40\" x2=\"" + fmt("%.0f", L) + "\" y2=\"300\" "
       "stroke=\"#444\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = T + plot_h - plot_h * tick / 4.0;
    s += "<text x=\"" + fmt("%.0f", L - 6) + "\" y=\"" + fmt("%.1f", y + 4) +
         "\" text-anchor=\"end\">" + fmt("%.2f", tick / 4.0) + "</text>\n";
  }

  for (std::size_t d = 0; d < data.day_ids.size(); ++d) {
    const double x = L + gap + static_cast<double>(d) * (bar + gap);
    const bool non_routine = data.truth[d] && *data.truth[d] == Label::NonRoutine;
    const char* colour = !data.truth[d] ? kGrey : (non_routine ? kBlue : kOrange);
    s += "<g class=\"dayhist\" data-day=\"" + escape(data.day_ids[d]) + "\">\n";
    double top = T + plot_h;
    for (std::size_t a = 0; a < kNumActivities; ++a) {
      const double v = data.histograms[d][a];
      if (v <= 0.0) continue;
      const double h = v * plot_h;
      top -= h;
      const double opacity = 0.35 + 0.65 * static_cast<double>(a + 1) / kNumActivities;
      s += "<rect class=\"seg\" data-activity=\"" + std::to_string(a) + "\" data-value=\"" +
           fmt("%.9f", v) + "\" x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.3f", top) +
           "\" width=\"" + fmt("%.0f", bar) + "\" height=\"" + fmt("%.3f", h) + "\" fill=\"" +
           colour + "\" fill-opacity=\"" + fmt("%.3f", opacity) +
           "\" stroke=\"white\" stroke-width=\"0.5\"><title>a" + std::to_string(a) + ": " +
           fmt("%.3f", v) + "</title></rect>\n";
    }
    s += "</g>\n";
    const double lx = x + bar / 2;
    s += "<text x=\"" + fmt("%.1f", lx) + "\" y=\"308\" text-anchor=\"end\" transform=\"rotate(-60 " +
         fmt("%.1f", lx) + " 308)\">" + escape(data.day_ids[d]) + "</text>\n";
  }
  const double ly = height - 16;
  s += "<rect x=\"" + fmt("%.0f", L) + "\" y=\"" + fmt("%.0f", ly - 10) +
       "\" width=\"12\" height=\"12\" fill=\"" + std::string(kOrange) + "\"/><text x=\"" +
       fmt("%.0f", L + 18) + "\" y=\"" + fmt("%.0f", ly) + "\">routine</text>\n";
  s += "<rect x=\"" + fmt("%.0f", L + 100) + "\" y=\"" + fmt("%.0f", ly - 10) +
       "\" width=\"12\" height=\"12\" fill=\"" + std::string(kBlue) + "\"/><text x=\"" +
       fmt("%.0f", L + 118) + "\" y=\"" + fmt("%.0f", ly) + "\">non-routine</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace routine
