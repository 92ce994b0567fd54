#include "routine/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "routine/error.hpp"

namespace routine {

namespace fs = std::filesystem;

const char* to_string(Label label) noexcept {
  return label == Label::Routine ? "R" : "N";
}

std::size_t StudyDataset::num_days() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, days] : users) n += days.size();
  return n;
}

bool is_day_id(std::string_view s) noexcept {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

void validate(const ImageDescriptor& image, double simplex_tol) {
  if (image.timestamp < 0 || image.timestamp >= kSecondsPerDay)
    throw Error("timestamp out of range: " + std::to_string(image.timestamp));
  double sum = 0.0;
  for (double p : image.activity_probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw Error("activity probability negative or non-finite");
    sum += p;
  }
  if (std::abs(sum - 1.0) > simplex_tol)
    throw Error("activity probabilities sum to " + std::to_string(sum) +
                ", expected 1");
  if (image.global_feats) {
    if (image.global_feats->size() != kGlobalDim)
      throw Error("global descriptor has " +
                  std::to_string(image.global_feats->size()) +
                  " entries, expected 2048");
    for (double g : *image.global_feats)
      if (!std::isfinite(g)) throw Error("global descriptor non-finite");
  }
}

void validate(const DayRecord& day) {
  if (day.images.empty())
    throw Error("day " + day.user_id + "/" + day.day_id + " has no images");
  if (!is_day_id(day.day_id)) throw Error("bad day id '" + day.day_id + "'");
  const bool global = day.has_global();
  std::int32_t prev = -1;
  for (const auto& img : day.images) {
    validate(img);
    if (img.timestamp < prev)
      throw Error("day " + day.day_id + ": timestamps decrease");
    prev = img.timestamp;
    if (img.global_feats.has_value() != global)
      throw Error("day " + day.day_id +
                  ": images disagree on global descriptor presence");
  }
}

void validate(const StudyDataset& ds) {
  for (const auto& [user, days] : ds.users) {
    std::set<std::string> seen;
    for (const auto& d : days) {
      if (d.user_id != user)
        throw Error("day " + d.day_id + " filed under wrong user " + user);
      if (!seen.insert(d.day_id).second)
        throw Error("duplicate day " + d.day_id + " for user " + user);
      validate(d);
    }
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool getline_lf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

std::string expected_header(bool global) {
  std::string h = "ts";
  for (std::size_t k = 0; k < kNumActivities; ++k) h += ",a" + std::to_string(k);
  if (global)
    for (std::size_t k = 0; k < kGlobalDim; ++k) h += ",g" + std::to_string(k);
  return h;
}

DayRecord load_day(const fs::path& file, const std::string& user,
                   const std::string& day_id) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), 0, "cannot open file");
  const std::string name = file.string();

  std::string line;
  if (!getline_lf(in, line)) throw ParseError(name, 1, "empty day file");
  bool global;
  if (line == expected_header(false)) {
    global = false;
  } else if (line == expected_header(true)) {
    global = true;
  } else {
    throw ParseError(name, 1, "unexpected header");
  }
  const std::size_t columns =
      1 + kNumActivities + (global ? kGlobalDim : 0);

  DayRecord day{user, day_id, {}, std::nullopt};
  std::size_t line_no = 1;
  while (getline_lf(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != columns)
      throw ParseError(name, line_no,
                       "expected " + std::to_string(columns) + " columns, got " +
                           std::to_string(cells.size()));
    ImageDescriptor img;
    std::int64_t ts;
    if (!parse_int(cells[0], ts) || ts < 0 || ts >= kSecondsPerDay)
      throw ParseError(name, line_no, "bad timestamp '" + std::string(cells[0]) + "'");
    img.timestamp = static_cast<std::int32_t>(ts);
    for (std::size_t k = 0; k < kNumActivities; ++k) {
      double v;
      if (!parse_double(cells[1 + k], v) || !std::isfinite(v))
        throw ParseError(name, line_no, "bad value in column a" + std::to_string(k));
      img.activity_probs[k] = v;
    }
    if (global) {
      std::vector<double> g(kGlobalDim);
      for (std::size_t k = 0; k < kGlobalDim; ++k) {
        if (!parse_double(cells[1 + kNumActivities + k], g[k]) ||
            !std::isfinite(g[k]))
          throw ParseError(name, line_no, "bad value in column g" + std::to_string(k));
      }
      img.global_feats = std::move(g);
    }
    try {
      validate(img);
    } catch (const Error& e) {
      throw ParseError(name, line_no, e.what());
    }
    day.images.push_back(std::move(img));
  }
  if (day.images.empty()) throw ParseError(name, line_no, "empty day file");
  std::stable_sort(day.images.begin(), day.images.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return day;
}

Label parse_vote(std::string_view s, const std::string& file, std::size_t line) {
  if (s == "R") return Label::Routine;
  if (s == "N") return Label::NonRoutine;
  throw ParseError(file, line, "vote must be R or N, got '" + std::string(s) + "'");
}

}  // namespace

Label aggregate_votes(const AnnotatorVotes& votes) {
  if (votes.votes.size() != kNumAnnotators)
    throw Error("day " + votes.day_id + ": expected 6 votes, got " +
                std::to_string(votes.votes.size()));
  const auto routine =
      std::count(votes.votes.begin(), votes.votes.end(), Label::Routine);
  return routine >= 4 ? Label::Routine : Label::NonRoutine;
}

std::vector<AnnotatorVotes> load_votes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  const std::string name = file.string();
  if (!in) throw ParseError(name, 0, "cannot open file");
  std::string line;
  if (!getline_lf(in, line) || line != "day,v1,v2,v3,v4,v5,v6")
    throw ParseError(name, 1, "unexpected votes header");
  std::vector<AnnotatorVotes> out;
  std::size_t line_no = 1;
  while (getline_lf(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 1 + kNumAnnotators)
      throw ParseError(name, line_no, "expected 7 columns");
    if (!is_day_id(cells[0])) throw ParseError(name, line_no, "bad day id");
    AnnotatorVotes v{std::string(cells[0]), {}};
    for (std::size_t k = 1; k < cells.size(); ++k)
      v.votes.push_back(parse_vote(cells[k], name, line_no));
    out.push_back(std::move(v));
  }
  return out;
}

StudyDataset load_corpus(const fs::path& root) {
  if (!fs::is_directory(root))
    throw Error("corpus root is not a directory: " + root.string());
  StudyDataset ds;
  std::vector<fs::path> user_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) user_dirs.push_back(entry.path());
  std::sort(user_dirs.begin(), user_dirs.end());

  for (const auto& dir : user_dirs) {
    const std::string user = dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      if (is_day_id(entry.path().stem().string())) files.push_back(entry.path());
    }
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());

    auto& days = ds.users[user];
    for (const auto& f : files) days.push_back(load_day(f, user, f.stem().string()));

    const fs::path votes_file = dir / "votes.csv";
    if (fs::exists(votes_file)) {
      for (const auto& v : load_votes(votes_file)) {
        auto it = std::find_if(days.begin(), days.end(),
                               [&](const DayRecord& d) { return d.day_id == v.day_id; });
        if (it == days.end())
          throw ParseError(votes_file.string(), 0, "votes for unknown day " + v.day_id);
        it->gt_label = aggregate_votes(v);
      }
    }
  }
  return ds;
}

void write_corpus(const StudyDataset& ds, const fs::path& root) {
  validate(ds);
  fs::create_directories(root);
  for (const auto& [user, days] : ds.users) {
    const fs::path dir = root / user;
    fs::create_directories(dir);
    std::string votes = "day,v1,v2,v3,v4,v5,v6\n";
    bool any_votes = false;
    for (const auto& day : days) {
      std::string out = expected_header(day.has_global());
      out += '\n';
      for (const auto& img : day.images) {
        out += std::to_string(img.timestamp);
        for (double p : img.activity_probs) {
          out += ',';
          append_double(out, p);
        }
        if (img.global_feats)
          for (double g : *img.global_feats) {
            out += ',';
            append_double(out, g);
          }
        out += '\n';
      }
      std::ofstream f(dir / (day.day_id + ".csv"), std::ios::binary);
      f << out;
      if (!f) throw Error("failed writing " + (dir / day.day_id).string());
      if (day.gt_label) {
        any_votes = true;
        votes += day.day_id;
        for (std::size_t k = 0; k < kNumAnnotators; ++k) {
          votes += ',';
          votes += to_string(*day.gt_label);
        }
        votes += '\n';
      }
    }
    if (any_votes) {
      std::ofstream f(dir / "votes.csv", std::ios::binary);
      f << votes;
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpora

SyntheticConfig SyntheticConfig::table1_fixture() {
  SyntheticConfig cfg;
  const int days[] = {14, 10, 16, 19, 13};
  for (int u = 0; u < 5; ++u)
    cfg.users.push_back({"user" + std::to_string(u + 1), days[u], std::nullopt});
  cfg.outlier_fraction = 21.0 / 72.0;
  cfg.images_min = 12;
  cfg.images_max = 40;
  cfg.delta = 0.8;
  return cfg;
}

std::vector<int> planned_outliers(const SyntheticConfig& cfg) {
  if (!(cfg.outlier_fraction >= 0.0 && cfg.outlier_fraction <= 0.5))
    throw Error("outlier fraction must lie in [0, 0.5]");
  std::vector<int> counts(cfg.users.size(), 0);
  int total_days = 0;
  for (std::size_t u = 0; u < cfg.users.size(); ++u) {
    const auto& user = cfg.users[u];
    if (user.days < 1) throw Error("user " + user.user_id + " needs at least one day");
    if (user.outliers) {
      if (*user.outliers < 0 || 2 * *user.outliers > user.days)
        throw Error("user " + user.user_id +
                    ": outliers must be between 0 and half the days");
      counts[u] = *user.outliers;
    } else {
      total_days += user.days;
    }
  }
  // Users without an override share round(fraction * days) by largest remainder.
  const int target =
      static_cast<int>(std::llround(cfg.outlier_fraction * total_days));
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t u = 0; u < cfg.users.size(); ++u) {
    if (cfg.users[u].outliers) continue;
    const double quota = cfg.outlier_fraction * cfg.users[u].days;
    counts[u] = static_cast<int>(std::floor(quota + 1e-9));
    assigned += counts[u];
    remainders.emplace_back(quota - counts[u], u);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
    const std::size_t u = remainders[i].second;
    if (counts[u] >= cfg.users[u].days) continue;
    ++counts[u];
    ++assigned;
  }
  return counts;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", y, m, d);
  return buf;
}

struct UserPrototype {
  std::vector<std::size_t> support;  // activities used on routine days
  std::vector<double> weights;       // over kNumActivities, zero off support
  std::vector<double> global_mean;
  std::vector<double> global_scale;
};

UserPrototype make_prototype(const SyntheticConfig& cfg, Rng& rng) {
  UserPrototype p;
  const auto k = static_cast<std::size_t>(
      std::clamp<int>(cfg.prototype_support, 1, static_cast<int>(kNumActivities) - 1));
  p.support = rng.sample_without_replacement(kNumActivities, k);
  std::sort(p.support.begin(), p.support.end());
  std::vector<double> alpha(k, 2.0);
  const auto w = rng.dirichlet(alpha);
  p.weights.assign(kNumActivities, 0.0);
  for (std::size_t i = 0; i < k; ++i) p.weights[p.support[i]] = w[i];
  if (cfg.emit_global) {
    p.global_mean.resize(kGlobalDim);
    p.global_scale.resize(kGlobalDim);
    for (std::size_t j = 0; j < kGlobalDim; ++j) {
      p.global_mean[j] = rng.normal();
      p.global_scale[j] = rng.uniform(0.5, 1.5);
    }
  }
  return p;
}

std::vector<double> day_mixture(const SyntheticConfig& cfg, const UserPrototype& proto,
                                bool outlier, Rng& rng) {
  std::vector<double> alpha(kNumActivities);
  for (std::size_t a = 0; a < kNumActivities; ++a)
    alpha[a] = cfg.day_concentration * proto.weights[a];
  std::vector<double> m = rng.dirichlet(alpha);
  if (cfg.background > 0.0) {
    // Background mass stays on the prototype's support so that a full shift
    // leaves no overlap with it.
    const double share = cfg.background / static_cast<double>(proto.support.size());
    for (double& v : m) v *= 1.0 - cfg.background;
    for (std::size_t a : proto.support) m[a] += share;
  }
  if (!outlier) return m;

  std::vector<std::size_t> unused;
  for (std::size_t a = 0; a < kNumActivities; ++a)
    if (proto.weights[a] == 0.0) unused.push_back(a);
  const std::size_t novel_count =
      std::min<std::size_t>(unused.size(), 1 + rng.below(3));
  rng.shuffle(unused);
  std::vector<double> novel_alpha(kNumActivities, 0.0);
  for (std::size_t i = 0; i < novel_count; ++i) novel_alpha[unused[i]] = 1.5;
  const std::vector<double> q = rng.dirichlet(novel_alpha);
  for (std::size_t a = 0; a < kNumActivities; ++a)
    m[a] = (1.0 - cfg.delta) * m[a] + cfg.delta * q[a];
  return m;
}

DayRecord make_day(const SyntheticConfig& cfg, const UserPrototype& proto,
                   const std::string& user, const std::string& day_id, bool outlier,
                   Rng rng) {
  DayRecord day{user, day_id, {}, outlier ? Label::NonRoutine : Label::Routine};
  const std::vector<double> m = day_mixture(cfg, proto, outlier, rng);

  std::vector<double> day_mean;
  if (cfg.emit_global) {
    day_mean.resize(kGlobalDim);
    for (std::size_t j = 0; j < kGlobalDim; ++j) {
      double shift = 0.0;
      if (outlier) shift = (rng.below(2) ? 1.0 : -1.0) * cfg.delta;
      day_mean[j] = proto.global_mean[j] +
                    proto.global_scale[j] * (shift + cfg.global_day_sd * rng.normal());
    }
  }

  const int n = static_cast<int>(rng.between(cfg.images_min, cfg.images_max));
  std::vector<std::int32_t> stamps(static_cast<std::size_t>(n));
  for (auto& t : stamps) t = static_cast<std::int32_t>(rng.between(7 * 3600, 22 * 3600));
  std::sort(stamps.begin(), stamps.end());

  std::vector<double> alpha(kNumActivities);
  for (std::size_t a = 0; a < kNumActivities; ++a)
    alpha[a] = cfg.image_concentration * m[a];
  for (int i = 0; i < n; ++i) {
    ImageDescriptor img;
    img.timestamp = stamps[static_cast<std::size_t>(i)];
    const auto probs = rng.dirichlet(alpha);
    std::copy(probs.begin(), probs.end(), img.activity_probs.begin());
    if (cfg.emit_global) {
      std::vector<double> g(kGlobalDim);
      for (std::size_t j = 0; j < kGlobalDim; ++j)
        g[j] = day_mean[j] + proto.global_scale[j] * cfg.global_image_sd * rng.normal();
      img.global_feats = std::move(g);
    }
    day.images.push_back(std::move(img));
  }
  return day;
}

}  // namespace

StudyDataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw Error("delta must lie in (0, 1]");
  if (cfg.images_min < 1 || cfg.images_max < cfg.images_min)
    throw Error("images per day range is empty");
  if (!is_day_id(cfg.start_date)) throw Error("bad start date " + cfg.start_date);
  const std::vector<int> outliers = planned_outliers(cfg);

  const long start = days_from_civil(std::stol(cfg.start_date.substr(0, 4)),
                                     std::stoul(cfg.start_date.substr(5, 2)),
                                     std::stoul(cfg.start_date.substr(8, 2)));
  const Rng master(seed);
  StudyDataset ds;
  for (std::size_t u = 0; u < cfg.users.size(); ++u) {
    const auto& user = cfg.users[u];
    if (ds.users.count(user.user_id)) throw Error("duplicate user " + user.user_id);
    Rng rng = master.split(user.user_id);
    const UserPrototype proto = make_prototype(cfg, rng);
    const auto days = static_cast<std::size_t>(user.days);
    std::vector<bool> is_outlier(days, false);
    for (std::size_t i :
         rng.sample_without_replacement(days, static_cast<std::size_t>(outliers[u])))
      is_outlier[i] = true;

    auto& records = ds.users[user.user_id];
    for (std::size_t d = 0; d < days; ++d)
      records.push_back(make_day(cfg, proto, user.user_id,
                                 civil_from_days(start + static_cast<long>(d)),
                                 is_outlier[d], rng.split(d)));
  }
  return ds;
}

}  // namespace routine
