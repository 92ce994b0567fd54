#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "routine/error.hpp"
#include "routine/experiment.hpp"
#include "routine/version.hpp"

namespace py = pybind11;
using namespace routine;

namespace {

Label parse_label(const std::string& s) {
  if (s == "R") return Label::Routine;
  if (s == "N") return Label::NonRoutine;
  throw py::value_error("labels are 'R' or 'N', got '" + s + "'");
}

std::vector<std::string> label_strings(const std::vector<Label>& v) {
  std::vector<std::string> out;
  for (Label l : v) out.push_back(to_string(l));
  return out;
}

py::dict outcome_dict(const DetectionOutcome& o) {
  py::dict d;
  d["scores"] = o.scores;
  d["decisions"] = label_strings(o.decisions);
  d["threshold"] = o.threshold;
  return d;
}

py::dict class_dict(const ClassMetrics& m) {
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f_score"] = m.f_score;
  d["support"] = m.support;
  return d;
}

RunConfig config_from(const std::string& text, const std::vector<std::string>& overrides) {
  auto kv = KeyValueConfig::parse(text, "<python>");
  for (const auto& o : overrides) kv.set_override(o);
  return parse_run_config(kv);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Routine / non-routine day discovery";

  // Translators run newest first, so the subclass is registered last.
  py::register_exception<Error>(m, "RoutineError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("__version__") = kVersion;

  m.def("average_path_length", &average_path_length, py::arg("n"));
  m.def("score_from_path", &score_from_path, py::arg("mean_path"), py::arg("subsample_size"));

  py::class_<IsoForest>(m, "IsoForest")
      .def_readonly("n_trees", &IsoForest::n_trees)
      .def_readonly("subsample_size", &IsoForest::subsample_size)
      .def_readonly("height_limit", &IsoForest::height_limit)
      .def_readonly("train_n", &IsoForest::train_n)
      .def_readonly("dim", &IsoForest::dim)
      .def("scores", [](const IsoForest& f, const Points& x) { return anomaly_scores(f, x); },
           py::arg("points"))
      .def("mean_path_length",
           [](const IsoForest& f, const Vector& x) { return mean_path_length(f, x); },
           py::arg("x"))
      .def("to_json", [](const IsoForest& f) { return to_json(f).dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return iforest_from_json(nlohmann::json::parse(s)); })
      .def(py::self == py::self);

  m.def(
      "fit_iforest",
      [](const Points& x, std::size_t n_trees, std::size_t max_subsample, std::uint64_t seed,
         std::size_t threads) {
        py::gil_scoped_release release;
        return fit_iforest(x, {n_trees, max_subsample, threads}, Rng(seed));
      },
      py::arg("points"), py::arg("n_trees") = 100, py::arg("max_subsample") = 256,
      py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "decide",
      [](const std::vector<double>& s, double c) { return outcome_dict(decide(s, c)); },
      py::arg("scores"), py::arg("contamination") = 0.3);

  m.def(
      "detect",
      [](const std::string& method, const Points& x, double contamination, std::uint64_t seed) {
        RunConfig cfg;
        cfg.contamination = contamination;
        std::vector<DaySignature> days(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) days[i].vector = x[i];
        return outcome_dict(run_method(parse_method(method), days, cfg, Rng(seed)));
      },
      py::arg("method"), py::arg("points"), py::arg("contamination") = 0.3, py::arg("seed") = 0,
      "Run one detector with default parameters. Methods: iforest, robust_covariance, ocsvm, "
      "dbscan, spectral.");

  m.def(
      "evaluate",
      [](const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
        std::vector<Label> t, p;
        for (const auto& s : truth) t.push_back(parse_label(s));
        for (const auto& s : pred) p.push_back(parse_label(s));
        const auto r = evaluate(t, p);
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["routine"] = class_dict(r.routine);
        d["non_routine"] = class_dict(r.non_routine);
        d["macro"] = class_dict(r.macro);
        d["weighted"] = class_dict(r.weighted);
        return d;
      },
      py::arg("truth"), py::arg("predicted"));

  m.def(
      "aggregate_votes",
      [](const std::vector<std::string>& votes) {
        AnnotatorVotes v{"", {}};
        for (const auto& s : votes) v.votes.push_back(parse_label(s));
        return std::string(to_string(aggregate_votes(v)));
      },
      py::arg("votes"));

  m.def(
      "signatures",
      [](const std::string& config, const std::string& mode,
         const std::optional<bool>& standardize) {
        const auto cfg = config_from(config, {});
        const auto fm = parse_feature_mode(mode);
        const auto sigs =
            build_signatures(load_or_generate(cfg), fm, standardize.value_or(cfg.standardize_mode(fm)));
        py::dict out;
        for (const auto& [user, days] : sigs) {
          py::list rows;
          for (const auto& d : days) {
            py::dict row;
            row["day"] = d.day_id;
            row["label"] = d.gt_label ? py::object(py::str(to_string(*d.gt_label))) : py::none();
            row["vector"] = d.vector;
            rows.append(row);
          }
          out[py::str(user)] = rows;
        }
        return out;
      },
      py::arg("config"), py::arg("mode") = "Act", py::arg("standardize") = py::none(),
      "Per-user day signatures of the corpus a config describes.");

  m.def(
      "synth",
      [](const std::string& config, const std::filesystem::path& out, std::uint64_t seed) {
        const auto kv = KeyValueConfig::parse(config, "<python>");
        const auto ds = generate_synthetic(parse_synthetic_config(kv), seed);
        write_corpus(ds, out);
        return ds.num_days();
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = 7);

  m.def(
      "run",
      [](const std::string& config, const std::optional<std::filesystem::path>& out,
         const std::vector<std::string>& overrides) {
        const auto cfg = config_from(config, overrides);
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run_experiments(cfg, load_or_generate(cfg));
          if (out) write_run(manifest, *out);
        }
        py::dict d;
        d["results_csv"] = results_csv(manifest);
        d["manifest"] = manifest_to_json(manifest).dump();
        d["failed"] = manifest.any_failed();
        return d;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("overrides") = std::vector<std::string>{},
      "Run the experiment matrix from config text; optionally write artifacts to `out`.");

  m.def("report", &render_report, py::arg("directory"));
}
