// Command-line runner: run / synth / report.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "routine/error.hpp"
#include "routine/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCellFailure = 1;
constexpr int kExitConfig = 2;

routine::KeyValueConfig load_config(const std::string& file, const std::vector<std::string>& sets) {
  auto kv = routine::KeyValueConfig::load(file);
  for (const auto& s : sets) kv.set_override(s);
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routine / non-routine day discovery"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string in;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  auto* run = app.add_subcommand("run", "Run the method x feature matrix");
  run->add_option("--config", config, "Config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (run.seed)");
  run->add_option("--out", out, "Output directory (run.out)");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads (run.threads)");
  run->add_option("--set", sets, "Override any config key, key=value")->take_all();

  auto* synth = app.add_subcommand("synth", "Write the configured synthetic corpus");
  synth->add_option("--config", config, "Config file")->required();
  synth->add_option("--out", out, "Corpus directory")->required();
  synth->add_option("--seed", seed, "Generator seed (synthetic.seed)");
  synth->add_option("--set", sets, "Override any config key, key=value")->take_all();

  auto* report = app.add_subcommand("report", "Re-render plots from a manifest");
  report->add_option("--in", in, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      auto kv = load_config(config, sets);
      if (*seed_opt) kv.set("run.seed", std::to_string(seed));
      if (*threads_opt) kv.set("run.threads", std::to_string(threads));
      if (!out.empty()) kv.set("run.out", "\"" + out + "\"");
      const auto cfg = routine::parse_run_config(kv);
      routine::StudyDataset ds;
      try {
        ds = routine::load_or_generate(cfg);
      } catch (const routine::ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
      }
      const auto manifest = routine::run_experiments(cfg, ds);
      routine::write_run(manifest, cfg.out_dir);
      std::cout << routine::results_csv(manifest);
      for (const auto& c : manifest.cells)
        if (!c.ok)
          std::cerr << "cell failed: " << c.user << " " << routine::method_id(c.method) << " "
                    << routine::to_string(c.mode) << ": " << c.reason << "\n";
      return manifest.any_failed() ? kExitCellFailure : kExitOk;
    }
    if (*synth) {
      auto kv = load_config(config, sets);
      if (!kv.has("synthetic.days")) throw routine::ConfigError("config has no [synthetic] section");
      const auto scfg = routine::parse_synthetic_config(kv);
      std::uint64_t s = kv.has("synthetic.seed") ? kv.get_uint("synthetic.seed")
                        : kv.has("run.seed")     ? kv.get_uint("run.seed")
                                                 : routine::RunConfig{}.seed;
      if (synth->count("--seed")) s = seed;
      const auto ds = routine::generate_synthetic(scfg, s);
      routine::write_corpus(ds, out);
      std::cout << "wrote " << ds.users.size() << " users, " << ds.num_days() << " days to " << out
                << "\n";
      return kExitOk;
    }
    if (*report) {
      const auto n = routine::render_report(in);
      std::cout << "rendered " << n << " plots\n";
      return kExitOk;
    }
  } catch (const routine::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCellFailure;
  }
  return kExitOk;
}
