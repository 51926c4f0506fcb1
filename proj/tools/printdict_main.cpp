// Copyright 2026 The printdict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "printdict/printdict.hpp"

namespace {

using namespace printdict;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

fs::path default_out_dir() {
  if (const char* env = std::getenv("PRINTDICT_OUT")) return fs::path(env);
  return fs::path(".");
}

ExperimentConfig load_config_file(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  return io::experiment_config_from_json(
      io::parse_json(io::read_file(path), path));
}

struct Manifest {
  io::json files = io::json::array();
  io::json timings = io::json::object();

  void add_file(const fs::path& path) { files.push_back(path.string()); }

  void write(const fs::path& path, const ExperimentConfig& config) {
    io::json j;
    j["format"] = "printdict.manifest";
    j["version"] = 1;
    j["tool_version"] = kVersion;
    j["config"] = io::experiment_config_to_json(config);
    j["files"] = files;
    j["timings_ms"] = timings;
    io::write_file_atomic(path, j.dump(1) + "\n");
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string cmaes_settings_line(int latent_dim) {
  const CmaesSettings s = CmaesSettings::standard(latent_dim, std::nullopt);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "cmaes: lambda=%d mu=%d mu_eff=%.17g c_sigma=%.17g "
                "d_sigma=%.17g c_c=%.17g c_1=%.17g c_mu=%.17g",
                s.lambda, s.mu, s.mu_eff, s.c_sigma, s.d_sigma, s.c_c, s.c_1,
                s.c_mu);
  return buf;
}

std::vector<std::string> report_header(const ExperimentConfig& config) {
  return {
      std::string("printdict ") + kVersion,
      "config: " + io::experiment_config_to_json(config).dump(),
      cmaes_settings_line(config.latent_dim),
      "note: novelty ties break on the candidate's match count, then on "
      "sampling order",
  };
}

int cmd_gen(const std::string& config_path, std::optional<std::uint64_t> seed,
            const fs::path& out_dir) {
  ExperimentConfig config = load_config_file(config_path);
  if (seed) config.master_seed = *seed;
  config.validate();

  Stopwatch watch;
  const std::uint64_t root = config.master_seed;
  const auto [train, test] =
      split_train_test(config.gallery, derive(root, stream::kGallery));
  const GeneratorParams generator =
      build_generator(config.gallery.feature_dim, config.latent_dim,
                      derive(root, stream::kGenerator), train);

  Manifest manifest;
  const fs::path train_path = out_dir / "train_gallery.json";
  const fs::path test_path = out_dir / "test_gallery.json";
  const fs::path generator_path = out_dir / "generator.json";
  io::save_gallery(train, train_path);
  manifest.add_file(train_path);
  io::save_gallery(test, test_path);
  manifest.add_file(test_path);
  io::save_generator(generator, generator_path);
  manifest.add_file(generator_path);

  manifest.timings["gen"] = watch.elapsed_ms();
  const fs::path manifest_path = out_dir / "manifest.json";
  manifest.add_file(manifest_path);
  manifest.write(manifest_path, config);

  std::cerr << "wrote " << train_path << ", " << test_path << ", "
            << generator_path << ", " << manifest_path << "\n";
  return kExitOk;
}

int cmd_run(ExperimentConfig config, const fs::path& out_dir, bool trace) {
  config.validate();
  Stopwatch watch;
  std::cerr << "running " << config.strategies.size() << " strategies x "
            << config.fmr_levels.size() << " FMR levels x " << config.trials
            << " trials (seed " << config.master_seed << ", jobs "
            << config.jobs << ")\n";

  const CoverageReport report = run_experiment(config, trace);
  const double run_ms = watch.elapsed_ms();
  std::cerr << "experiment finished in " << run_ms / 1000.0 << " s\n";

  const auto header = report_header(config);
  const auto rows = aggregate_rows(report);

  Manifest manifest;
  manifest.timings["run"] = run_ms;

  const fs::path csv_path = out_dir / "report.csv";
  io::write_file_atomic(csv_path, report_csv(rows, header));
  manifest.add_file(csv_path);

  const fs::path table_path = out_dir / "report.txt";
  io::write_file_atomic(table_path, render_table(rows));
  manifest.add_file(table_path);

  const fs::path trials_path = out_dir / "report_trials.csv";
  io::write_file_atomic(trials_path, trials_csv(report, header));
  manifest.add_file(trials_path);

  io::json dictionaries;
  dictionaries["format"] = "printdict.dictionaries";
  dictionaries["version"] = 1;
  io::json cells = io::json::array();
  for (const auto& cell : report.cells) {
    if (cell.failed) continue;
    io::json c;
    c["trial"] = cell.trial;
    c["fmr"] = cell.fmr;
    c["strategy"] = strategy_name(cell.strategy);
    c["threshold"] = cell.calibration.threshold;
    c["achieved_fmr"] = cell.calibration.achieved_fmr;
    c["impostor_pairs"] = cell.calibration.impostor_pair_count;
    c["dictionary"] = io::dictionary_to_json(cell.dictionary);
    cells.push_back(std::move(c));
  }
  dictionaries["cells"] = std::move(cells);
  const fs::path dict_path = out_dir / "dictionaries.json";
  io::write_file_atomic(dict_path, dictionaries.dump(1) + "\n");
  manifest.add_file(dict_path);

  if (trace) {
    std::ostringstream trace_out;
    trace_out << "trial,fmr,strategy,print,generation,best_fitness,sigma,"
                 "mean_norm\n";
    for (const auto& cell : report.cells)
      for (const auto& line : cell.trace_lines)
        trace_out << cell.trial << ',' << cell.fmr << ','
                  << strategy_name(cell.strategy) << ',' << line << "\n";
    const fs::path trace_path = out_dir / "trace.csv";
    io::write_file_atomic(trace_path, trace_out.str());
    manifest.add_file(trace_path);
  }

  const fs::path manifest_path = out_dir / "manifest.json";
  manifest.add_file(manifest_path);
  manifest.write(manifest_path, config);

  std::cout << render_table(rows);

  int failed_cells = 0;
  for (const auto& cell : report.cells) failed_cells += cell.failed ? 1 : 0;
  if (failed_cells > 0) {
    std::cerr << failed_cells
              << " cell(s) failed; see report_trials.csv for details\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_report(const std::string& in_path) {
  const auto rows = parse_report_csv(io::read_file(in_path));
  std::cout << render_table(rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"printdict: dictionary-attack search heuristics against a "
               "calibrated synthetic verifier"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand(
      "gen", "generate and persist galleries and a generator");
  std::string gen_config;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out = default_out_dir().string();
  gen->add_option("--config", gen_config, "experiment config JSON file")
      ->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "master seed override");
  gen->add_option("--out", gen_out, "output directory");

  // run
  auto* run = app.add_subcommand("run", "run the experiment matrix");
  std::string run_config;
  std::string strategy = "all";
  std::vector<double> fmrs;
  std::optional<int> trials;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> jobs;
  std::optional<int> dict_size;
  std::optional<int> print_gens;
  std::optional<int> single_gens;
  bool trace = false;
  std::string run_out = default_out_dir().string();
  run->add_option("--config", run_config, "experiment config JSON file")
      ->check(CLI::ExistingFile);
  run->add_option("--strategy", strategy,
                  "random|single|diversity|novelty|all")
      ->check(CLI::IsMember(
          {"random", "single", "diversity", "novelty", "all"}));
  run->add_option("--fmr", fmrs, "target FMR level(s), fractions in (0,1]");
  run->add_option("--trials", trials, "number of trials");
  run->add_option("--seed", run_seed, "master seed");
  run->add_option("--jobs", jobs, "concurrent trials");
  run->add_option("--dict-size", dict_size, "maximum dictionary size");
  run->add_option("--print-gens", print_gens,
                  "generations per diversity/novelty print");
  run->add_option("--single-gens", single_gens,
                  "generations for the single evolved print");
  run->add_flag("--trace", trace, "write per-generation trace.csv");
  run->add_option("--out", run_out, "output directory");

  // report
  auto* rep = app.add_subcommand("report", "render a report.csv as a table");
  std::string report_in;
  rep->add_option("--in", report_in, "report CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_config, gen_seed, gen_out);
    if (run->parsed()) {
      ExperimentConfig config = load_config_file(run_config);
      if (strategy != "all") {
        config.strategies = {io::strategy_from_name(strategy)};
      }
      if (!fmrs.empty()) config.fmr_levels = fmrs;
      if (trials) config.trials = *trials;
      if (run_seed) config.master_seed = *run_seed;
      if (jobs) config.jobs = *jobs;
      if (dict_size) config.max_dict_size = *dict_size;
      if (print_gens) config.per_print_generations = *print_gens;
      if (single_gens) config.single_print_generations = *single_gens;
      return cmd_run(std::move(config), run_out, trace);
    }
    if (rep->parsed()) return cmd_report(report_in);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
