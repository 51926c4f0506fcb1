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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "printdict/errors.hpp"
#include "printdict/gallery.hpp"
#include "printdict/generator.hpp"
#include "printdict/matcher.hpp"
#include "printdict/search.hpp"

namespace printdict {

// Multi-trial experiment matrix: strategies x FMR levels x trials, with
// train coverage and train-threshold test coverage per cell.

struct ExperimentConfig {
  GalleryConfig gallery;  // user_count covers train + test together
  int latent_dim = 16;
  std::vector<double> fmr_levels = {0.01, 0.001, 0.0001};
  std::vector<Strategy> strategies = {Strategy::kRandom, Strategy::kSingle,
                                      Strategy::kDiversity,
                                      Strategy::kNovelty};
  int trials = 10;
  int max_dict_size = 10;
  int per_print_generations = 1000;
  int single_print_generations = 10000;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  double sigma0 = 0.5;

  void validate() const {
    gallery.validate();
    if (gallery.user_count % 2 != 0)
      throw ConfigError("gallery user_count must be even (train/test split)");
    if (latent_dim < 1 || latent_dim > gallery.feature_dim)
      throw ConfigError("latent_dim must lie in [1, feature_dim]");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (fmr_levels.empty()) throw ConfigError("need at least one FMR level");
    for (const double f : fmr_levels)
      if (!(f > 0.0) || f > 1.0)
        throw ConfigError("FMR levels must lie in (0, 1]");
    if (strategies.empty()) throw ConfigError("need at least one strategy");
    if (max_dict_size < 1) throw ConfigError("max_dict_size must be >= 1");
    if (per_print_generations < 1 || single_print_generations < 1)
      throw ConfigError("generation budgets must be positive");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

struct TrialCell {
  int trial = 0;
  double fmr = 0.0;
  Strategy strategy = Strategy::kRandom;
  bool failed = false;
  std::string error;
  double train_coverage = 0.0;
  double test_coverage = 0.0;
  int dict_size = 0;
  std::int64_t evaluations_used = 0;
  FmrCalibration calibration;
  PrintDictionary dictionary;
  std::vector<std::string> trace_lines;
};

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single trial
  int trials = 0;
};

struct CoverageReport {
  ExperimentConfig config;
  std::vector<TrialCell> cells;  // trial-major, then fmr, then strategy

  CellStats stats(double fmr, Strategy strategy, bool test_split) const {
    CellStats out;
    std::vector<double> values;
    for (const auto& cell : cells) {
      if (cell.failed || cell.fmr != fmr || cell.strategy != strategy)
        continue;
      values.push_back(test_split ? cell.test_coverage : cell.train_coverage);
    }
    out.trials = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (const double v : values) sum += v;
    out.mean = sum / values.size();
    if (values.size() > 1) {
      double ss = 0.0;
      for (const double v : values) ss += (v - out.mean) * (v - out.mean);
      out.stddev = std::sqrt(ss / (values.size() - 1));
    }
    return out;
  }
};

// Per-trial root seeds: derive(master_seed, kTrial, trial_index). Everything
// inside a trial forks from that one value.
inline std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index) {
  return derive(master_seed, stream::kTrial,
                static_cast<std::uint64_t>(trial_index));
}

using GallerySource = std::function<const Gallery&()>;

// Runs one trial against a prepared train gallery. The test gallery is
// requested through `test_source` only after every dictionary of the trial
// is finalized, which keeps test data out of the search loop by
// construction (and lets tests verify that with a logging source). The
// optional observer sees every per-generation trace point as it happens.
inline std::vector<TrialCell> run_trial(const ExperimentConfig& config,
                                        int trial_index, const Gallery& train,
                                        const GallerySource& test_source,
                                        bool keep_trace = false,
                                        const TraceFn& observer = {}) {
  const std::uint64_t seed = trial_seed(config.master_seed, trial_index);
  std::vector<TrialCell> cells;

  GeneratorParams generator =
      build_generator(config.gallery.feature_dim, config.latent_dim,
                      derive(seed, stream::kGenerator), train);

  for (std::size_t fi = 0; fi < config.fmr_levels.size(); ++fi) {
    const double fmr = config.fmr_levels[fi];
    FmrCalibration cal;
    bool cal_failed = false;
    std::string cal_error;
    try {
      cal = calibrate(train, fmr, derive(seed, stream::kCalibration, fi));
    } catch (const std::exception& e) {
      cal_failed = true;
      cal_error = e.what();
    }

    for (std::size_t si = 0; si < config.strategies.size(); ++si) {
      const Strategy strategy = config.strategies[si];
      TrialCell cell;
      cell.trial = trial_index;
      cell.fmr = fmr;
      cell.strategy = strategy;
      cell.calibration = cal;
      if (cal_failed) {
        cell.failed = true;
        cell.error = cal_error;
        cells.push_back(std::move(cell));
        continue;
      }

      SearchContext ctx;
      ctx.train = &train;
      ctx.generator = &generator;
      ctx.calibration = cal;
      ctx.seed = derive(seed, stream::kStrategy, fi, si);
      ctx.sigma0 = config.sigma0;
      if (keep_trace || observer) {
        ctx.trace = [&cell, keep_trace, &observer](const TracePoint& p) {
          if (keep_trace) {
            char line[160];
            std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g",
                          p.print_index, p.generation, p.best_fitness,
                          p.sigma, p.mean_norm);
            cell.trace_lines.emplace_back(line);
          }
          if (observer) observer(p);
        };
      }

      try {
        switch (strategy) {
          case Strategy::kRandom:
            cell.dictionary = random_dictionary(ctx, config.max_dict_size);
            break;
          case Strategy::kSingle:
            cell.dictionary =
                evolve_single_print(ctx, config.single_print_generations);
            break;
          case Strategy::kDiversity:
            cell.dictionary = evolve_diversity_dictionary(
                ctx, config.per_print_generations, config.max_dict_size);
            break;
          case Strategy::kNovelty:
            cell.dictionary = evolve_novelty_dictionary(
                ctx, config.per_print_generations, config.max_dict_size);
            break;
        }
        cell.dict_size = cell.dictionary.size();
        cell.evaluations_used = cell.dictionary.evaluations_used;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }

  // All dictionaries for this trial are final; only now touch test data.
  const Gallery& test = test_source();
  for (auto& cell : cells) {
    if (cell.failed) continue;
    try {
      cell.train_coverage =
          union_coverage(cell.dictionary, generator, train, cell.calibration);
      cell.test_coverage =
          union_coverage(cell.dictionary, generator, test, cell.calibration);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  }
  return cells;
}

inline CoverageReport run_experiment(const ExperimentConfig& config,
                                     bool keep_trace = false) {
  config.validate();
  CoverageReport report;
  report.config = config;

  std::vector<std::vector<TrialCell>> per_trial(config.trials);
  std::atomic<int> next{0};

  const auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= config.trials) return;
      try {
        const std::uint64_t seed = trial_seed(config.master_seed, t);
        auto [train, test] = split_train_test(
            config.gallery, derive(seed, stream::kGallery));
        const Gallery* test_ptr = &test;
        per_trial[t] =
            run_trial(config, t, train,
                      [test_ptr]() -> const Gallery& { return *test_ptr; },
                      keep_trace);
      } catch (const std::exception& e) {
        // Whole-trial failure: record one failed cell per matrix slot.
        for (const double fmr : config.fmr_levels)
          for (const Strategy s : config.strategies) {
            TrialCell cell;
            cell.trial = t;
            cell.fmr = fmr;
            cell.strategy = s;
            cell.failed = true;
            cell.error = e.what();
            per_trial[t].push_back(std::move(cell));
          }
      }
    }
  };

  const int thread_count = std::min(config.jobs, config.trials);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  for (auto& cells : per_trial)
    for (auto& cell : cells) report.cells.push_back(std::move(cell));
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

struct ReportRow {
  double fmr = 0.0;
  std::string split;  // "train" or "test"
  std::string strategy;
  double mean = 0.0;
  double stddev = 0.0;
  int trials = 0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

inline std::vector<ReportRow> aggregate_rows(const CoverageReport& report) {
  std::vector<ReportRow> rows;
  for (const double fmr : report.config.fmr_levels) {
    for (const bool test_split : {false, true}) {
      for (const Strategy s : report.config.strategies) {
        const CellStats stats = report.stats(fmr, s, test_split);
        ReportRow row;
        row.fmr = fmr;
        row.split = test_split ? "test" : "train";
        row.strategy = strategy_name(s);
        row.mean = stats.mean;
        row.stddev = stats.stddev;
        row.trials = stats.trials;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// Machine-readable aggregate report. Header comments carry the config, so a
// run is reproducible from its own report; no timestamps, so identical seeds
// yield byte-identical files.
inline std::string report_csv(const std::vector<ReportRow>& rows,
                              const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "fmr,split,strategy,mean,std,trials\n";
  for (const auto& row : rows) {
    out << detail::format_short(row.fmr) << ',' << row.split << ','
        << row.strategy << ',' << detail::format_double(row.mean) << ','
        << detail::format_double(row.stddev) << ',' << row.trials << "\n";
  }
  return out.str();
}

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<ReportRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "fmr,split,strategy,mean,std,trials")
        throw ConfigError("malformed report: unexpected header '" + line +
                          "'");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string fmr_s, split, strategy, mean_s, std_s, trials_s;
    if (!std::getline(fields, fmr_s, ',') ||
        !std::getline(fields, split, ',') ||
        !std::getline(fields, strategy, ',') ||
        !std::getline(fields, mean_s, ',') ||
        !std::getline(fields, std_s, ',') ||
        !std::getline(fields, trials_s))
      throw ConfigError("malformed report row: '" + line + "'");
    ReportRow row;
    try {
      row.fmr = std::stod(fmr_s);
      row.mean = std::stod(mean_s);
      row.stddev = std::stod(std_s);
      row.trials = std::stoi(trials_s);
    } catch (const std::exception&) {
      throw ConfigError("malformed report row: '" + line + "'");
    }
    if (split != "train" && split != "test")
      throw ConfigError("malformed report row: unknown split '" + split + "'");
    row.split = split;
    row.strategy = strategy;
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ConfigError("malformed report: missing header");
  return rows;
}

// Fixed-width results table: one row per FMR/split, one column per
// strategy, coverage as percent with 2 decimals.
inline std::string render_table(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw ConfigError("nothing to render");

  std::vector<std::string> strategies;
  for (const auto& row : rows)
    if (std::find(strategies.begin(), strategies.end(), row.strategy) ==
        strategies.end())
      strategies.push_back(row.strategy);

  struct Key {
    double fmr;
    std::string split;
  };
  std::vector<Key> keys;
  for (const auto& row : rows) {
    bool found = false;
    for (const auto& k : keys)
      if (k.fmr == row.fmr && k.split == row.split) found = true;
    if (!found) keys.push_back({row.fmr, row.split});
  }

  const auto letter_of = [](const std::string& name) -> std::string {
    if (name == "random") return "R";
    if (name == "single") return "D";
    if (name == "diversity") return "I";
    if (name == "novelty") return "N";
    return name;
  };

  std::ostringstream out;
  out << "coverage, percent of users matched (mean over trials)\n\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-10s %-6s", "FMR", "split");
  out << buf;
  for (const auto& s : strategies) {
    std::snprintf(buf, sizeof(buf), " %8s", letter_of(s).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& key : keys) {
    std::snprintf(buf, sizeof(buf), "%.4g%%", key.fmr * 100.0);
    std::string fmr_label = buf;
    std::snprintf(buf, sizeof(buf), "%-10s %-6s", fmr_label.c_str(),
                  key.split.c_str());
    out << buf;
    for (const auto& s : strategies) {
      const ReportRow* cell = nullptr;
      for (const auto& row : rows)
        if (row.fmr == key.fmr && row.split == key.split && row.strategy == s)
          cell = &row;
      if (cell == nullptr || cell->trials == 0) {
        std::snprintf(buf, sizeof(buf), " %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %8.2f", cell->mean * 100.0);
      }
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

// Per-trial detail rows, one line per matrix cell.
inline std::string trials_csv(const CoverageReport& report,
                              const std::vector<std::string>& header_lines) {
  std::ostringstream out;
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "fmr,strategy,trial,train_coverage,test_coverage,dict_size,"
         "evaluations,threshold,achieved_fmr,impostor_pairs,status,error\n";
  for (const auto& cell : report.cells) {
    out << detail::format_short(cell.fmr) << ','
        << strategy_name(cell.strategy) << ',' << cell.trial << ',';
    if (cell.failed) {
      std::string msg = cell.error;
      for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      out << ",,,,,,,failed," << msg << "\n";
    } else {
      out << detail::format_double(cell.train_coverage) << ','
          << detail::format_double(cell.test_coverage) << ','
          << cell.dict_size << ',' << cell.evaluations_used << ','
          << detail::format_double(cell.calibration.threshold) << ','
          << detail::format_double(cell.calibration.achieved_fmr) << ','
          << cell.calibration.impostor_pair_count << ",ok,\n";
    }
  }
  return out.str();
}

}  // namespace printdict
