#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bar/boolnet.hpp"
#include "bar/infer.hpp"
#include "bar/model.hpp"
#include "bar/simulate.hpp"

namespace bar {

struct SweepConfig {
  enum class Source { Model, Generator, BooleanNet };
  Source source = Source::Generator;

  std::optional<BarModel> model;  // Source::Model
  RandomModelSpec generator;      // Source::Generator
  /// Draw a fresh model (or network) for every trial instead of one for the sweep.
  bool per_trial = false;

  std::optional<BooleanNetwork> network;  // Source::BooleanNet, from a rules file
  std::size_t net_p = 43;                 // random AND/OR network otherwise
  std::size_t net_fan_in = 2;
  double net_noise = 0.1;
  std::size_t net_burn_in = 100;
  bool score_signs = false;  // boolean nets: compare signs with literal negations

  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  ObserverConfig observer;
  InitSpec init = InitSpec::burn_in();
  std::string out;
  std::size_t threads = 1;
  /// wall_ms is written as 0 unless set, keeping the CSV byte-reproducible.
  bool record_wall_time = false;
};

/// Throws ConfigError on an inconsistent configuration, e.g. a non-increasing
/// n grid or tau > a_min / 4.
void validate(const SweepConfig& config);

/// JSON form used by the CLI. Keys: source ("model"|"generator"|"boolean_net"),
/// model (object), generator {p, d or degrees, a_min, b_min, b_max, rho_w,
/// sign_prob}, per_trial, rules (text), network {p, fan_in, noise, burn_in},
/// score_signs, n_grid, trials, seed, mode, d, tau, degrees, init
/// ("burn_in"|"stationary"), out, threads, record_wall_time.
SweepConfig sweep_config_from_json(const std::string& text);

struct SweepRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  RecoveryMetrics metrics;
  bool signed_scored = true;
  double wall_ms = 0.0;
  std::string error;  // non-empty when the trial failed; metrics are then NaN
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (n, trial)
};

/// Runs every (n, trial) cell, `threads` at a time, and writes the CSV to
/// config.out when it is non-empty (IOError if it cannot be opened).
SweepResult run_sweep(const SweepConfig& config);

/// `n,trial,seed,exact_unsigned,exact_signed,edge_recall,edge_accuracy,wall_ms`,
/// then per n: the trial rows followed by one row with trial = mean. Failed
/// trials count as 0 in the means.
void write_sweep_csv(const SweepResult& result, std::ostream& out);

}  // namespace bar
