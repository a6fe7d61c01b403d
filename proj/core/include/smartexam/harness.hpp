#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smartexam/estimators.hpp"
#include "smartexam/simgen.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// One replicated experiment: a generative model, a design, sizes, and a
/// master seed. `association` and `label` are reporting keys; the model
/// itself already embeds the preference mechanism.
struct ScenarioConfig {
  SyntheticModel model;
  DesignSpec design;
  int n = 200;
  int n_pilot = 0;
  int reps = 500;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string association;
  std::string label;
};

struct ScalarStat {
  double value = 0.0;
  double mc_se = 0.0;
};

/// Operating characteristics aggregated over replicates. Per-regime arrays
/// are indexed like all_dtrs(): (-1,-1), (-1,1), (1,-1), (1,1).
struct MetricSet {
  ScalarStat mean_value_of_selected;  // true value of the selected regime
  ScalarStat prob_correct_selection;
  std::array<ScalarStat, 4> selection_prob_per_dtr;
  ScalarStat mean_utility;          // average Pr(preferred treatment), non-responders
  ScalarStat mean_outcome_nonresp;  // average outcome among non-responders
  std::array<ScalarStat, 4> mean_count_per_dtr;
  std::array<ScalarStat, 4> mean_estimate_per_dtr;
  std::array<double, 4> estimate_bias_per_dtr{};
  std::array<double, 4> estimate_se_per_dtr{};  // empirical sd of the estimates
  std::array<double, 4> true_values{};
  Dtr true_optimal;
  int reps = 0;
  int excluded = 0;
};

/// Utility u = Pr(assigned the preferred treatment) from the stored
/// probability of arm +1, and the realized indicator K. Welfare metrics are
/// defined over non-responders only; responder input is a domain error.
struct UtilityValue {
  double u = 0.0;
  int k = 0;
};
UtilityValue participant_utility(const Trajectory& t);

/// Runs config.reps independent replicates (parallel across threads, with
/// per-replicate streams derived from the master seed) and aggregates the
/// metric set in fixed replicate order, so results do not depend on the
/// thread count. Replicates that raise a library error are excluded and
/// counted; the run fails if exclusions exceed 1% of reps.
MetricSet run_replicates(const ScenarioConfig& config);

/// One grid cell: the configuration actually run and its metrics.
struct GridCell {
  ScenarioConfig config;
  MetricSet metrics;
};

/// Axes for a Cartesian scenario grid over a base configuration. Empty axes
/// keep the base value. Association tags are resolved to models through the
/// supplied factory.
struct GridAxes {
  std::vector<int> n;
  std::vector<int> n_pilot;
  std::vector<double> capacity_plus;
  std::vector<double> epsilon;
  std::vector<double> eta;
  std::vector<std::string> association;
  std::vector<DesignKind> kind;
};

using ModelFactory = std::function<SyntheticModel(const std::string& association)>;

std::vector<GridCell> scenario_grid(const ScenarioConfig& base, const GridAxes& axes,
                                    const ModelFactory& factory);

/// Long-format CSV: one row per (scenario, metric[, dtr]) with value and
/// Monte Carlo standard error.
std::string metrics_to_csv(const std::vector<GridCell>& cells);
std::string metrics_to_json(const std::vector<GridCell>& cells);

}  // namespace smartexam
