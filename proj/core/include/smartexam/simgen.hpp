#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "smartexam/effects.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// One covariate's generating distribution.
struct CovariateSpec {
  enum class Dist { Bernoulli, Normal };
  std::string name;
  Dist dist = Dist::Normal;
  double p = 0.5;     // Bernoulli success probability
  double mean = 0.0;  // Normal parameters
  double sd = 1.0;

  double draw(std::mt19937_64& rng) const;
  double expectation() const;
};

/// A linear outcome model: sum of coefficient * product-of-factors terms,
/// where a factor is "1", "a1", "a2", or a covariate column, plus Gaussian
/// noise. Example term: {"o21*a2", -0.5}.
struct OutcomeModel {
  std::vector<std::pair<std::string, double>> terms;
  double noise_sd = 1.0;

  double mean_response(const Dataset& schema, const Trajectory& row) const;
  /// Effect of a2 = +1 over a2 = -1 at fixed covariates: 2 * d(mean)/d(a2).
  double a2_contrast(const Dataset& schema, const Trajectory& row) const;
};

/// How the tailoring covariates arise.
struct TailoringSpec {
  enum class Kind {
    Independent,        // each column drawn from its own distribution
    BernoulliMixtureByA2  // one binary column; per-a2 rates blended by capacity
  };
  Kind kind = Kind::Independent;
  std::vector<CovariateSpec> columns;  // Independent
  std::string name;                    // BernoulliMixtureByA2 column name
  double p_given_plus = 0.5;           // nominal rate had a2 = +1 been assigned
  double p_given_minus = 0.5;
};

/// How stage-2 preferences arise among non-responders.
struct PreferenceSpec {
  enum class Kind {
    LogisticOnZeta,    // Pr(lambda=1) = logistic(slope * true_zeta + intercept)
    TableOnCovariate,  // Pr(lambda=1 | column = 0/1)
    Constant
  };
  Kind kind = Kind::LogisticOnZeta;
  double slope = 0.0;
  double intercept = 0.0;
  std::string column;
  double p_given_0 = 0.5;
  double p_given_1 = 0.5;
  double p_const = 0.5;
};

/// Complete generative specification of a two-stage trial population.
struct SyntheticModel {
  std::vector<CovariateSpec> baseline;
  ByArm<double> response_rate{0.5, 0.5};
  TailoringSpec tailoring;
  OutcomeModel outcome_nonresponder;
  OutcomeModel outcome_responder;
  PreferenceSpec preference;
  FeatureSpec q2_features;
  FeatureSpec q1_features;

  std::vector<std::string> o1_names() const;
  std::vector<std::string> o2_names() const;
};

/// The benchmark simulation model: no baseline covariates, response rate 0.5,
/// two standard-normal tailoring covariates, and outcome
/// Y = 2 - A1 + A2 + 0.5 A1 A2 - 0.5 O21 A2 + 0.5 O22 A2 + N(0,9) for
/// non-responders, Y = 3 + A1 + N(0,9) for responders.
/// `negative_association` selects which logistic links preferences to the
/// true effect of a2 = +1.
SyntheticModel table1_model(bool negative_association);

/// The ADHD application model: four baseline covariates, per-arm response
/// rates 0.31 / 0.37, a binary adherence tailoring covariate with per-a2
/// rates 0.42 / 0.53, unit-variance outcome models, and preference scenarios
/// S1-S3 keyed on adherence.
SyntheticModel adhd_model(const std::string& scenario);

/// True conditional effect of a2 = +1 over a2 = -1 for a non-responder with
/// the given stage-1 treatment and tailoring covariates.
double true_zeta(const SyntheticModel& model, int a1, const std::vector<double>& o2_row);

/// Bernoulli preference draw for one non-responder.
int gen_preference(const SyntheticModel& model, const PreferenceSpec& pref, double zeta_true,
                   const std::vector<double>& o2_row, const std::vector<std::string>& o2_names,
                   std::mt19937_64& rng);

/// Expected outcome of a regime under the model, composed analytically from
/// the response rates and the outcome models at the covariate means.
double true_dtr_value(const SyntheticModel& model, const Dtr& d);

/// Monte Carlo estimate of the same quantity (independent check and fallback
/// for models without an analytic path).
double true_dtr_value_mc(const SyntheticModel& model, const Dtr& d, int draws,
                         std::mt19937_64& rng);

/// Optimal regime under the model by true value.
Dtr true_optimal_dtr(const SyntheticModel& model);

/// Generates a complete trial. For SmartExam designs `effect_fit` supplies
/// the stage-2 coefficients (from a pilot or burn-in fit); allocation then
/// normalizes and bins the predicted effects per stage-1 arm and clears the
/// stage-2 market per arm. Stored p1/p2 are exactly the probabilities the
/// draws used.
Dataset gen_trial(const SyntheticModel& model, const DesignSpec& design, int n,
                  const QStageTwoFit* effect_fit, std::mt19937_64& rng);

/// Balanced SMART used as external pilot data.
Dataset gen_pilot(const SyntheticModel& model, int n_pilot, std::mt19937_64& rng);

/// SMART-AR-EXAM: a balanced burn-in cohort of design.n_min participants is
/// generated and fit first, then the remainder is allocated by market
/// clearing with capacities realized on the remainder's non-responder counts.
/// If the burn-in fit is rank deficient the remainder falls back to balanced
/// allocation and the dataset is flagged.
Dataset run_ar_exam(const SyntheticModel& model, const DesignSpec& design, int n,
                    std::mt19937_64& rng);

}  // namespace smartexam
