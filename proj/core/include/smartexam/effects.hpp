#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "smartexam/errors.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// Ordered feature columns for one Q-function stage. Names resolve against
/// the dataset schema; "intercept" is the constant-1 column, "a1" the stage-1
/// treatment code, anything else a covariate column name.
struct FeatureSpec {
  std::vector<std::string> main_columns;
  std::vector<std::string> interaction_columns;
};

/// Stage-2 outcome model Y ~ gamma2' H20 + (alpha2' H21) A2, fit on
/// non-responders by ordinary least squares.
struct QStageTwoFit {
  Eigen::VectorXd gamma2;
  Eigen::VectorXd alpha2;
  FeatureSpec features;
  std::size_t n_fit = 0;
};

/// Stage-1 model fit on pseudo-outcomes over all participants.
struct QStageOneFit {
  Eigen::VectorXd gamma1;
  Eigen::VectorXd alpha1;
  FeatureSpec features;
  std::size_t n_fit = 0;
};

/// Raw, normalized, and binned predicted effects for one allocation cohort.
struct EffectEstimates {
  std::vector<double> raw;
  std::vector<double> normalized;
  std::vector<double> binned;
  std::vector<double> bin_edges;  // boundaries between consecutive non-empty bins
  std::vector<double> bin_means;
  int bins = 1;
};

/// Resolves one feature value for a trajectory. Stage-2 rows may reference
/// o1, o2, and a1 columns; throws SchemaError for unknown names.
double feature_value(const Dataset& data, const Trajectory& row, const std::string& name);

Eigen::VectorXd feature_vector(const Dataset& data, const Trajectory& row,
                               const std::vector<std::string>& columns);

/// OLS fit of the stage-2 model over the dataset's non-responders using a
/// rank-revealing QR decomposition. Throws FitError when rows are too few or
/// the design matrix is rank deficient (the message names the collinear
/// columns).
QStageTwoFit fit_q2(const Dataset& data, const FeatureSpec& features);

/// Predicted effect of the excess-demand arm over the other:
/// 2 alpha2' h21 when a2e = +1, the negation when a2e = -1.
double predict_effect(const QStageTwoFit& fit, const Eigen::VectorXd& h21, int a2e);
double predict_effect(const QStageTwoFit& fit, const Dataset& data, const Trajectory& row,
                      int a2e);

/// Center and scale to mean 0, sample sd 1 (n-1 divisor); constant or
/// single-element input maps to all zeros.
std::vector<double> normalize(const std::vector<double>& raw);

/// Equal-frequency binning: sorted values split into `bins` contiguous groups
/// whose sizes differ by at most one (larger groups first); a run of tied
/// values is never split (it joins the bin holding its first element). Each
/// value is replaced by its bin's mean.
EffectEstimates bin(const std::vector<double>& normalized, int bins);

/// normalize + bin in one step.
EffectEstimates make_effect_estimates(const std::vector<double>& raw, int bins);

/// Backward-induction pseudo-outcome: responders keep their observed Y,
/// non-responders get max_a2 Q2(h2, a2) = gamma2' h20 + |alpha2' h21|.
std::vector<double> pseudo_outcome(const QStageTwoFit& fit, const Dataset& data);

/// OLS fit of the stage-1 model over all rows against the pseudo-outcomes.
QStageOneFit fit_q1(const Dataset& data, const std::vector<double>& pseudo,
                    const FeatureSpec& features);

/// 2 alpha1' h11 when a1e = +1, negated when a1e = -1.
double predict_stage1_effect(const QStageOneFit& fit, const Eigen::VectorXd& h11, int a1e);
double predict_stage1_effect(const QStageOneFit& fit, const Dataset& data, const Trajectory& row,
                             int a1e);

/// JSON (de)serialization of fitted effect models; schema_version 1.
std::string effect_model_to_json(const QStageTwoFit& stage2, const QStageOneFit* stage1,
                                 const EffectEstimates* binning);
QStageTwoFit effect_model_from_json(const std::string& json_text);

}  // namespace smartexam
