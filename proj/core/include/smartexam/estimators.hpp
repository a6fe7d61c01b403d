#pragma once

#include <array>
#include <vector>

#include "smartexam/errors.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// Inverse-probability-weighted estimate of one regime's mean outcome.
struct DtrEstimate {
  Dtr dtr;
  double mean = 0.0;
  double variance = 0.0;
  double weight_sum = 0.0;
  int n_consistent = 0;
};

/// Population moments for the large-sample variance of a regime mean:
/// stage probabilities, responder moments, and per-group non-responder
/// moments, all conditional on the regime's stage-1 treatment.
struct TheoreticalMoments {
  double p1 = 0.5;                     // Pr(A1 = d1)
  double pi_resp = 0.5;                // response rate on d1
  std::vector<double> group_probs;     // Pr(G = g | d1, R = 0), sums to 1
  std::vector<double> p2_by_group;     // Pr(A2 = d2 | d1, R = 0, G = g)
  double mu_resp = 0.0;
  double sigma2_resp = 0.0;
  std::vector<double> mu_by_group;
  std::vector<double> sigma2_by_group;
};

/// Trajectory weight for a regime: I(A1=d1)/p1 * {R + (1-R) I(A2=d2)/p2},
/// evaluated with the probabilities stored on the trajectory.
double ipw_weight(const Trajectory& t, const Dtr& d);

/// Weighted mean sum(W Y) / sum(W). Throws NoSupportError when no trajectory
/// carries positive weight.
double ipw_mean(const Dataset& data, const Dtr& d);

/// sum_i (W_i (Y_i - mean))^2 / N^2.
double ipw_variance(const Dataset& data, const Dtr& d, double mean);

/// Mean, variance, weight sum, and consistent count for one regime.
DtrEstimate estimate_dtr(const Dataset& data, const Dtr& d);

/// All four embedded regimes in ascending (d1, d2) order.
std::array<DtrEstimate, 4> estimate_all(const Dataset& data);

/// Regime with the largest estimated mean; exact ties resolve to the
/// lexicographically smallest (d1, d2).
Dtr select_optimal(const std::array<DtrEstimate, 4>& estimates);

/// Large-sample variance of sqrt(N) (mu_hat - mu):
/// (pi/p1) {s2_resp + (mu - mu_resp)^2}
///   + sum_g [(1-pi) pi_g / (p1 p2_g)] {s2_g + (mu - mu_g)^2}.
double asymptotic_variance(const TheoreticalMoments& m, double mu_dtr);

/// Asymptotic covariance of the mean estimators of two regimes sharing d1:
/// (pi/p1) {s2_resp + (mu_resp - mu_a)(mu_resp - mu_b)}. Divide by N for the
/// estimator covariance.
double dtr_covariance(const TheoreticalMoments& m, const Dtr& a, const Dtr& b, double mu_a,
                      double mu_b);

}  // namespace smartexam
