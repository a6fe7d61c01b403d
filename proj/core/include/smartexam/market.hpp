#pragma once

#include <utility>
#include <vector>

#include "smartexam/errors.hpp"
#include "smartexam/trial.hpp"

namespace smartexam {

/// Inputs for clearing one stage-1 arm's stage-2 market. `zetas` are the
/// binned, normalized predicted effects of the excess-demand treatment over
/// the oversupplied one (orient with `determine_excess_arm` before filling
/// them in). Vectors are indexed by the arm's non-responders.
struct MarketInputs {
  std::vector<int> lambdas;
  std::vector<double> zetas;
  ByArm<int> capacities;
  double epsilon = 0.0;
  double eta = -1.0;
  double budget_m = 1.0;
  ClearingControls controls;
};

/// Result of a clearing run. p_final holds the randomization probabilities
/// for the excess-demand treatment a2e; the oversupplied arm's probability is
/// the complement.
struct MarketState {
  int a2e = 1;
  int a2o = -1;
  double beta = 0.0;
  std::vector<double> prices;
  std::vector<double> p_raw;
  double q = 0.0;
  std::vector<double> p_final;
  ByArm<double> excess{0.0, 0.0};
  double error = 0.0;
  long iterations = 0;      // total beta updates performed
  double kappa_used = 0.0;  // tolerance after any relaxations
};

/// Thrown when the clearing loop exhausts its hard iteration ceiling. Carries
/// the lowest-error state observed so callers can inspect how close it got.
class NonConvergenceError : public RuntimeError {
 public:
  NonConvergenceError(const std::string& what, MarketState best)
      : RuntimeError(what), best_state(std::move(best)) {}
  MarketState best_state;
};

/// Excess-demand arm: the a2 whose preference count meets or exceeds its
/// capacity. A tie on both arms resolves to +1.
std::pair<int, int> determine_excess_arm(const std::vector<int>& lambdas,
                                         const ByArm<int>& capacities);

/// Initial price intercept: -max_i |zeta_i|.
double init_beta(const std::vector<double>& zetas);

/// Per-participant price of a unit of a2e randomization probability,
/// Psi_i = eta * zeta_i + beta. eta < 0 makes higher predicted effects cheaper.
std::vector<double> prices(double eta, double beta, const std::vector<double>& zetas);

/// Closed-form solution of the one-variable utility maximization under the
/// budget: a participant who prefers a2e buys all of it that the budget
/// allows (demand 1 when the price is non-positive, else min(1, m/price));
/// a participant who prefers the other arm demands 0.
double individual_demand(double price, int lambda, int a2e, double budget_m);

/// Smallest common mixing weight q such that every
/// (1-q) p_raw_i + q p0 lands in [epsilon, 1-epsilon], and the mixed vector.
/// p0 is the non-individualized probability C_a2e / N_nr and must itself lie
/// inside the band.
std::pair<double, std::vector<double>> epsilon_mix(const std::vector<double>& p_raw,
                                                   double p0, double epsilon);

/// d_a2 = sum_i p_i - C_a2 for the excess arm; the oversupplied arm's excess
/// is the negation.
ByArm<double> excess_demand(const std::vector<double>& p_final, const ByArm<int>& capacities,
                            int a2e);

/// (d_e^2 + d_o^2) / (C_e + C_o).
double clear_error(const ByArm<double>& excess, const ByArm<int>& capacities);

/// beta + d_a2e / l. Positive excess demand raises all prices.
double update_beta(double beta, double excess_a2e, double step_l);

/// Runs the full price-adjustment loop: initialize beta, then iterate
/// price -> demand -> mix -> excess demand -> error until error <= kappa,
/// resetting beta and relaxing kappa by 0.002 after max_iter consecutive
/// updates without success. Homogeneous inputs (a single (lambda, zeta)
/// group) reduce directly to the non-individualized probability C_a2e / N_nr,
/// which is the exact fixed point in that case.
///
/// Pure function of its inputs: equal (lambda, zeta) pairs always receive
/// bit-identical probabilities.
MarketState clear_market(const MarketInputs& inputs);

/// a2e iff draw < p_final_i (draw taken from [0,1)).
int draw_assignment(double p_final_i, double unit_uniform_draw, int a2e, int a2o);

/// Group indices in {1..B'}: participants sharing (lambda, zeta) share an
/// index, assigned in ascending (lambda, zeta) lexicographic order.
std::vector<int> group_index(const std::vector<int>& lambdas, const std::vector<double>& zetas);

}  // namespace smartexam
