#include "smartexam/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace smartexam {

namespace {

void check_inputs(const MarketInputs& in) {
  const std::size_t n = in.lambdas.size();
  if (n == 0) throw ConfigError("market: empty participant list");
  if (in.zetas.size() != n) throw ConfigError("market: lambdas and zetas differ in length");
  if (in.capacities.minus + in.capacities.plus != static_cast<int>(n))
    throw ConfigError("market: capacities must sum to the number of non-responders");
  for (int v : in.lambdas)
    if (v != 0 && v != 1) throw ConfigError("market: lambda entries must be 0 or 1");
  if (!(in.eta > -1.0 && in.eta < 0.0)) throw ConfigError("market: eta must lie in (-1,0)");
  if (!(in.budget_m > 0.0)) throw ConfigError("market: budget must be positive");
  if (in.epsilon < 0.0 || in.epsilon > 0.5) throw ConfigError("market: epsilon must lie in [0,0.5]");
}

bool prefers(int lambda, int a2e) { return a2e == 1 ? lambda == 1 : lambda == 0; }

}  // namespace

std::pair<int, int> determine_excess_arm(const std::vector<int>& lambdas,
                                         const ByArm<int>& capacities) {
  if (lambdas.empty()) throw ConfigError("market: empty preference vector");
  int demand_plus = 0;
  for (int v : lambdas) demand_plus += (v == 1);
  if (demand_plus >= capacities.plus) return {1, -1};
  return {-1, 1};
}

double init_beta(const std::vector<double>& zetas) {
  if (zetas.empty()) throw ConfigError("market: empty effect vector");
  double m = 0.0;
  for (double z : zetas) m = std::max(m, std::abs(z));
  return -m;
}

std::vector<double> prices(double eta, double beta, const std::vector<double>& zetas) {
  std::vector<double> out(zetas.size());
  for (std::size_t i = 0; i < zetas.size(); ++i) out[i] = eta * zetas[i] + beta;
  return out;
}

double individual_demand(double price, int lambda, int a2e, double budget_m) {
  if (!prefers(lambda, a2e)) return 0.0;
  if (price <= 0.0) return 1.0;
  return std::min(1.0, budget_m / price);
}

std::pair<double, std::vector<double>> epsilon_mix(const std::vector<double>& p_raw, double p0,
                                                   double epsilon) {
  if (p0 < epsilon - 1e-15 || p0 > 1.0 - epsilon + 1e-15)
    throw InvalidDesignError(
        "epsilon exceeds the largest value admitted by the capacities (p0 outside [eps, 1-eps])");
  double q = 0.0;
  if (epsilon > 0.0) {
    for (double p : p_raw) {
      if (p < epsilon)
        q = std::max(q, (epsilon - p) / (p0 - p));
      else if (p > 1.0 - epsilon)
        q = std::max(q, (p - (1.0 - epsilon)) / (p - p0));
    }
  }
  std::vector<double> mixed(p_raw.size());
  for (std::size_t i = 0; i < p_raw.size(); ++i) mixed[i] = (1.0 - q) * p_raw[i] + q * p0;
  return {q, std::move(mixed)};
}

ByArm<double> excess_demand(const std::vector<double>& p_final, const ByArm<int>& capacities,
                            int a2e) {
  double total = std::accumulate(p_final.begin(), p_final.end(), 0.0);
  ByArm<double> d;
  d[a2e] = total - capacities[a2e];
  d[-a2e] = (static_cast<double>(p_final.size()) - total) - capacities[-a2e];
  return d;
}

double clear_error(const ByArm<double>& excess, const ByArm<int>& capacities) {
  double total_capacity = capacities.minus + capacities.plus;
  if (total_capacity <= 0.0) throw ConfigError("market: total capacity must be positive");
  return (excess.minus * excess.minus + excess.plus * excess.plus) / total_capacity;
}

double update_beta(double beta, double excess_a2e, double step_l) {
  if (!(step_l > 0.0)) throw ConfigError("market: step size must be positive");
  return beta + excess_a2e / step_l;
}

MarketState clear_market(const MarketInputs& in) {
  check_inputs(in);
  const int n = static_cast<int>(in.lambdas.size());
  auto [a2e, a2o] = determine_excess_arm(in.lambdas, in.capacities);
  const double p0 = static_cast<double>(in.capacities[a2e]) / n;
  const double step_l = in.controls.step_l > 0.0 ? in.controls.step_l : static_cast<double>(n);

  MarketState state;
  state.a2e = a2e;
  state.a2o = a2o;

  // Single (lambda, zeta) group: every participant has the same utility and
  // budget, so the only capacity-feasible allocation is the balanced one.
  bool homogeneous = true;
  for (int i = 1; i < n && homogeneous; ++i)
    homogeneous = in.lambdas[i] == in.lambdas[0] && in.zetas[i] == in.zetas[0];
  if (homogeneous) {
    if (p0 < in.epsilon - 1e-15 || p0 > 1.0 - in.epsilon + 1e-15)
      throw InvalidDesignError(
          "epsilon exceeds the largest value admitted by the capacities (p0 outside [eps, 1-eps])");
    state.beta = init_beta(in.zetas);
    state.prices = prices(in.eta, state.beta, in.zetas);
    state.p_raw.assign(n, individual_demand(state.prices[0], in.lambdas[0], a2e, in.budget_m));
    state.q = 0.0;
    state.p_final.assign(n, p0);
    state.excess = ByArm<double>{0.0, 0.0};
    state.error = 0.0;
    state.iterations = 0;
    state.kappa_used = in.controls.kappa0;
    return state;
  }

  double kappa = in.controls.kappa0;
  double beta = init_beta(in.zetas);
  long total_updates = 0;
  int updates_since_reset = 0;

  MarketState best;
  best.error = std::numeric_limits<double>::infinity();

  auto evaluate = [&](double b, MarketState& out) {
    out.a2e = a2e;
    out.a2o = a2o;
    out.beta = b;
    out.prices = prices(in.eta, b, in.zetas);
    out.p_raw.resize(n);
    for (int i = 0; i < n; ++i)
      out.p_raw[i] = individual_demand(out.prices[i], in.lambdas[i], a2e, in.budget_m);
    auto [q, mixed] = epsilon_mix(out.p_raw, p0, in.epsilon);
    out.q = q;
    out.p_final = std::move(mixed);
    out.excess = excess_demand(out.p_final, in.capacities, a2e);
    out.error = clear_error(out.excess, in.capacities);
  };

  MarketState current;
  evaluate(beta, current);
  while (current.error > kappa) {
    if (current.error < best.error) best = current;
    if (total_updates >= in.controls.iteration_ceiling) {
      best.iterations = total_updates;
      best.kappa_used = kappa;
      throw NonConvergenceError("market failed to clear within the iteration ceiling", best);
    }
    if (updates_since_reset >= in.controls.max_iter) {
      updates_since_reset = 0;
      kappa += 0.002;
      beta = init_beta(in.zetas);
    } else {
      ++updates_since_reset;
      beta = update_beta(beta, current.excess[a2e], step_l);
    }
    ++total_updates;
    evaluate(beta, current);
  }

  current.iterations = total_updates;
  current.kappa_used = kappa;
  return current;
}

int draw_assignment(double p_final_i, double unit_uniform_draw, int a2e, int a2o) {
  return unit_uniform_draw < p_final_i ? a2e : a2o;
}

std::vector<int> group_index(const std::vector<int>& lambdas, const std::vector<double>& zetas) {
  if (lambdas.size() != zetas.size())
    throw ConfigError("group_index: lambdas and zetas differ in length");
  std::map<std::pair<int, double>, int> order;
  for (std::size_t i = 0; i < lambdas.size(); ++i) order[{lambdas[i], zetas[i]}] = 0;
  int next = 1;
  for (auto& [key, idx] : order) idx = next++;
  std::vector<int> out(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) out[i] = order[{lambdas[i], zetas[i]}];
  return out;
}

}  // namespace smartexam
