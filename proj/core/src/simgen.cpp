#include "smartexam/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smartexam/market.hpp"
#include "smartexam/rng.hpp"

namespace smartexam {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::string> split_factors(const std::string& term) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(term);
  while (std::getline(in, cur, '*'))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double factor_value(const Dataset& schema, const Trajectory& row, const std::string& factor) {
  if (factor == "a2") return static_cast<double>(row.a2);
  return feature_value(schema, row, factor);
}

}  // namespace

double CovariateSpec::draw(std::mt19937_64& rng) const {
  switch (dist) {
    case Dist::Bernoulli: return static_cast<double>(bernoulli(rng, p));
    case Dist::Normal: return normal(rng, mean, sd);
  }
  return 0.0;
}

double CovariateSpec::expectation() const {
  return dist == Dist::Bernoulli ? p : mean;
}

double OutcomeModel::mean_response(const Dataset& schema, const Trajectory& row) const {
  double total = 0.0;
  for (const auto& [term, coef] : terms) {
    double prod = coef;
    for (const auto& f : split_factors(term)) prod *= factor_value(schema, row, f);
    total += prod;
  }
  return total;
}

double OutcomeModel::a2_contrast(const Dataset& schema, const Trajectory& row) const {
  double slope = 0.0;
  for (const auto& [term, coef] : terms) {
    auto factors = split_factors(term);
    int a2_count = static_cast<int>(std::count(factors.begin(), factors.end(), "a2"));
    if (a2_count == 0) continue;
    if (a2_count > 1) throw ConfigError("outcome model: term '" + term + "' is nonlinear in a2");
    double prod = coef;
    for (const auto& f : factors)
      if (f != "a2") prod *= factor_value(schema, row, f);
    slope += prod;
  }
  return 2.0 * slope;
}

std::vector<std::string> SyntheticModel::o1_names() const {
  std::vector<std::string> out;
  for (const auto& c : baseline) out.push_back(c.name);
  return out;
}

std::vector<std::string> SyntheticModel::o2_names() const {
  if (tailoring.kind == TailoringSpec::Kind::BernoulliMixtureByA2) return {tailoring.name};
  std::vector<std::string> out;
  for (const auto& c : tailoring.columns) out.push_back(c.name);
  return out;
}

SyntheticModel table1_model(bool negative_association) {
  SyntheticModel m;
  m.response_rate = ByArm<double>{0.5, 0.5};
  m.tailoring.kind = TailoringSpec::Kind::Independent;
  m.tailoring.columns = {CovariateSpec{"o21", CovariateSpec::Dist::Normal, 0.5, 0.0, 1.0},
                         CovariateSpec{"o22", CovariateSpec::Dist::Normal, 0.5, 0.0, 1.0}};
  m.outcome_nonresponder.terms = {{"1", 2.0},      {"a1", -1.0},    {"a2", 1.0},
                                  {"a1*a2", 0.5},  {"o21*a2", -0.5}, {"o22*a2", 0.5}};
  m.outcome_nonresponder.noise_sd = 3.0;
  m.outcome_responder.terms = {{"1", 3.0}, {"a1", 1.0}};
  m.outcome_responder.noise_sd = 3.0;
  m.preference.kind = PreferenceSpec::Kind::LogisticOnZeta;
  if (negative_association) {
    m.preference.slope = -0.2;
    m.preference.intercept = 1.0;
  } else {
    m.preference.slope = 0.2;
    m.preference.intercept = 0.5;
  }
  m.q2_features.main_columns = {"intercept", "a1", "o21", "o22"};
  m.q2_features.interaction_columns = {"intercept", "a1", "o21", "o22"};
  m.q1_features.main_columns = {"intercept"};
  m.q1_features.interaction_columns = {"intercept"};
  return m;
}

SyntheticModel adhd_model(const std::string& scenario) {
  SyntheticModel m;
  m.baseline = {CovariateSpec{"o11", CovariateSpec::Dist::Bernoulli, 0.35, 0.0, 1.0},
                CovariateSpec{"o12", CovariateSpec::Dist::Normal, 0.5, -0.12, 1.0},
                CovariateSpec{"o13", CovariateSpec::Dist::Bernoulli, 0.31, 0.0, 1.0},
                CovariateSpec{"o14", CovariateSpec::Dist::Bernoulli, 0.81, 0.0, 1.0}};
  m.response_rate = ByArm<double>{0.37, 0.31};  // minus, plus
  m.tailoring.kind = TailoringSpec::Kind::BernoulliMixtureByA2;
  m.tailoring.name = "o22";
  m.tailoring.p_given_plus = 0.42;
  m.tailoring.p_given_minus = 0.53;
  m.outcome_nonresponder.terms = {{"1", 2.69},   {"o11", -0.25},  {"o12", -0.30},
                                  {"o13", 0.04}, {"o14", 0.49},   {"a1", 0.08},
                                  {"o22", -0.09}, {"a2", 0.86},   {"a1*a2", 0.19},
                                  {"o22*a2", -1.18}};
  m.outcome_nonresponder.noise_sd = 1.0;
  m.outcome_responder.terms = {{"1", 3.00},   {"o11", -0.62}, {"o12", -0.41},
                               {"o13", -0.10}, {"o14", 0.38},  {"a1", 0.10}};
  m.outcome_responder.noise_sd = 1.0;
  m.preference.kind = PreferenceSpec::Kind::TableOnCovariate;
  m.preference.column = "o22";
  if (scenario == "S1") {
    m.preference.p_given_0 = 0.8;
    m.preference.p_given_1 = 0.4;
  } else if (scenario == "S2") {
    m.preference.p_given_0 = 0.4;
    m.preference.p_given_1 = 0.3;
  } else if (scenario == "S3") {
    m.preference.p_given_0 = 0.8;
    m.preference.p_given_1 = 0.6;
  } else {
    throw ConfigError("adhd_model: unknown scenario '" + scenario + "' (expected S1, S2, or S3)");
  }
  m.q2_features.main_columns = {"intercept", "o11", "o12", "o13", "o14", "a1", "o22"};
  m.q2_features.interaction_columns = {"intercept", "a1", "o22"};
  m.q1_features.main_columns = {"intercept", "o11", "o12", "o13", "o14"};
  m.q1_features.interaction_columns = {"intercept"};
  return m;
}

double true_zeta(const SyntheticModel& model, int a1, const std::vector<double>& o2_row) {
  Dataset schema;
  schema.o1_names = model.o1_names();
  schema.o2_names = model.o2_names();
  Trajectory row;
  row.a1 = a1;
  row.o2 = o2_row;
  row.o1.assign(schema.o1_names.size(), 0.0);
  return model.outcome_nonresponder.a2_contrast(schema, row);
}

int gen_preference(const SyntheticModel& model, const PreferenceSpec& pref, double zeta_true,
                   const std::vector<double>& o2_row, const std::vector<std::string>& o2_names,
                   std::mt19937_64& rng) {
  double p = 0.5;
  switch (pref.kind) {
    case PreferenceSpec::Kind::LogisticOnZeta:
      p = logistic(pref.slope * zeta_true + pref.intercept);
      break;
    case PreferenceSpec::Kind::TableOnCovariate: {
      auto it = std::find(o2_names.begin(), o2_names.end(), pref.column);
      if (it == o2_names.end())
        throw ConfigError("preference model references unknown column '" + pref.column + "'");
      double v = o2_row[static_cast<std::size_t>(it - o2_names.begin())];
      p = v != 0.0 ? pref.p_given_1 : pref.p_given_0;
      break;
    }
    case PreferenceSpec::Kind::Constant:
      p = pref.p_const;
      break;
  }
  (void)model;
  return bernoulli(rng, p);
}

namespace {

/// Tailoring covariate means for the analytic regime value, referenced to a
/// balanced design (the mixture-by-a2 covariate uses the 50/50 blend).
std::vector<double> tailoring_means(const SyntheticModel& model) {
  if (model.tailoring.kind == TailoringSpec::Kind::BernoulliMixtureByA2)
    return {0.5 * model.tailoring.p_given_plus + 0.5 * model.tailoring.p_given_minus};
  std::vector<double> out;
  for (const auto& c : model.tailoring.columns) out.push_back(c.expectation());
  return out;
}

double tailoring_mixture_rate(const TailoringSpec& t, const ByArm<int>& capacities, int n_nr) {
  double frac_plus = n_nr > 0 ? static_cast<double>(capacities.plus) / n_nr : 0.5;
  return frac_plus * t.p_given_plus + (1.0 - frac_plus) * t.p_given_minus;
}

}  // namespace

double true_dtr_value(const SyntheticModel& model, const Dtr& d) {
  Dataset schema;
  schema.o1_names = model.o1_names();
  schema.o2_names = model.o2_names();
  Trajectory at_means;
  at_means.a1 = d.d1;
  for (const auto& c : model.baseline) at_means.o1.push_back(c.expectation());

  Trajectory resp = at_means;
  resp.r = 1;
  resp.a2 = 0;
  double mu_resp = model.outcome_responder.mean_response(schema, resp);

  Trajectory nonresp = at_means;
  nonresp.o2 = tailoring_means(model);
  nonresp.a2 = d.d2;
  double mu_nonresp = model.outcome_nonresponder.mean_response(schema, nonresp);

  double pi = model.response_rate[d.d1];
  return pi * mu_resp + (1.0 - pi) * mu_nonresp;
}

double true_dtr_value_mc(const SyntheticModel& model, const Dtr& d, int draws,
                         std::mt19937_64& rng) {
  if (draws < 1) throw ConfigError("true_dtr_value_mc: draws must be >= 1");
  Dataset schema;
  schema.o1_names = model.o1_names();
  schema.o2_names = model.o2_names();
  double total = 0.0;
  double mix = 0.5 * model.tailoring.p_given_plus + 0.5 * model.tailoring.p_given_minus;
  for (int i = 0; i < draws; ++i) {
    Trajectory t;
    t.a1 = d.d1;
    for (const auto& c : model.baseline) t.o1.push_back(c.draw(rng));
    t.r = bernoulli(rng, model.response_rate[d.d1]);
    if (t.r == 1) {
      t.a2 = 0;
      total += model.outcome_responder.mean_response(schema, t) +
               normal(rng, 0.0, model.outcome_responder.noise_sd);
    } else {
      if (model.tailoring.kind == TailoringSpec::Kind::BernoulliMixtureByA2)
        t.o2 = {static_cast<double>(bernoulli(rng, mix))};
      else
        for (const auto& c : model.tailoring.columns) t.o2.push_back(c.draw(rng));
      t.a2 = d.d2;
      total += model.outcome_nonresponder.mean_response(schema, t) +
               normal(rng, 0.0, model.outcome_nonresponder.noise_sd);
    }
  }
  return total / draws;
}

Dtr true_optimal_dtr(const SyntheticModel& model) {
  Dtr best = all_dtrs()[0];
  double best_value = true_dtr_value(model, best);
  for (const auto& d : all_dtrs()) {
    double v = true_dtr_value(model, d);
    if (v > best_value) {
      best = d;
      best_value = v;
    }
  }
  return best;
}

namespace {

/// Stage-2 allocation for the non-responders of one stage-1 arm; rows are
/// indices into data.rows, in enrollment order.
void allocate_arm(Dataset& data, const std::vector<std::size_t>& rows,
                  const SyntheticModel& model, const DesignSpec& design,
                  const QStageTwoFit* effect_fit, std::mt19937_64& rng) {
  const int n_nr = static_cast<int>(rows.size());
  if (n_nr == 0) return;

  ByArm<int> capacities = realize_capacities(design.capacity_fraction[data.rows[rows[0]].a1], n_nr);

  // Tailoring covariates and preferences exist before any stage-2 assignment.
  const double mix = tailoring_mixture_rate(model.tailoring, capacities, n_nr);
  std::vector<int> lambdas(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Trajectory& t = data.rows[rows[k]];
    if (model.tailoring.kind == TailoringSpec::Kind::BernoulliMixtureByA2)
      t.o2 = {static_cast<double>(bernoulli(rng, mix))};
    else
      for (const auto& c : model.tailoring.columns) t.o2.push_back(c.draw(rng));
    double zeta = true_zeta(model, t.a1, t.o2);
    lambdas[k] = gen_preference(model, model.preference, zeta, t.o2, data.o2_names, rng);
    t.lambda = lambdas[k];
  }

  if (design.kind == DesignKind::Smart) {
    const double p_plus = design.capacity_fraction[data.rows[rows[0]].a1];
    for (std::size_t k = 0; k < rows.size(); ++k) {
      Trajectory& t = data.rows[rows[k]];
      t.a2 = draw_assignment(p_plus, uniform01(rng), 1, -1);
      t.p2 = t.a2 == 1 ? p_plus : 1.0 - p_plus;
    }
    return;
  }

  if (!effect_fit)
    throw ConfigError("gen_trial: individualized designs require a fitted effect model");

  auto [a2e, a2o] = determine_excess_arm(lambdas, capacities);
  std::vector<double> zeta_hat(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    zeta_hat[k] = predict_effect(*effect_fit, data, data.rows[rows[k]], a2e);
  EffectEstimates est = make_effect_estimates(zeta_hat, design.bins);

  MarketInputs inputs;
  inputs.lambdas = lambdas;
  inputs.zetas = est.binned;
  inputs.capacities = capacities;
  inputs.epsilon = design.epsilon;
  inputs.eta = design.eta;
  inputs.budget_m = design.budget_m;
  inputs.controls = design.controls;
  MarketState market = clear_market(inputs);

  std::vector<int> groups = group_index(lambdas, est.binned);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Trajectory& t = data.rows[rows[k]];
    double p_e = market.p_final[k];
    t.a2 = draw_assignment(p_e, uniform01(rng), a2e, a2o);
    t.p2 = t.a2 == a2e ? p_e : 1.0 - p_e;
    t.g = groups[k];
  }
}

Dataset gen_trial_impl(const SyntheticModel& model, const DesignSpec& design, int n,
                       const QStageTwoFit* effect_fit, std::mt19937_64& rng) {
  if (n < 1) throw ConfigError("gen_trial: n must be >= 1");
  Dataset data;
  data.o1_names = model.o1_names();
  data.o2_names = model.o2_names();
  data.rows.resize(static_cast<std::size_t>(n));

  // Stage 1: baseline covariates, balanced treatment, response status.
  for (auto& t : data.rows) {
    for (const auto& c : model.baseline) t.o1.push_back(c.draw(rng));
    t.a1 = bernoulli(rng, 0.5) == 1 ? 1 : -1;
    t.p1 = 0.5;
    t.r = bernoulli(rng, model.response_rate[t.a1]);
  }

  // Stage 2: per-arm batch allocation of non-responders (arm -1 first).
  for (int a1 : {-1, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.rows.size(); ++i)
      if (data.rows[i].a1 == a1 && data.rows[i].r == 0) rows.push_back(i);
    allocate_arm(data, rows, model, design, effect_fit, rng);
  }

  // Outcomes last, in enrollment order.
  for (auto& t : data.rows) {
    const OutcomeModel& m = t.r == 1 ? model.outcome_responder : model.outcome_nonresponder;
    t.y = m.mean_response(data, t) + normal(rng, 0.0, m.noise_sd);
  }
  return data;
}

}  // namespace

Dataset gen_trial(const SyntheticModel& model, const DesignSpec& design, int n,
                  const QStageTwoFit* effect_fit, std::mt19937_64& rng) {
  if (design.kind == DesignKind::SmartArExam) return run_ar_exam(model, design, n, rng);
  return gen_trial_impl(model, design, n, effect_fit, rng);
}

Dataset gen_pilot(const SyntheticModel& model, int n_pilot, std::mt19937_64& rng) {
  DesignSpec balanced;
  balanced.kind = DesignKind::Smart;
  balanced.capacity_fraction = ByArm<double>{0.5, 0.5};
  return gen_trial_impl(model, balanced, n_pilot, nullptr, rng);
}

Dataset run_ar_exam(const SyntheticModel& model, const DesignSpec& design, int n,
                    std::mt19937_64& rng) {
  if (n < design.n_min) throw ConfigError("run_ar_exam: n must be >= n_min");
  Dataset burn_in = gen_pilot(model, design.n_min, rng);
  if (n == design.n_min) return burn_in;

  bool fallback = false;
  QStageTwoFit fit;
  try {
    fit = fit_q2(burn_in, model.q2_features);
  } catch (const FitError&) {
    fallback = true;
  }

  Dataset remainder;
  if (fallback) {
    remainder = gen_pilot(model, n - design.n_min, rng);
  } else {
    DesignSpec exam = design;
    exam.kind = DesignKind::SmartExam;
    remainder = gen_trial_impl(model, exam, n - design.n_min, &fit, rng);
  }

  Dataset combined = std::move(burn_in);
  combined.ar_fallback = fallback;
  combined.rows.insert(combined.rows.end(), remainder.rows.begin(), remainder.rows.end());
  return combined;
}

}  // namespace smartexam
