#include "smartexam/config.hpp"

#include <set>

#include <json.hpp>

namespace smartexam {

namespace {

using nlohmann::json;

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j[key].get<double>();
}

CovariateSpec covariate_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"name", "dist", "p", "mean", "sd"}, where);
  CovariateSpec c;
  if (!j.contains("name")) throw ConfigError(where + ": missing 'name'");
  c.name = j["name"].get<std::string>();
  std::string dist = j.value("dist", "normal");
  if (dist == "bernoulli") {
    c.dist = CovariateSpec::Dist::Bernoulli;
    c.p = get_number(j, "p", where);
  } else if (dist == "normal") {
    c.dist = CovariateSpec::Dist::Normal;
    c.mean = get_number(j, "mean", where);
    c.sd = get_number(j, "sd", where);
  } else {
    throw ConfigError(where + ": unknown dist '" + dist + "'");
  }
  return c;
}

json covariate_to_json(const CovariateSpec& c) {
  if (c.dist == CovariateSpec::Dist::Bernoulli)
    return json{{"name", c.name}, {"dist", "bernoulli"}, {"p", c.p}};
  return json{{"name", c.name}, {"dist", "normal"}, {"mean", c.mean}, {"sd", c.sd}};
}

OutcomeModel outcome_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"terms", "noise_sd"}, where);
  OutcomeModel m;
  if (!j.contains("terms") || !j["terms"].is_object())
    throw ConfigError(where + ": missing 'terms' object");
  for (const auto& [term, coef] : j["terms"].items())
    m.terms.emplace_back(term, coef.get<double>());
  m.noise_sd = get_number(j, "noise_sd", where);
  if (!(m.noise_sd > 0.0)) throw ConfigError(where + ": noise_sd must be positive");
  return m;
}

json outcome_to_json(const OutcomeModel& m) {
  json terms = json::object();
  for (const auto& [term, coef] : m.terms) terms[term] = coef;
  return json{{"terms", terms}, {"noise_sd", m.noise_sd}};
}

FeatureSpec features_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"main", "interaction"}, where);
  FeatureSpec f;
  if (!j.contains("main") || !j.contains("interaction"))
    throw ConfigError(where + ": needs 'main' and 'interaction' column lists");
  f.main_columns = j["main"].get<std::vector<std::string>>();
  f.interaction_columns = j["interaction"].get<std::vector<std::string>>();
  return f;
}

json features_to_json(const FeatureSpec& f) {
  return json{{"main", f.main_columns}, {"interaction", f.interaction_columns}};
}

SyntheticModel model_from_json_obj(const json& j) {
  reject_unknown(j,
                 {"baseline", "response_rate", "tailoring", "outcome_nonresponder",
                  "outcome_responder", "preference", "q2_features", "q1_features"},
                 "model");
  SyntheticModel m;
  if (j.contains("baseline"))
    for (const auto& c : j["baseline"]) m.baseline.push_back(covariate_from_json(c, "baseline"));

  if (!j.contains("response_rate")) throw ConfigError("model: missing 'response_rate'");
  reject_unknown(j["response_rate"], {"plus", "minus"}, "response_rate");
  m.response_rate.plus = get_number(j["response_rate"], "plus", "response_rate");
  m.response_rate.minus = get_number(j["response_rate"], "minus", "response_rate");
  for (double p : {m.response_rate.plus, m.response_rate.minus})
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("model: response rates must lie in (0,1)");

  if (!j.contains("tailoring")) throw ConfigError("model: missing 'tailoring'");
  const json& tj = j["tailoring"];
  std::string kind = tj.value("kind", "independent");
  if (kind == "independent") {
    reject_unknown(tj, {"kind", "columns"}, "tailoring");
    m.tailoring.kind = TailoringSpec::Kind::Independent;
    if (!tj.contains("columns")) throw ConfigError("tailoring: missing 'columns'");
    for (const auto& c : tj["columns"])
      m.tailoring.columns.push_back(covariate_from_json(c, "tailoring"));
  } else if (kind == "bernoulli_mixture_by_a2") {
    reject_unknown(tj, {"kind", "name", "p_given_plus", "p_given_minus"}, "tailoring");
    m.tailoring.kind = TailoringSpec::Kind::BernoulliMixtureByA2;
    if (!tj.contains("name")) throw ConfigError("tailoring: missing 'name'");
    m.tailoring.name = tj["name"].get<std::string>();
    m.tailoring.p_given_plus = get_number(tj, "p_given_plus", "tailoring");
    m.tailoring.p_given_minus = get_number(tj, "p_given_minus", "tailoring");
  } else {
    throw ConfigError("tailoring: unknown kind '" + kind + "'");
  }

  if (!j.contains("outcome_nonresponder") || !j.contains("outcome_responder"))
    throw ConfigError("model: needs 'outcome_nonresponder' and 'outcome_responder'");
  m.outcome_nonresponder = outcome_from_json(j["outcome_nonresponder"], "outcome_nonresponder");
  m.outcome_responder = outcome_from_json(j["outcome_responder"], "outcome_responder");

  if (!j.contains("preference")) throw ConfigError("model: missing 'preference'");
  const json& pj = j["preference"];
  std::string pkind = pj.value("kind", "");
  if (pkind == "logistic_on_zeta") {
    reject_unknown(pj, {"kind", "slope", "intercept"}, "preference");
    m.preference.kind = PreferenceSpec::Kind::LogisticOnZeta;
    m.preference.slope = get_number(pj, "slope", "preference");
    m.preference.intercept = get_number(pj, "intercept", "preference");
  } else if (pkind == "table_on_covariate") {
    reject_unknown(pj, {"kind", "column", "p_given_0", "p_given_1"}, "preference");
    m.preference.kind = PreferenceSpec::Kind::TableOnCovariate;
    if (!pj.contains("column")) throw ConfigError("preference: missing 'column'");
    m.preference.column = pj["column"].get<std::string>();
    m.preference.p_given_0 = get_number(pj, "p_given_0", "preference");
    m.preference.p_given_1 = get_number(pj, "p_given_1", "preference");
  } else if (pkind == "constant") {
    reject_unknown(pj, {"kind", "p"}, "preference");
    m.preference.kind = PreferenceSpec::Kind::Constant;
    m.preference.p_const = get_number(pj, "p", "preference");
  } else {
    throw ConfigError("preference: unknown kind '" + pkind + "'");
  }

  if (!j.contains("q2_features")) throw ConfigError("model: missing 'q2_features'");
  m.q2_features = features_from_json(j["q2_features"], "q2_features");
  if (j.contains("q1_features")) m.q1_features = features_from_json(j["q1_features"], "q1_features");
  return m;
}

json model_to_json_obj(const SyntheticModel& m) {
  json j;
  j["baseline"] = json::array();
  for (const auto& c : m.baseline) j["baseline"].push_back(covariate_to_json(c));
  j["response_rate"] = {{"plus", m.response_rate.plus}, {"minus", m.response_rate.minus}};
  if (m.tailoring.kind == TailoringSpec::Kind::Independent) {
    json cols = json::array();
    for (const auto& c : m.tailoring.columns) cols.push_back(covariate_to_json(c));
    j["tailoring"] = {{"kind", "independent"}, {"columns", cols}};
  } else {
    j["tailoring"] = {{"kind", "bernoulli_mixture_by_a2"},
                      {"name", m.tailoring.name},
                      {"p_given_plus", m.tailoring.p_given_plus},
                      {"p_given_minus", m.tailoring.p_given_minus}};
  }
  j["outcome_nonresponder"] = outcome_to_json(m.outcome_nonresponder);
  j["outcome_responder"] = outcome_to_json(m.outcome_responder);
  switch (m.preference.kind) {
    case PreferenceSpec::Kind::LogisticOnZeta:
      j["preference"] = {{"kind", "logistic_on_zeta"},
                         {"slope", m.preference.slope},
                         {"intercept", m.preference.intercept}};
      break;
    case PreferenceSpec::Kind::TableOnCovariate:
      j["preference"] = {{"kind", "table_on_covariate"},
                         {"column", m.preference.column},
                         {"p_given_0", m.preference.p_given_0},
                         {"p_given_1", m.preference.p_given_1}};
      break;
    case PreferenceSpec::Kind::Constant:
      j["preference"] = {{"kind", "constant"}, {"p", m.preference.p_const}};
      break;
  }
  j["q2_features"] = features_to_json(m.q2_features);
  j["q1_features"] = features_to_json(m.q1_features);
  return j;
}

DesignSpec design_from_json_obj(const json& j) {
  reject_unknown(j,
                 {"kind", "capacity_fraction", "epsilon", "eta", "budget_m", "kappa0", "max_iter",
                  "step_l", "bins", "n_min", "iteration_ceiling"},
                 "design");
  DesignSpec d;
  if (!j.contains("kind")) throw ConfigError("design: missing 'kind'");
  d.kind = design_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("capacity_fraction")) {
    reject_unknown(j["capacity_fraction"], {"plus", "minus"}, "capacity_fraction");
    d.capacity_fraction.plus = get_number(j["capacity_fraction"], "plus", "capacity_fraction");
    d.capacity_fraction.minus = get_number(j["capacity_fraction"], "minus", "capacity_fraction");
  }
  if (j.contains("epsilon")) d.epsilon = j["epsilon"].get<double>();
  if (j.contains("eta")) d.eta = j["eta"].get<double>();
  if (j.contains("budget_m")) d.budget_m = j["budget_m"].get<double>();
  if (j.contains("kappa0")) d.controls.kappa0 = j["kappa0"].get<double>();
  if (j.contains("max_iter")) d.controls.max_iter = j["max_iter"].get<int>();
  if (j.contains("step_l")) d.controls.step_l = j["step_l"].get<double>();
  if (j.contains("iteration_ceiling"))
    d.controls.iteration_ceiling = j["iteration_ceiling"].get<long>();
  if (j.contains("bins")) d.bins = j["bins"].get<int>();
  if (j.contains("n_min")) d.n_min = j["n_min"].get<int>();
  d.validate();
  return d;
}

json design_to_json_obj(const DesignSpec& d) {
  return json{{"kind", to_string(d.kind)},
              {"capacity_fraction",
               {{"plus", d.capacity_fraction.plus}, {"minus", d.capacity_fraction.minus}}},
              {"epsilon", d.epsilon},
              {"eta", d.eta},
              {"budget_m", d.budget_m},
              {"kappa0", d.controls.kappa0},
              {"max_iter", d.controls.max_iter},
              {"step_l", d.controls.step_l},
              {"iteration_ceiling", d.controls.iteration_ceiling},
              {"bins", d.bins},
              {"n_min", d.n_min}};
}

}  // namespace

SyntheticModel resolve_model(const std::string& name, const std::string& association) {
  if (name == "table1") {
    if (association == "negative") return table1_model(true);
    if (association == "positive") return table1_model(false);
    throw ConfigError("model 'table1' needs association 'negative' or 'positive', got '" +
                      association + "'");
  }
  if (name == "adhd") return adhd_model(association.empty() ? "S1" : association);
  throw ConfigError("unknown model preset '" + name + "'");
}

ScenarioConfig scenario_config_from_json(const std::string& json_text) {
  json j = parse(json_text, "config");
  reject_unknown(j,
                 {"schema_version", "model", "association", "scenario", "design", "n", "n_pilot",
                  "reps", "seed", "threads", "label"},
                 "config");
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
    throw ConfigError("config: schema_version must be 1");
  ScenarioConfig c;
  if (!j.contains("design")) throw ConfigError("config: missing 'design'");
  c.design = design_from_json_obj(j["design"]);
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  if (j["model"].is_string()) {
    std::string name = j["model"].get<std::string>();
    c.association = j.value("association", j.value("scenario", ""));
    if (name == "adhd" && c.association.empty()) c.association = "S1";
    if (name == "table1" && c.association.empty()) c.association = "negative";
    c.model = resolve_model(name, c.association);
    c.label = name + (c.association.empty() ? "" : "/" + c.association);
  } else {
    c.model = model_from_json_obj(j["model"]);
    c.association = j.value("association", "custom");
    c.label = "custom";
  }
  if (j.contains("label")) c.label = j["label"].get<std::string>();
  if (!j.contains("n")) throw ConfigError("config: missing 'n'");
  c.n = j["n"].get<int>();
  c.n_pilot = j.value("n_pilot", 0);
  c.reps = j.value("reps", 500);
  c.seed = j.value("seed", 1ull);
  c.threads = j.value("threads", 0);
  if (c.n < 1) throw ConfigError("config: n must be >= 1");
  if (c.reps < 1) throw ConfigError("config: reps must be >= 1");
  if (c.design.kind == DesignKind::SmartExam && c.n_pilot < 1)
    throw ConfigError("config: smart-exam requires n_pilot >= 1");
  return c;
}

std::string scenario_config_to_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = 1;
  j["model"] = model_to_json_obj(c.model);
  j["association"] = c.association;
  j["design"] = design_to_json_obj(c.design);
  j["n"] = c.n;
  j["n_pilot"] = c.n_pilot;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["label"] = c.label;
  return j.dump(2) + "\n";
}

DesignSpec design_spec_from_json(const std::string& json_text) {
  return design_from_json_obj(parse(json_text, "design"));
}

std::string design_spec_to_json(const DesignSpec& spec) {
  return design_to_json_obj(spec).dump(2) + "\n";
}

SyntheticModel model_from_json(const std::string& json_text) {
  return model_from_json_obj(parse(json_text, "model"));
}

std::string model_to_json(const SyntheticModel& model) {
  return model_to_json_obj(model).dump(2) + "\n";
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace smartexam
