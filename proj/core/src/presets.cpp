#include "smartexam/presets.hpp"

namespace smartexam {

ScenarioConfig table1_cell(DesignKind kind, const std::string& association, double capacity_plus,
                           double epsilon) {
  ScenarioConfig c;
  c.model = table1_model(association == "negative");
  c.association = association;
  c.design.kind = kind;
  c.design.capacity_fraction = ByArm<double>{1.0 - capacity_plus, capacity_plus};
  c.design.epsilon = epsilon;
  c.design.eta = -1.0;
  c.n = 200;
  c.n_pilot = kind == DesignKind::SmartExam ? 200 : 0;
  c.reps = 500;
  c.seed = 1;
  c.label = to_string(kind) + " " + association + " C=" + std::to_string(capacity_plus);
  return c;
}

ScenarioConfig adhd_cell(const std::string& scenario, DesignKind kind, double epsilon) {
  ScenarioConfig c;
  c.model = adhd_model(scenario);
  c.association = scenario;
  c.design.kind = kind;
  c.design.capacity_fraction = ByArm<double>{0.5, 0.5};
  c.design.epsilon = epsilon;
  c.design.eta = -1.0;
  // The source study enrolled 150; the simulated follow-up trial uses 250,
  // which reproduces the reported selection probabilities.
  c.n = 250;
  c.n_pilot = kind == DesignKind::SmartExam ? 150 : 0;
  c.reps = 500;
  c.seed = 1;
  c.label = scenario + " " + to_string(kind) + " eps=" + std::to_string(epsilon);
  return c;
}

}  // namespace smartexam
