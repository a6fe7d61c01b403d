#include "smartexam/trial.hpp"

#include <cmath>

namespace smartexam {

void validate(const Trajectory& t) {
  if (!valid_arm(t.a1)) throw ConfigError("trajectory: a1 must be -1 or +1");
  if (t.r != 0 && t.r != 1) throw ConfigError("trajectory: r must be 0 or 1");
  if (!(t.p1 > 0.0 && t.p1 < 1.0)) throw ConfigError("trajectory: p1 must lie in (0,1)");
  if (t.r == 1) {
    if (t.a2 != 0) throw ConfigError("trajectory: responders must have a2 = 0");
    if (t.lambda || t.p2 || t.g)
      throw ConfigError("trajectory: responders carry no stage-2 fields");
  } else {
    if (!valid_arm(t.a2)) throw ConfigError("trajectory: non-responder a2 must be -1 or +1");
    if (!t.lambda) throw ConfigError("trajectory: non-responders must carry lambda");
    if (*t.lambda != 0 && *t.lambda != 1)
      throw ConfigError("trajectory: lambda must be 0 or 1");
    if (!t.p2) throw ConfigError("trajectory: non-responders must carry p2");
    if (!(*t.p2 > 0.0 && *t.p2 <= 1.0))
      throw ConfigError("trajectory: p2 must lie in (0,1]");
  }
}

std::string to_string(DesignKind k) {
  switch (k) {
    case DesignKind::Smart: return "smart";
    case DesignKind::SmartExam: return "smart-exam";
    case DesignKind::SmartArExam: return "smart-ar-exam";
  }
  return "smart";
}

DesignKind design_kind_from_string(const std::string& s) {
  if (s == "smart") return DesignKind::Smart;
  if (s == "smart-exam") return DesignKind::SmartExam;
  if (s == "smart-ar-exam") return DesignKind::SmartArExam;
  throw ConfigError("unknown design kind '" + s + "' (expected smart, smart-exam, or smart-ar-exam)");
}

void DesignSpec::validate() const {
  for (int a1 : {-1, 1}) {
    double c = capacity_fraction[a1];
    if (!(c > 0.0 && c < 1.0))
      throw ConfigError("design: capacity fraction must lie in (0,1)");
    // Asymptotic feasibility check; the realized per-arm bound is re-checked
    // at allocation time.
    if (epsilon > std::min(c, 1.0 - c) + 1e-12)
      throw InvalidDesignError(
          "design: epsilon exceeds the smallest capacity fraction (epsilon <= min(c, 1-c) required)");
  }
  if (epsilon < 0.0) throw ConfigError("design: epsilon must be >= 0");
  if (!(eta > -1.0 && eta < 0.0)) throw ConfigError("design: eta must lie strictly in (-1,0)");
  if (!(budget_m > 0.0)) throw ConfigError("design: budget must be positive");
  if (bins < 1) throw ConfigError("design: bins must be >= 1");
  if (controls.kappa0 <= 0.0) throw ConfigError("design: kappa0 must be positive");
  if (controls.max_iter < 1) throw ConfigError("design: max_iter must be >= 1");
  if (controls.step_l < 0.0) throw ConfigError("design: step_l must be >= 0");
  if (n_min < 1) throw ConfigError("design: n_min must be >= 1");
}

ByArm<int> realize_capacities(double fraction_plus, int n_nonresp) {
  if (n_nonresp < 0) throw ConfigError("realize_capacities: negative count");
  if (n_nonresp == 0) return ByArm<int>{0, 0};
  int c_plus = static_cast<int>(std::floor(fraction_plus * n_nonresp + 0.5));
  return ByArm<int>{n_nonresp - c_plus, c_plus};
}

double epsilon_bar(const ByArm<int>& capacities, int n_nonresp) {
  if (n_nonresp <= 0) return 0.0;
  return static_cast<double>(std::min(capacities.minus, capacities.plus)) / n_nonresp;
}

int consistent_with(const Trajectory& t, const Dtr& d) {
  if (t.a1 != d.d1) return 0;
  return (t.r == 1 || t.a2 == d.d2) ? 1 : 0;
}

}  // namespace smartexam
