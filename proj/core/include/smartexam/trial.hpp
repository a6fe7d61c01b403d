#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "smartexam/errors.hpp"

namespace smartexam {

/// Treatment codes are -1/+1 at both stages; responders carry a2 = 0.
inline bool valid_arm(int a) { return a == -1 || a == 1; }

/// Small map keyed by a stage-1 or stage-2 arm code (-1 or +1).
template <typename T>
struct ByArm {
  T minus{};
  T plus{};

  T& operator[](int arm) { return arm == 1 ? plus : minus; }
  const T& operator[](int arm) const { return arm == 1 ? plus : minus; }
  bool operator==(const ByArm&) const = default;
};

/// A two-stage embedded regime: start with d1, switch non-responders to d2.
struct Dtr {
  int d1 = -1;
  int d2 = -1;

  bool operator==(const Dtr&) const = default;
  auto operator<=>(const Dtr&) const = default;
};

/// The four embedded regimes of a two-stage two-treatment design, in
/// ascending (d1, d2) order.
inline std::array<Dtr, 4> all_dtrs() {
  return {Dtr{-1, -1}, Dtr{-1, 1}, Dtr{1, -1}, Dtr{1, 1}};
}

inline std::string to_string(const Dtr& d) {
  return "(" + std::to_string(d.d1) + "," + std::to_string(d.d2) + ")";
}

/// One participant's complete record. Stage-2 fields (lambda, p2, a2 != 0, g)
/// exist only for non-responders; o2 is recorded at the intermediate decision
/// point and is kept for non-responders only.
struct Trajectory {
  std::vector<double> o1;
  int a1 = 0;
  double p1 = 0.5;            // probability actually used to assign a1
  int r = 0;                  // 1 = responder
  std::vector<double> o2;
  std::optional<int> lambda;  // stage-2 preference, present iff r == 0
  std::optional<int> g;       // market group index, individualized designs only
  std::optional<double> p2;   // probability actually used to assign a2
  int a2 = 0;
  double y = 0.0;
};

/// Trajectory plus its dataset-level column names.
struct Dataset {
  std::vector<std::string> o1_names;
  std::vector<std::string> o2_names;
  std::vector<Trajectory> rows;
  bool ar_fallback = false;  // burn-in fit failed, remainder used balanced allocation
};

/// Throws ConfigError when a trajectory violates the domain invariants.
void validate(const Trajectory& t);

enum class DesignKind { Smart, SmartExam, SmartArExam };

std::string to_string(DesignKind k);
DesignKind design_kind_from_string(const std::string& s);

/// Iteration controls for the stage-2 market.
struct ClearingControls {
  double kappa0 = 0.002;       // initial clearing tolerance
  int max_iter = 200;          // consecutive beta updates before relaxing kappa
  double step_l = 0.0;         // 0 means "number of non-responders in the arm"
  long iteration_ceiling = 1'000'000;  // hard bound on total beta updates
};

/// All experimental parameters of a design. capacity_fraction maps each
/// stage-1 arm to the fraction of its non-responders committed to a2 = +1.
struct DesignSpec {
  DesignKind kind = DesignKind::Smart;
  ByArm<double> capacity_fraction{0.5, 0.5};
  double epsilon = 0.1;
  double eta = -1.0;
  double budget_m = 1.0;
  ClearingControls controls;
  int bins = 5;
  int n_min = 100;  // SMART-AR-EXAM burn-in size

  /// Structural validation (epsilon-vs-capacity feasibility is re-checked per
  /// arm at allocation time, once non-responder counts are realized).
  void validate() const;
};

/// Integer capacities for one stage-1 arm's non-responders. C[+1] is the
/// fraction rounded half-up, C[-1] the remainder, so they always sum to the
/// arm's non-responder count. n_nonresp == 0 yields the degenerate {0, 0}.
ByArm<int> realize_capacities(double fraction_plus, int n_nonresp);

/// Largest epsilon the realized capacities admit: min_a2 C[a2] / N.
double epsilon_bar(const ByArm<int>& capacities, int n_nonresp);

/// 1 iff the trajectory's realized treatment path is compatible with the
/// regime: a1 matches, and a2 matches unless the participant responded.
int consistent_with(const Trajectory& t, const Dtr& d);

}  // namespace smartexam
