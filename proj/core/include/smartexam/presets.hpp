#pragma once

#include <string>

#include "smartexam/harness.hpp"

namespace smartexam {

/// One cell of the benchmark-model operating-characteristics tables:
/// N = 200, pilot 200, eta = -1, seed 1.
ScenarioConfig table1_cell(DesignKind kind, const std::string& association, double capacity_plus,
                           double epsilon);

/// One cell of the ADHD application table: capacity 0.5, eta = -1,
/// pilot 150 (the original study size), trial size 250, seed 1.
ScenarioConfig adhd_cell(const std::string& scenario, DesignKind kind, double epsilon);

}  // namespace smartexam
