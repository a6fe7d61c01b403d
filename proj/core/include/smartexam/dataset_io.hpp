#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smartexam/trial.hpp"

namespace smartexam {

/// Shortest decimal form that parses back to the same double ('.' separator).
std::string format_double(double v);
double parse_double(const std::string& s);

/// Trajectory CSV schema, in fixed column order:
///   id,a1,p1,r,<o2 columns...>,lambda,g,p2,a2,y,<o1 columns...>
/// Responder-only gaps (o2, lambda, g, p2) are written as empty fields.
/// UTF-8, LF line endings.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& csv_text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// Splits one CSV record (no quoting; the schema never emits commas in
/// fields).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace smartexam
