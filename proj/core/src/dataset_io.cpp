#include "smartexam/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "smartexam/errors.hpp"

namespace smartexam {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw RuntimeError("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw SchemaError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string dataset_to_csv(const Dataset& data) {
  std::string csv = "id,a1,p1,r";
  for (const auto& name : data.o2_names) csv += "," + name;
  csv += ",lambda,g,p2,a2,y";
  for (const auto& name : data.o1_names) csv += "," + name;
  csv += "\n";
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const Trajectory& t = data.rows[i];
    csv += std::to_string(i + 1) + "," + std::to_string(t.a1) + "," + format_double(t.p1) + "," +
           std::to_string(t.r);
    for (std::size_t j = 0; j < data.o2_names.size(); ++j)
      csv += "," + (j < t.o2.size() ? format_double(t.o2[j]) : std::string());
    csv += "," + (t.lambda ? std::to_string(*t.lambda) : std::string());
    csv += "," + (t.g ? std::to_string(*t.g) : std::string());
    csv += "," + (t.p2 ? format_double(*t.p2) : std::string());
    csv += "," + std::to_string(t.a2) + "," + format_double(t.y);
    for (std::size_t j = 0; j < data.o1_names.size(); ++j)
      csv += "," + (j < t.o1.size() ? format_double(t.o1[j]) : std::string());
    csv += "\n";
  }
  return csv;
}

Dataset dataset_from_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("dataset CSV: empty file");
  auto header = split_csv_line(line);

  // Locate the fixed anchors, then read the o2 block between r and lambda and
  // the o1 block after y.
  auto expect = [&](std::size_t idx, const std::string& name) {
    if (idx >= header.size() || header[idx] != name)
      throw SchemaError("dataset CSV: expected column '" + name + "' at position " +
                        std::to_string(idx + 1));
  };
  expect(0, "id");
  expect(1, "a1");
  expect(2, "p1");
  expect(3, "r");
  std::size_t lambda_idx = 4;
  while (lambda_idx < header.size() && header[lambda_idx] != "lambda") ++lambda_idx;
  if (lambda_idx >= header.size()) throw SchemaError("dataset CSV: missing 'lambda' column");
  expect(lambda_idx + 1, "g");
  expect(lambda_idx + 2, "p2");
  expect(lambda_idx + 3, "a2");
  expect(lambda_idx + 4, "y");

  Dataset data;
  for (std::size_t j = 4; j < lambda_idx; ++j) data.o2_names.push_back(header[j]);
  for (std::size_t j = lambda_idx + 5; j < header.size(); ++j) data.o1_names.push_back(header[j]);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw SchemaError("dataset CSV: line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    Trajectory t;
    t.a1 = static_cast<int>(parse_double(fields[1]));
    t.p1 = parse_double(fields[2]);
    t.r = static_cast<int>(parse_double(fields[3]));
    for (std::size_t j = 4; j < lambda_idx; ++j)
      if (!fields[j].empty()) t.o2.push_back(parse_double(fields[j]));
    if (!fields[lambda_idx].empty())
      t.lambda = static_cast<int>(parse_double(fields[lambda_idx]));
    if (!fields[lambda_idx + 1].empty())
      t.g = static_cast<int>(parse_double(fields[lambda_idx + 1]));
    if (!fields[lambda_idx + 2].empty()) t.p2 = parse_double(fields[lambda_idx + 2]);
    t.a2 = static_cast<int>(parse_double(fields[lambda_idx + 3]));
    t.y = parse_double(fields[lambda_idx + 4]);
    for (std::size_t j = lambda_idx + 5; j < header.size(); ++j)
      if (!fields[j].empty()) t.o1.push_back(parse_double(fields[j]));
    validate(t);
    data.rows.push_back(std::move(t));
  }
  return data;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw RuntimeError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace smartexam
