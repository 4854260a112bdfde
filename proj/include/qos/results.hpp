#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace qos {

// One flat record of one metric value. client == 0 marks a run-level
// aggregate and renders as "all". Metric names come from the closed set
// documented in the README.
struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int client = 0;
  std::string metric;
  double value = 0.0;

  auto operator<=>(const ResultRow&) const = default;
};

enum class ResultFormat { Csv, Json };

// 12 significant digits, locale-independent.
std::string format_number(double v);

// Canonical row order: scenario, seed, client, metric.
void sort_rows(std::vector<ResultRow>& rows);

// Deterministic bytes for the sorted rows. CSV carries the header
// "scenario,seed,client,metric,value"; JSON is an array of objects with the
// same fields.
std::string render_results(std::vector<ResultRow> rows, ResultFormat format);

// render_results to a file; throws std::runtime_error when unwritable.
void emit_results(const std::vector<ResultRow>& rows, ResultFormat format,
                  const std::string& path);

std::vector<ResultRow> parse_results_csv(const std::string& text);
std::vector<ResultRow> parse_results_json(const std::string& text);

}  // namespace qos
