#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qos/model.hpp"
#include "qos/results.hpp"
#include "qos/simulator.hpp"

namespace qos {

enum class Scenario { Solve, Simulate, Bid, ReplicatePaper };
enum class PolicyKind { Wt, Gtt, Rand, Prand };
enum class SolveProgram { AccessPoint, System };
enum class BidBackendKind { Analytic, Simulation };

struct ClientConfig {
  int id = 0;
  double p = 0.0;               // required, in (0, 1]
  std::string utility = "log";  // log | power
  double gamma = 1.0;           // power scale; default priority key for prand
  double alpha = 0.5;           // power exponent, in (0, 1)
  double bid = 1.0;
  double a = 1.0;               // gtt priority slope
  double b = 0.0;               // gtt debt rate
  std::optional<double> key;    // prand priority, defaults to gamma

  bool operator==(const ClientConfig&) const = default;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Simulate;
  int tau = 1;
  int subset_limit = 20;
  double solver_tol = 1e-9;
  double sim_tol = 1e-2;
  std::vector<ClientConfig> clients;

  PolicyKind policy = PolicyKind::Wt;
  std::int64_t periods = 1000;
  std::vector<std::uint64_t> seeds = {0};
  std::int64_t checkpoint_every = 0;

  double damping = 0.5;  // bid-update damping, key "alpha"
  int max_iters = 500;
  double fp_tol = 1e-8;
  BidBackendKind backend = BidBackendKind::Analytic;
  std::int64_t bid_update_periods = 10;

  SolveProgram program = SolveProgram::AccessPoint;
  std::string out;  // empty = stdout
  ResultFormat format = ResultFormat::Csv;

  SystemConfig system_config() const;
  Policy build_policy() const;
  BidVector initial_bids() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ParseError {
  int line = 0;
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ParseError> errors;
  bool ok() const { return errors.empty(); }
};

// `key = value` lines with `[client.<id>]` sections and `#` comments.
// Every rejected line is reported with its line number; config is set only
// when there are no errors.
ParseResult parse_config(const std::string& text);

// Canonical form: fixed key order, clients ascending by id, numbers via
// format_number. parse(emit(parse(text))) == parse(text).
std::string emit_config(const ExperimentConfig& cfg);

}  // namespace qos
