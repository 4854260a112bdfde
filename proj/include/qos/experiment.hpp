#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qos/config.hpp"
#include "qos/equilibrium.hpp"
#include "qos/results.hpp"

namespace qos {

// Runs one configured scenario and returns its result rows (sorted). All
// numerical work happens in the component modules; this is composition only.
std::vector<ResultRow> run_scenario(const ExperimentConfig& cfg);

// The 30-client VoIP-style benchmark roster: tau = 32, p_n = (50+n)%,
// power utilities with gamma_n = (n mod 3) + 1 and
// alpha_n = 0.3 + 0.1 (n mod 5).
SystemConfig benchmark_system_config();

// rho_n = (n mod 2) + 1, the fixed bids of the no-bidding baseline.
BidVector benchmark_fixed_bids();

struct PolicySummary {
  std::string name;  // wt-bid | wt-nobid | rand | prand
  std::vector<double> per_seed_utility;
  double mean = 0.0;
  double variance = 0.0;  // across seeds, n-1 denominator
};

struct ReplicateSummary {
  std::vector<PolicySummary> policies;
  std::vector<ResultRow> rows;
};

// Runs wt-bid (bidding game over the simulator, bids updated every
// bid_update_periods), wt-nobid (fixed benchmark bids), rand, and prand
// (priority key gamma_n) on the benchmark roster for each seed, and
// summarizes mean/variance of total utility per policy.
ReplicateSummary replicate_paper_experiment(
    const std::vector<std::uint64_t>& seeds, std::int64_t periods = 500,
    std::int64_t bid_update_periods = 10);

}  // namespace qos
