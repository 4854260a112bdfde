#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qos/model.hpp"
#include "qos/policy_limit.hpp"
#include "qos/simulator.hpp"

namespace qos {

struct BiddingState {
  BidVector rho;           // bids in force when the AP computed q
  DeliveryVector q;        // AP response to those bids
  std::vector<double> psi; // rho_n / q_n
  int iteration = 0;       // 1-based
  double total_utility = 0.0;
};

struct BiddingTrace {
  std::vector<BiddingState> states;
  std::vector<double> residuals;  // ||rho_next - rho||_inf per iteration
  bool converged = false;
  std::optional<SimStats> sim_stats;  // simulation backend only

  const BiddingState& final_state() const { return states.back(); }
};

struct AnalyticBackend {};

struct SimulationBackend {
  std::int64_t periods_per_round = 10;
  RngSpec rng;
};

using ApBackend = std::variant<AnalyticBackend, SimulationBackend>;

// The repeated bidding game. Each round the AP answers the current bids
// (analytically, or by running the weighted-transmission simulator for
// periods_per_round more periods and reading that segment's delivery
// ratios, flooring zeros at 0.001), each client best-responds to
// psi_n = rho_n/q_n, and bids damp toward the response:
// rho <- (1-alpha) rho + alpha rho*. Stops when ||rho_new - rho||_inf <
// fp_tol or after max_iters rounds.
BiddingTrace run_bidding_game(const SystemConfig& cfg, double alpha = 0.5,
                              int max_iters = 500, double fp_tol = 1e-8,
                              const ApBackend& backend = AnalyticBackend{});

// max_n |rho_n* - rho_n| at the state's prices; zero exactly at a game
// fixed point.
double fixed_point_residual(const BiddingState& state, const SystemConfig& cfg);

struct SystemSolution {
  DeliveryVector q;
  KKTCertificate certificate;  // System context
  double objective = 0.0;      // sum_n U_n(q_n)
};

// Independent total-utility solver used as the optimality oracle: log-barrier
// path following over the 2^N - 1 subset constraints plus q > 0, followed by
// an active-set Newton polish on the equality KKT system. The gradient is
// checked against finite differences at the start point, and the returned
// certificate is re-verified against the KKT conditions at `tol`; failures
// raise std::runtime_error rather than returning a bad point. N <= 8.
SystemSolution solve_system(const SystemConfig& cfg, double tol = 1e-8);

}  // namespace qos
