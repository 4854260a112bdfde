#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "qos/model.hpp"
#include "qos/policy_limit.hpp"
#include "qos/rng.hpp"

namespace qos {

struct WeightedTransmission {
  BidVector rho;
};

struct GeneralizedTT {
  PolicyParams params;
};

struct RandomOrder {};

// Higher key = higher priority; uniform random order among equal keys.
struct PriorityRandom {
  std::vector<double> key;
};

using Policy =
    std::variant<WeightedTransmission, GeneralizedTT, RandomOrder, PriorityRandom>;

struct SimStats {
  std::int64_t periods = 0;
  std::int64_t idle_slots = 0;
  std::vector<std::int64_t> allocated_slots;  // u_n: every slot spent on n
  std::vector<std::int64_t> deliveries;       // periods with a delivery for n

  struct Checkpoint {
    std::int64_t period;
    std::vector<double> empirical_q;
    bool operator==(const Checkpoint&) const = default;
  };
  std::vector<Checkpoint> trajectory;

  std::vector<double> empirical_q() const;
  bool operator==(const SimStats&) const = default;
};

// Priority permutation (client ids, highest priority first) for one period.
// u holds cumulative allocated slots, t is the slot count at the period
// start. Only Random / PriorityRandom consume rng. Ties break toward the
// smaller id.
std::vector<int> priority_order(const Policy& policy,
                                const std::vector<std::int64_t>& u,
                                std::int64_t t, Rng& rng);

// Slotted-time engine. One packet per client per period; each slot serves
// the highest-priority client with an undelivered packet; an attempt for
// client n succeeds with probability p_n; leftover slots after all
// deliveries are idle. State persists across run() calls so bids may change
// between segments.
class Simulator {
 public:
  Simulator(Policy policy, const SystemConfig& cfg, RngSpec rng,
            std::int64_t checkpoint_every = 0);

  void run(std::int64_t periods);
  void set_bids(const BidVector& rho);  // weighted-transmission only

  const SimStats& stats() const { return stats_; }

 private:
  Policy policy_;
  SystemConfig cfg_;
  Rng rng_;
  std::int64_t checkpoint_every_;
  SimStats stats_;
};

SimStats run_simulation(const Policy& policy, const SystemConfig& cfg,
                        std::int64_t periods, RngSpec rng,
                        std::int64_t checkpoint_every = 0);

struct ComparisonReport {
  DeliveryVector empirical;
  DeliveryVector analytic;
  double max_gap = 0.0;
  std::vector<double> ci_halfwidth;  // 3-sigma binomial half-widths
};

// Runs the simulator and the analytic limit side by side. The policy must
// be WeightedTransmission or GeneralizedTT.
ComparisonReport empirical_vs_analytic(const Policy& policy,
                                       const SystemConfig& cfg,
                                       std::int64_t periods, RngSpec rng);

}  // namespace qos
