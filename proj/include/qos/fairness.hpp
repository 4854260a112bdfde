#pragma once

#include <utility>
#include <vector>

#include "qos/model.hpp"
#include "qos/rng.hpp"

namespace qos {

enum class FairnessCriterion { MaxMin, Proportional };

struct FairnessReport {
  FairnessCriterion criterion = FairnessCriterion::MaxMin;
  DeliveryVector tested;  // the alternative q'
  bool fair = true;
  // MaxMin: one (i, j) pair per client i whose ratio improved in q';
  // j is the witness with q'_j < q_j and w_i/rho_i >= w_j/rho_j, or -1
  // when none exists (which makes the verdict false).
  std::vector<std::pair<int, int>> witnesses;
  // Proportional: sum_n (w_n(q'_n) - w_n(q_n)) / (w_n(q_n)/rho_n).
  double sum = 0.0;
  double tol = 1e-7;
};

// Weighted max-min comparison of the achieved q against a feasible
// alternative q'. Throws std::invalid_argument when q' is infeasible.
FairnessReport check_weighted_max_min(const DeliveryVector& q,
                                      const DeliveryVector& q_alt,
                                      const BidVector& rho,
                                      const SystemConfig& cfg,
                                      double tol = 1e-7);

// Weighted proportional fairness: passes iff the weighted workload-change
// sum is <= tol. Requires q_n > 0 for all n and a feasible q'.
FairnessReport check_proportional_fairness(const DeliveryVector& q,
                                           const DeliveryVector& q_alt,
                                           const BidVector& rho,
                                           const SystemConfig& cfg,
                                           double tol = 1e-7);

// Feasible delivery vectors with deliberate boundary coverage: interior
// rejection/scaling samples interleaved with scaled copies of
// weighted-transmission optima under random bids. Every output passes
// is_feasible.
std::vector<DeliveryVector> sample_feasible(const SystemConfig& cfg, Rng& rng,
                                            int count);

}  // namespace qos
