#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qos/utility.hpp"

namespace qos {

// Clients are numbered 1..N. Bit (id - 1) of a SubsetMask marks membership;
// per-client vectors are indexed by (id - 1).
using SubsetMask = std::uint32_t;

SubsetMask full_mask(int n);
std::vector<int> mask_to_ids(SubsetMask mask);
SubsetMask ids_to_mask(const std::vector<int>& ids, int n);
std::string mask_to_string(SubsetMask mask);

struct ClientSpec {
  int id = 0;            // 1-based, contiguous across the roster
  double p = 1.0;        // per-attempt delivery probability, in (0, 1]
  UtilityPtr utility;    // may be null for pure scheduling runs
  double initial_bid = 1.0;
};

struct SystemConfig {
  int tau = 1;                      // time slots per period
  std::vector<ClientSpec> clients;
  int subset_limit = 20;            // guard for 2^N enumerations
  double solver_tol = 1e-9;
  double sim_tol = 1e-2;

  int size() const { return static_cast<int>(clients.size()); }

  void validate() const;            // throws std::invalid_argument
  void require_enumerable() const;  // additionally rejects N > subset_limit
};

struct DeliveryVector {
  std::vector<double> q;
  bool operator==(const DeliveryVector&) const = default;
};

struct WorkloadVector {
  std::vector<double> w;
};

struct BidVector {
  std::vector<double> rho;
  bool operator==(const BidVector&) const = default;
};

// w_n = q_n / p_n, the expected slots per period needed to sustain q_n.
WorkloadVector workload(const DeliveryVector& q, const SystemConfig& cfg);

// Expected forced-idle slots per period when the roster is restricted to
// `subset`. Exact convolution DP over the busy-slot distribution truncated
// at tau; mass past tau contributes no idle time. idle_time of the empty
// set is tau.
double idle_time(SubsetMask subset, const SystemConfig& cfg);
double idle_time(const std::vector<int>& ids, const SystemConfig& cfg);

struct FeasibilityReport {
  bool feasible = true;
  SubsetMask worst_subset = 0;  // nonempty subset with the least slack
  double min_slack = 0.0;       // (tau - I_S) - sum_{i in S} q_i/p_i there
};

// Checks sum_{i in S} q_i/p_i <= tau - I_S + solver_tol over every nonempty
// subset S. The empty subset is vacuous and skipped.
FeasibilityReport is_feasible(const DeliveryVector& q, const SystemConfig& cfg);

// Visits every subset S with base ⊊ S ⊆ base ∪ pool, reporting (S, I_S).
// The busy-slot distribution is carried incrementally, so the whole scan
// costs O(2^|pool| · tau). Deterministic visiting order.
void scan_idle_times(const SystemConfig& cfg, SubsetMask base, SubsetMask pool,
                     const std::function<void(SubsetMask, double)>& visit);

}  // namespace qos
