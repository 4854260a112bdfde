#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qos/model.hpp"

namespace qos {

// Priority keys a_n * u_n(t) - b_n * t; smaller key means higher priority.
// a = 1/rho, b = 0 is the weighted-transmission policy; a = 1, b = q/p is
// the time-based-debt policy.
struct PolicyParams {
  std::vector<double> a;  // positive
  std::vector<double> b;  // non-negative

  static PolicyParams weighted_transmission(const BidVector& rho);
  void validate(int n) const;
};

struct LimitLevel {
  SubsetMask set = 0;   // H_k, cumulative: H_1 ⊊ H_2 ⊊ ... ⊊ H_K = full
  double theta = 0.0;
  double idle = 0.0;    // I_{H_k}
};

struct LimitDecomposition {
  std::vector<LimitLevel> levels;  // theta strictly increasing in k

  // H_k \ H_{k-1} for the 0-based level index k.
  SubsetMask newly_added(std::size_t k) const;
};

enum class KKTContext { AccessPoint, System, Client };

// Multiplier set certifying optimality of a candidate point. Under the
// AccessPoint context (zeta, mu) are the subset/positivity multipliers; the
// System context reads them as (lambda, nu); the Client context uses the
// scalar xi only.
struct KKTCertificate {
  KKTContext context = KKTContext::AccessPoint;
  std::map<SubsetMask, double> zeta;
  std::vector<double> mu;
  double xi = 0.0;
};

struct LimitResult {
  LimitDecomposition decomposition;
  DeliveryVector q;
};

// The limiting delivery ratios of a generalized transmission-time policy:
// peel off nested argmin sets H_k with level values theta_k, then
// q_n = tau * p_n * (b_n + theta_k) / a_n for n in H_k \ H_{k-1}.
// Ties in the argmin resolve to the maximal-cardinality set, then the
// lexicographically smallest id sequence.
LimitResult analytic_policy_limit(const PolicyParams& params,
                                  const SystemConfig& cfg);

struct AccessPointSolution {
  DeliveryVector q;
  KKTCertificate certificate;
  LimitDecomposition decomposition;
  double objective = 0.0;  // sum_n rho_n log q_n
};

// Maximizes sum rho_n log q_n over the feasible region via the
// weighted-transmission limit, and builds the nested-support certificate
// zeta_{H_k} = 1/(tau theta_k) - 1/(tau theta_{k+1}), zeta_{H_K} =
// 1/(tau theta_K), mu = 0.
AccessPointSolution solve_access_point(const BidVector& rho,
                                       const SystemConfig& cfg);

struct KKTReport {
  bool pass = true;
  bool primal_feasible = true;
  double max_stationarity = 0.0;    // worst |stationarity residual|
  double max_complementarity = 0.0; // worst |multiplier * slack|
  double min_multiplier = 0.0;
  std::vector<std::string> failures;
};

// Checks the certificate against the delivered point to cfg.solver_tol:
// stationarity -rho_n/q_n + (sum_{S∋n} zeta_S)/p_n - mu_n = 0, complementary
// slackness on every subset with a nonzero multiplier, mu_n q_n = 0, and
// non-negativity. Off-support subsets have zeta_S = 0, so their products
// vanish identically.
KKTReport verify_kkt_access_point(const DeliveryVector& q,
                                  const KKTCertificate& cert,
                                  const BidVector& rho,
                                  const SystemConfig& cfg);

// Same structure for the total-utility program: stationarity
// -U_n'(q_n) + (sum_{S∋n} lambda_S)/p_n - nu_n = 0.
KKTReport verify_kkt_system(const DeliveryVector& q, const KKTCertificate& cert,
                            const SystemConfig& cfg, double tol);

// Closed form for the single-bottleneck case: q_n/p_n =
// (rho_n / sum rho) * (tau - I_TOT). Returned only when that point is
// feasible with q <= 1; it then matches solve_access_point to solver_tol.
std::optional<DeliveryVector> special_case_tot(const BidVector& rho,
                                               const SystemConfig& cfg);

}  // namespace qos
