#include "qos/policy_limit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qos {

namespace {

constexpr double kTieEps = 1e-12;

// True when a's ascending id sequence precedes b's lexicographically.
bool lex_less(SubsetMask a, SubsetMask b) {
  while (a != 0 && b != 0) {
    const int la = std::countr_zero(a);
    const int lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

}  // namespace

PolicyParams PolicyParams::weighted_transmission(const BidVector& rho) {
  PolicyParams params;
  params.a.reserve(rho.rho.size());
  for (double r : rho.rho) {
    if (!(r > 0.0)) {
      throw std::invalid_argument("weighted transmission requires positive bids");
    }
    params.a.push_back(1.0 / r);
  }
  params.b.assign(rho.rho.size(), 0.0);
  return params;
}

void PolicyParams::validate(int n) const {
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n) {
    throw std::invalid_argument("policy parameter size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (!(a[i] > 0.0)) throw std::invalid_argument("a must be positive");
    if (!(b[i] >= 0.0)) throw std::invalid_argument("b must be non-negative");
  }
}

SubsetMask LimitDecomposition::newly_added(std::size_t k) const {
  const SubsetMask prev = k == 0 ? 0u : levels[k - 1].set;
  return levels[k].set & ~prev;
}

LimitResult analytic_policy_limit(const PolicyParams& params,
                                  const SystemConfig& cfg) {
  cfg.validate();
  cfg.require_enumerable();
  const int n = cfg.size();
  params.validate(n);

  LimitResult result;
  result.q.q.assign(n, 0.0);

  const SubsetMask full = full_mask(n);
  SubsetMask covered = 0;
  double idle_covered = cfg.tau;  // I of the empty set
  double prev_theta = -std::numeric_limits<double>::infinity();

  while (covered != full) {
    SubsetMask best_set = 0;
    double best_value = std::numeric_limits<double>::infinity();
    double best_idle = 0.0;

    scan_idle_times(cfg, covered, full & ~covered,
                    [&](SubsetMask s, double idle) {
                      double sum_ba = 0.0;
                      double sum_inv_a = 0.0;
                      for (SubsetMask m = s & ~covered; m != 0; m &= m - 1) {
                        const int i = std::countr_zero(m);
                        sum_ba += params.b[i] / params.a[i];
                        sum_inv_a += 1.0 / params.a[i];
                      }
                      const double value =
                          ((idle_covered - idle) / cfg.tau - sum_ba) / sum_inv_a;

                      if (value < best_value - kTieEps) {
                        best_value = value;
                        best_set = s;
                        best_idle = idle;
                        return;
                      }
                      if (value > best_value + kTieEps) return;
                      best_value = std::min(best_value, value);
                      // tie: maximal cardinality, then lexicographically
                      // smallest id sequence
                      const int pc_new = std::popcount(s);
                      const int pc_old = std::popcount(best_set);
                      if (pc_new > pc_old ||
                          (pc_new == pc_old && lex_less(s, best_set))) {
                        best_set = s;
                        best_idle = idle;
                      }
                    });

    if (!(best_value > prev_theta)) {
      std::ostringstream os;
      os << "policy limit recursion produced non-increasing level value "
         << best_value << " after " << prev_theta;
      throw std::runtime_error(os.str());
    }

    for (SubsetMask m = best_set & ~covered; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      double qi = cfg.tau * cfg.clients[i].p * (params.b[i] + best_value) /
                  params.a[i];
      if (qi < -cfg.solver_tol || qi > 1.0 + cfg.solver_tol) {
        std::ostringstream os;
        os << "limit delivery ratio " << qi << " for client " << (i + 1)
           << " escapes [0,1]";
        throw std::runtime_error(os.str());
      }
      result.q.q[i] = std::clamp(qi, 0.0, 1.0);
    }

    result.decomposition.levels.push_back({best_set, best_value, best_idle});
    covered = best_set;
    idle_covered = best_idle;
    prev_theta = best_value;
  }

  return result;
}

AccessPointSolution solve_access_point(const BidVector& rho,
                                       const SystemConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(rho.rho.size()) != cfg.size()) {
    throw std::invalid_argument("bid vector size mismatch");
  }
  for (double r : rho.rho) {
    if (!(r > 0.0)) {
      throw std::invalid_argument("bids must be strictly positive");
    }
  }

  LimitResult lim =
      analytic_policy_limit(PolicyParams::weighted_transmission(rho), cfg);

  AccessPointSolution sol;
  sol.q = std::move(lim.q);
  sol.decomposition = std::move(lim.decomposition);
  sol.certificate.context = KKTContext::AccessPoint;
  sol.certificate.mu.assign(cfg.size(), 0.0);

  const auto& levels = sol.decomposition.levels;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    double z = 1.0 / (cfg.tau * levels[k].theta);
    if (k + 1 < levels.size()) {
      z -= 1.0 / (cfg.tau * levels[k + 1].theta);
    }
    sol.certificate.zeta[levels[k].set] = z;
  }

  sol.objective = 0.0;
  for (int i = 0; i < cfg.size(); ++i) {
    sol.objective += rho.rho[i] * std::log(sol.q.q[i]);
  }
  return sol;
}

namespace {

void kkt_fail(KKTReport& report, const std::string& message) {
  report.pass = false;
  report.failures.push_back(message);
}

// Shared skeleton: `price` is the marginal objective value at q_n, i.e.
// rho_n / q_n for the log program and U_n'(q_n) for the total-utility
// program.
KKTReport verify_kkt(const DeliveryVector& q, const KKTCertificate& cert,
                     const SystemConfig& cfg, double tol,
                     const std::function<double(int)>& price) {
  cfg.validate();
  cfg.require_enumerable();
  const int n = cfg.size();
  if (static_cast<int>(q.q.size()) != n ||
      static_cast<int>(cert.mu.size()) != n) {
    throw std::invalid_argument("kkt certificate size mismatch");
  }

  KKTReport report;
  report.min_multiplier = std::numeric_limits<double>::infinity();

  const FeasibilityReport fr = is_feasible(q, cfg);
  report.primal_feasible = fr.feasible;
  if (!fr.feasible) {
    kkt_fail(report, "point infeasible: subset " +
                         mask_to_string(fr.worst_subset) + " slack " +
                         std::to_string(fr.min_slack));
  }

  // stationarity and mu complementarity
  for (int i = 0; i < n; ++i) {
    double zeta_sum = 0.0;
    for (const auto& [mask, z] : cert.zeta) {
      if (mask & (SubsetMask{1} << i)) zeta_sum += z;
    }
    if (!(q.q[i] > 0.0)) {
      kkt_fail(report,
               "client " + std::to_string(i + 1) + " has zero delivery ratio");
      continue;
    }
    const double residual =
        -price(i) + zeta_sum / cfg.clients[i].p - cert.mu[i];
    report.max_stationarity =
        std::max(report.max_stationarity, std::abs(residual));
    if (std::abs(residual) > tol) {
      kkt_fail(report, "stationarity violated for client " +
                           std::to_string(i + 1) + ": residual " +
                           std::to_string(residual));
    }
    const double mu_slack = std::abs(cert.mu[i] * q.q[i]);
    report.max_complementarity = std::max(report.max_complementarity, mu_slack);
    if (mu_slack > tol) {
      kkt_fail(report, "mu complementarity violated for client " +
                           std::to_string(i + 1));
    }
    report.min_multiplier = std::min(report.min_multiplier, cert.mu[i]);
    if (cert.mu[i] < -tol) {
      kkt_fail(report, "negative mu for client " + std::to_string(i + 1));
    }
  }

  // complementary slackness on the multiplier support; every other subset
  // carries a zero multiplier and holds identically
  for (const auto& [mask, z] : cert.zeta) {
    if ((mask & ~full_mask(n)) != 0 || mask == 0) {
      kkt_fail(report, "certificate names invalid subset " +
                           mask_to_string(mask));
      continue;
    }
    report.min_multiplier = std::min(report.min_multiplier, z);
    if (z < -tol) {
      kkt_fail(report, "negative subset multiplier on " + mask_to_string(mask));
    }
    double load = 0.0;
    for (SubsetMask m = mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      load += q.q[i] / cfg.clients[i].p;
    }
    const double slack = (cfg.tau - idle_time(mask, cfg)) - load;
    const double cs = std::abs(z * slack);
    report.max_complementarity = std::max(report.max_complementarity, cs);
    if (cs > tol) {
      kkt_fail(report, "complementary slackness violated on " +
                           mask_to_string(mask) + ": |zeta*slack| " +
                           std::to_string(cs));
    }
  }

  if (cert.zeta.empty() && n > 0) {
    report.min_multiplier = 0.0;
  }
  return report;
}

}  // namespace

KKTReport verify_kkt_access_point(const DeliveryVector& q,
                                  const KKTCertificate& cert,
                                  const BidVector& rho,
                                  const SystemConfig& cfg) {
  if (static_cast<int>(rho.rho.size()) != cfg.size()) {
    throw std::invalid_argument("bid vector size mismatch");
  }
  return verify_kkt(q, cert, cfg, cfg.solver_tol,
                    [&](int i) { return rho.rho[i] / q.q[i]; });
}

KKTReport verify_kkt_system(const DeliveryVector& q, const KKTCertificate& cert,
                            const SystemConfig& cfg, double tol) {
  for (const ClientSpec& c : cfg.clients) {
    if (!c.utility) {
      throw std::invalid_argument("system verification requires utilities");
    }
  }
  return verify_kkt(q, cert, cfg, tol, [&](int i) {
    return cfg.clients[i].utility->derivative(q.q[i]);
  });
}

std::optional<DeliveryVector> special_case_tot(const BidVector& rho,
                                               const SystemConfig& cfg) {
  cfg.validate();
  cfg.require_enumerable();
  if (static_cast<int>(rho.rho.size()) != cfg.size()) {
    throw std::invalid_argument("bid vector size mismatch");
  }
  double sum_rho = 0.0;
  for (double r : rho.rho) {
    if (!(r > 0.0)) {
      throw std::invalid_argument("bids must be strictly positive");
    }
    sum_rho += r;
  }
  if (cfg.size() == 0) return DeliveryVector{};

  const double capacity = cfg.tau - idle_time(full_mask(cfg.size()), cfg);
  DeliveryVector q;
  q.q.reserve(cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    const double qi = cfg.clients[i].p * rho.rho[i] / sum_rho * capacity;
    if (qi > 1.0 + cfg.solver_tol) return std::nullopt;
    q.q.push_back(std::min(qi, 1.0));
  }
  if (!is_feasible(q, cfg).feasible) return std::nullopt;
  return q;
}

}  // namespace qos
