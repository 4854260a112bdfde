#include "qos/fairness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qos/policy_limit.hpp"

namespace qos {

namespace {

void check_pair(const DeliveryVector& q, const DeliveryVector& q_alt,
                const BidVector& rho, const SystemConfig& cfg) {
  const int n = cfg.size();
  if (static_cast<int>(q.q.size()) != n ||
      static_cast<int>(q_alt.q.size()) != n ||
      static_cast<int>(rho.rho.size()) != n) {
    throw std::invalid_argument("vector size mismatch");
  }
  for (double r : rho.rho) {
    if (!(r > 0.0)) throw std::invalid_argument("weights must be positive");
  }
  if (!is_feasible(q_alt, cfg).feasible) {
    throw std::invalid_argument("alternative delivery vector is infeasible");
  }
}

}  // namespace

FairnessReport check_weighted_max_min(const DeliveryVector& q,
                                      const DeliveryVector& q_alt,
                                      const BidVector& rho,
                                      const SystemConfig& cfg, double tol) {
  cfg.validate();
  check_pair(q, q_alt, rho, cfg);
  const int n = cfg.size();

  FairnessReport report;
  report.criterion = FairnessCriterion::MaxMin;
  report.tested = q_alt;
  report.tol = tol;

  for (int i = 0; i < n; ++i) {
    if (!(q_alt.q[i] > q.q[i] + tol)) continue;
    const double ratio_i = q.q[i] / cfg.clients[i].p / rho.rho[i];
    int witness = -1;
    for (int j = 0; j < n; ++j) {
      if (q_alt.q[j] < q.q[j] - tol &&
          ratio_i >= q.q[j] / cfg.clients[j].p / rho.rho[j] - tol) {
        witness = j + 1;
        break;
      }
    }
    report.witnesses.emplace_back(i + 1, witness);
    if (witness < 0) report.fair = false;
  }
  return report;
}

FairnessReport check_proportional_fairness(const DeliveryVector& q,
                                           const DeliveryVector& q_alt,
                                           const BidVector& rho,
                                           const SystemConfig& cfg,
                                           double tol) {
  cfg.validate();
  check_pair(q, q_alt, rho, cfg);
  const int n = cfg.size();
  for (double qi : q.q) {
    if (!(qi > 0.0)) {
      throw std::invalid_argument(
          "proportional fairness needs strictly positive base ratios");
    }
  }

  FairnessReport report;
  report.criterion = FairnessCriterion::Proportional;
  report.tested = q_alt;
  report.tol = tol;

  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = q.q[i] / cfg.clients[i].p;
    const double w_alt = q_alt.q[i] / cfg.clients[i].p;
    sum += (w_alt - w) / (w / rho.rho[i]);
  }
  report.sum = sum;
  report.fair = sum <= tol;
  return report;
}

std::vector<DeliveryVector> sample_feasible(const SystemConfig& cfg, Rng& rng,
                                            int count) {
  cfg.validate();
  cfg.require_enumerable();
  if (count < 0) throw std::invalid_argument("count must be non-negative");
  const int n = cfg.size();

  std::vector<DeliveryVector> samples;
  samples.reserve(count);
  if (n == 0) {
    samples.assign(count, DeliveryVector{});
    return samples;
  }

  for (int k = 0; k < count; ++k) {
    DeliveryVector q;
    if (k % 2 == 0) {
      // uniform draw, scaled onto (or near) the feasible boundary
      q.q.resize(n);
      for (int i = 0; i < n; ++i) q.q[i] = rng.next_double();

      double max_scale = std::numeric_limits<double>::infinity();
      scan_idle_times(cfg, 0, full_mask(n), [&](SubsetMask s, double idle) {
        double load = 0.0;
        for (SubsetMask m = s; m != 0; m &= m - 1) {
          const int i = std::countr_zero(m);
          load += q.q[i] / cfg.clients[i].p;
        }
        if (load > 0.0) {
          max_scale = std::min(max_scale, (cfg.tau - idle) / load);
        }
      });
      // every fourth draw sits on the boundary itself
      double factor = (k % 4 == 0) ? 1.0 : rng.uniform(0.3, 1.0);
      factor = std::min(factor * max_scale, 1.0);
      for (double& qi : q.q) qi *= factor;
    } else {
      // boundary points of the log-program optimum under random bids
      BidVector bids;
      bids.rho.resize(n);
      for (double& r : bids.rho) r = rng.uniform(0.1, 3.0);
      q = solve_access_point(bids, cfg).q;
      if (k % 4 != 1) {
        const double factor = rng.uniform(0.5, 1.0);
        for (double& qi : q.q) qi *= factor;
      }
    }

    // exact-arithmetic guard: shave until the report accepts
    for (int guard = 0; guard < 64 && !is_feasible(q, cfg).feasible; ++guard) {
      for (double& qi : q.q) qi *= 1.0 - 1e-12;
    }
    samples.push_back(std::move(q));
  }
  return samples;
}

}  // namespace qos
