#include "qos/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qos {

std::vector<double> SimStats::empirical_q() const {
  std::vector<double> q(deliveries.size(), 0.0);
  if (periods == 0) return q;
  for (std::size_t i = 0; i < deliveries.size(); ++i) {
    q[i] = static_cast<double>(deliveries[i]) / static_cast<double>(periods);
  }
  return q;
}

namespace {

std::vector<int> ascending_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

std::vector<int> sort_by_key(int n, const std::vector<double>& key) {
  std::vector<int> ids = ascending_ids(n);
  // stable: equal keys stay in ascending-id order
  std::stable_sort(ids.begin(), ids.end(), [&](int lhs, int rhs) {
    return key[lhs - 1] < key[rhs - 1];
  });
  return ids;
}

const PolicyParams* ordering_params(const Policy& policy) {
  if (const auto* gtt = std::get_if<GeneralizedTT>(&policy)) {
    return &gtt->params;
  }
  return nullptr;
}

}  // namespace

std::vector<int> priority_order(const Policy& policy,
                                const std::vector<std::int64_t>& u,
                                std::int64_t t, Rng& rng) {
  const int n = static_cast<int>(u.size());

  if (const auto* wt = std::get_if<WeightedTransmission>(&policy)) {
    // identical keys to GeneralizedTT(1/rho, 0), so the two policies produce
    // the same slot-by-slot trace
    const PolicyParams params = PolicyParams::weighted_transmission(wt->rho);
    std::vector<double> key(n);
    for (int i = 0; i < n; ++i) {
      key[i] = params.a[i] * static_cast<double>(u[i]);
    }
    return sort_by_key(n, key);
  }
  if (const auto* gtt = ordering_params(policy)) {
    gtt->validate(n);
    std::vector<double> key(n);
    for (int i = 0; i < n; ++i) {
      key[i] = gtt->a[i] * static_cast<double>(u[i]) -
               gtt->b[i] * static_cast<double>(t);
    }
    return sort_by_key(n, key);
  }
  if (std::holds_alternative<RandomOrder>(policy)) {
    std::vector<int> ids = ascending_ids(n);
    rng.shuffle(ids);
    return ids;
  }
  const auto& prand = std::get<PriorityRandom>(policy);
  if (static_cast<int>(prand.key.size()) != n) {
    throw std::invalid_argument("priority key size mismatch");
  }
  std::vector<int> ids = ascending_ids(n);
  rng.shuffle(ids);
  // stable sort keeps the shuffled order among equal keys
  std::stable_sort(ids.begin(), ids.end(), [&](int lhs, int rhs) {
    return prand.key[lhs - 1] > prand.key[rhs - 1];
  });
  return ids;
}

Simulator::Simulator(Policy policy, const SystemConfig& cfg, RngSpec rng,
                     std::int64_t checkpoint_every)
    : policy_(std::move(policy)),
      cfg_(cfg),
      rng_(rng),
      checkpoint_every_(checkpoint_every) {
  cfg_.validate();
  if (const auto* wt = std::get_if<WeightedTransmission>(&policy_)) {
    if (static_cast<int>(wt->rho.rho.size()) != cfg_.size()) {
      throw std::invalid_argument("bid vector size mismatch");
    }
  }
  stats_.allocated_slots.assign(cfg_.size(), 0);
  stats_.deliveries.assign(cfg_.size(), 0);
}

void Simulator::set_bids(const BidVector& rho) {
  auto* wt = std::get_if<WeightedTransmission>(&policy_);
  if (wt == nullptr) {
    throw std::invalid_argument("set_bids needs a weighted-transmission policy");
  }
  if (static_cast<int>(rho.rho.size()) != cfg_.size()) {
    throw std::invalid_argument("bid vector size mismatch");
  }
  for (double r : rho.rho) {
    if (!(r > 0.0)) throw std::invalid_argument("bids must be positive");
  }
  wt->rho = rho;
}

void Simulator::run(std::int64_t periods) {
  if (periods < 0) throw std::invalid_argument("periods must be non-negative");
  const int n = cfg_.size();
  std::vector<char> pending(n);

  for (std::int64_t k = 0; k < periods; ++k) {
    const std::int64_t t = stats_.periods * cfg_.tau;
    const std::vector<int> order =
        priority_order(policy_, stats_.allocated_slots, t, rng_);
    std::fill(pending.begin(), pending.end(), 1);
    int undelivered = n;

    for (int slot = 0; slot < cfg_.tau; ++slot) {
      if (undelivered == 0) {
        stats_.idle_slots += cfg_.tau - slot;
        break;
      }
      int target = -1;
      for (int id : order) {
        if (pending[id - 1]) {
          target = id - 1;
          break;
        }
      }
      ++stats_.allocated_slots[target];
      if (rng_.bernoulli(cfg_.clients[target].p)) {
        pending[target] = 0;
        --undelivered;
        ++stats_.deliveries[target];
      }
    }

    ++stats_.periods;
    if (checkpoint_every_ > 0 && stats_.periods % checkpoint_every_ == 0) {
      stats_.trajectory.push_back({stats_.periods, stats_.empirical_q()});
    }
  }
}

SimStats run_simulation(const Policy& policy, const SystemConfig& cfg,
                        std::int64_t periods, RngSpec rng,
                        std::int64_t checkpoint_every) {
  if (periods < 1) throw std::invalid_argument("periods must be at least 1");
  Simulator sim(policy, cfg, rng, checkpoint_every);
  sim.run(periods);
  return sim.stats();
}

ComparisonReport empirical_vs_analytic(const Policy& policy,
                                       const SystemConfig& cfg,
                                       std::int64_t periods, RngSpec rng) {
  PolicyParams params;
  if (const auto* wt = std::get_if<WeightedTransmission>(&policy)) {
    params = PolicyParams::weighted_transmission(wt->rho);
  } else if (const auto* gtt = std::get_if<GeneralizedTT>(&policy)) {
    params = gtt->params;
  } else {
    throw std::invalid_argument(
        "analytic comparison needs a transmission-time policy");
  }

  ComparisonReport report;
  report.analytic = analytic_policy_limit(params, cfg).q;
  const SimStats stats = run_simulation(policy, cfg, periods, rng);
  report.empirical.q = stats.empirical_q();

  report.ci_halfwidth.resize(cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    const double qe = report.empirical.q[i];
    report.ci_halfwidth[i] =
        3.0 * std::sqrt(qe * (1.0 - qe) / static_cast<double>(periods));
    report.max_gap =
        std::max(report.max_gap, std::abs(qe - report.analytic.q[i]));
  }
  return report;
}

}  // namespace qos
