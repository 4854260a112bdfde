#include "qos/model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qos {

SubsetMask full_mask(int n) {
  if (n < 0 || n > 30) {
    throw std::invalid_argument("client count out of mask range");
  }
  return n == 0 ? 0u : ((SubsetMask{1} << n) - 1u);
}

std::vector<int> mask_to_ids(SubsetMask mask) {
  std::vector<int> ids;
  for (SubsetMask m = mask; m != 0; m &= m - 1) {
    ids.push_back(std::countr_zero(m) + 1);
  }
  return ids;
}

SubsetMask ids_to_mask(const std::vector<int>& ids, int n) {
  SubsetMask mask = 0;
  for (int id : ids) {
    if (id < 1 || id > n) {
      throw std::invalid_argument("unknown client id " + std::to_string(id));
    }
    mask |= SubsetMask{1} << (id - 1);
  }
  return mask;
}

std::string mask_to_string(SubsetMask mask) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int id : mask_to_ids(mask)) {
    if (!first) os << ',';
    os << id;
    first = false;
  }
  os << '}';
  return os.str();
}

void SystemConfig::validate() const {
  if (tau < 1) {
    throw std::invalid_argument("tau must be at least 1");
  }
  if (subset_limit < 1 || subset_limit > 30) {
    throw std::invalid_argument("subset_limit must lie in [1,30]");
  }
  if (!(solver_tol > 0.0) || !(sim_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  for (int i = 0; i < size(); ++i) {
    const ClientSpec& c = clients[i];
    if (c.id != i + 1) {
      throw std::invalid_argument("client ids must be contiguous from 1");
    }
    if (!(c.p > 0.0 && c.p <= 1.0)) {
      throw std::invalid_argument("client reliability must lie in (0,1]");
    }
    if (!(c.initial_bid > 0.0)) {
      throw std::invalid_argument("initial bid must be positive");
    }
  }
}

void SystemConfig::require_enumerable() const {
  if (size() > subset_limit) {
    throw std::invalid_argument(
        "subset enumeration refused: " + std::to_string(size()) +
        " clients exceed subset_limit " + std::to_string(subset_limit));
  }
}

WorkloadVector workload(const DeliveryVector& q, const SystemConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(q.q.size()) != cfg.size()) {
    throw std::invalid_argument("delivery vector size mismatch");
  }
  WorkloadVector w;
  w.w.reserve(q.q.size());
  for (int i = 0; i < cfg.size(); ++i) {
    if (!(q.q[i] >= 0.0 && q.q[i] <= 1.0)) {
      throw std::invalid_argument("delivery ratio out of [0,1]");
    }
    w.w.push_back(q.q[i] / cfg.clients[i].p);
  }
  return w;
}

namespace {

// dist[t] = P(total busy slots == t), t in [0, tau]; the tail past tau is
// dropped since it contributes no idle time. Folding in one geometric
// attempt count runs the memoryless recursion
//   out[t] = p * dist[t-1] + (1-p) * out[t-1].
void convolve_geometric(const std::vector<double>& dist, double p,
                        std::vector<double>& out) {
  const std::size_t len = dist.size();
  out.assign(len, 0.0);
  for (std::size_t t = 1; t < len; ++t) {
    out[t] = p * dist[t - 1] + (1.0 - p) * out[t - 1];
  }
}

double idle_from(const std::vector<double>& dist) {
  const int tau = static_cast<int>(dist.size()) - 1;
  double idle = 0.0;
  for (int t = 0; t < tau; ++t) {
    idle += static_cast<double>(tau - t) * dist[t];
  }
  return idle;
}

struct SubsetScanner {
  const SystemConfig& cfg;
  std::vector<int> pool_indices;  // 0-based client indices
  const std::function<void(SubsetMask, double)>& visit;
  SubsetMask base;
  // one distribution per recursion depth, reused across branches
  std::vector<std::vector<double>> scratch;

  void recurse(std::size_t depth, SubsetMask current,
               const std::vector<double>& dist) {
    if (depth == pool_indices.size()) {
      if (current != base) visit(current, idle_from(dist));
      return;
    }
    recurse(depth + 1, current, dist);
    const int idx = pool_indices[depth];
    convolve_geometric(dist, cfg.clients[idx].p, scratch[depth]);
    recurse(depth + 1, current | (SubsetMask{1} << idx), scratch[depth]);
  }
};

}  // namespace

void scan_idle_times(const SystemConfig& cfg, SubsetMask base, SubsetMask pool,
                     const std::function<void(SubsetMask, double)>& visit) {
  cfg.validate();
  const SubsetMask full = full_mask(cfg.size());
  if ((base & ~full) != 0 || (pool & ~full) != 0 || (base & pool) != 0) {
    throw std::invalid_argument("invalid base/pool masks");
  }

  std::vector<double> dist(static_cast<std::size_t>(cfg.tau) + 1, 0.0);
  dist[0] = 1.0;
  for (SubsetMask m = base; m != 0; m &= m - 1) {
    std::vector<double> next;
    convolve_geometric(dist, cfg.clients[std::countr_zero(m)].p, next);
    dist.swap(next);
  }

  SubsetScanner scanner{cfg, {}, visit, base, {}};
  for (SubsetMask m = pool; m != 0; m &= m - 1) {
    scanner.pool_indices.push_back(std::countr_zero(m));
  }
  scanner.scratch.assign(scanner.pool_indices.size(),
                         std::vector<double>(dist.size()));
  scanner.recurse(0, base, dist);
}

double idle_time(SubsetMask subset, const SystemConfig& cfg) {
  cfg.validate();
  if ((subset & ~full_mask(cfg.size())) != 0) {
    throw std::invalid_argument("subset contains unknown client ids");
  }
  std::vector<double> dist(static_cast<std::size_t>(cfg.tau) + 1, 0.0);
  dist[0] = 1.0;
  std::vector<double> next(dist.size());
  for (SubsetMask m = subset; m != 0; m &= m - 1) {
    convolve_geometric(dist, cfg.clients[std::countr_zero(m)].p, next);
    dist.swap(next);
  }
  return idle_from(dist);
}

double idle_time(const std::vector<int>& ids, const SystemConfig& cfg) {
  return idle_time(ids_to_mask(ids, cfg.size()), cfg);
}

FeasibilityReport is_feasible(const DeliveryVector& q, const SystemConfig& cfg) {
  cfg.validate();
  cfg.require_enumerable();
  const WorkloadVector w = workload(q, cfg);

  FeasibilityReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  if (cfg.size() == 0) {
    return report;
  }

  scan_idle_times(cfg, 0, full_mask(cfg.size()),
                  [&](SubsetMask s, double idle) {
                    double load = 0.0;
                    for (SubsetMask m = s; m != 0; m &= m - 1) {
                      load += w.w[std::countr_zero(m)];
                    }
                    const double slack = (cfg.tau - idle) - load;
                    if (slack < report.min_slack) {
                      report.min_slack = slack;
                      report.worst_subset = s;
                    }
                  });
  report.feasible = report.min_slack >= -cfg.solver_tol;
  return report;
}

}  // namespace qos
