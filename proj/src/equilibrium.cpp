#include "qos/equilibrium.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace qos {

namespace {

void require_utilities(const SystemConfig& cfg) {
  for (const ClientSpec& c : cfg.clients) {
    if (!c.utility) {
      throw std::invalid_argument("every client needs a utility function");
    }
  }
}

double total_utility(const SystemConfig& cfg, const std::vector<double>& q) {
  double sum = 0.0;
  for (int i = 0; i < cfg.size(); ++i) {
    sum += cfg.clients[i].utility->value(q[i]);
  }
  return sum;
}

}  // namespace

BiddingTrace run_bidding_game(const SystemConfig& cfg, double alpha,
                              int max_iters, double fp_tol,
                              const ApBackend& backend) {
  cfg.validate();
  require_utilities(cfg);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");

  const int n = cfg.size();
  BidVector rho;
  rho.rho.reserve(n);
  for (const ClientSpec& c : cfg.clients) rho.rho.push_back(c.initial_bid);

  std::unique_ptr<Simulator> sim;
  std::vector<std::int64_t> delivered_before(n, 0);
  const auto* sim_backend = std::get_if<SimulationBackend>(&backend);
  if (sim_backend != nullptr) {
    if (sim_backend->periods_per_round < 1) {
      throw std::invalid_argument("periods_per_round must be positive");
    }
    sim = std::make_unique<Simulator>(WeightedTransmission{rho}, cfg,
                                      sim_backend->rng);
  }

  BiddingTrace trace;
  for (int iter = 1; iter <= max_iters; ++iter) {
    BiddingState state;
    state.iteration = iter;
    state.rho = rho;

    if (sim_backend != nullptr) {
      sim->set_bids(rho);
      delivered_before = sim->stats().deliveries;
      sim->run(sim_backend->periods_per_round);
      state.q.q.resize(n);
      for (int i = 0; i < n; ++i) {
        const double q =
            static_cast<double>(sim->stats().deliveries[i] -
                                delivered_before[i]) /
            static_cast<double>(sim_backend->periods_per_round);
        state.q.q[i] = q > 0.0 ? q : 0.001;  // observed zeros are floored
      }
    } else {
      state.q = solve_access_point(rho, cfg).q;
    }

    state.psi.resize(n);
    BidVector next;
    next.rho.resize(n);
    double residual = 0.0;
    for (int i = 0; i < n; ++i) {
      state.psi[i] = rho.rho[i] / state.q.q[i];
      const ClientResponse br =
          client_best_response(state.psi[i], *cfg.clients[i].utility);
      next.rho[i] = (1.0 - alpha) * rho.rho[i] + alpha * br.rho_star;
      residual = std::max(residual, std::abs(next.rho[i] - rho.rho[i]));
    }
    state.total_utility = total_utility(cfg, state.q.q);

    trace.states.push_back(std::move(state));
    trace.residuals.push_back(residual);
    rho = std::move(next);

    if (residual < fp_tol) {
      trace.converged = true;
      break;
    }
  }

  if (sim != nullptr) trace.sim_stats = sim->stats();
  return trace;
}

double fixed_point_residual(const BiddingState& state, const SystemConfig& cfg) {
  cfg.validate();
  require_utilities(cfg);
  double residual = 0.0;
  for (int i = 0; i < cfg.size(); ++i) {
    const ClientResponse br =
        client_best_response(state.psi[i], *cfg.clients[i].utility);
    residual = std::max(residual, std::abs(br.rho_star - state.rho.rho[i]));
  }
  return residual;
}

// ---------------------------------------------------------------------------
// SYSTEM solver: log-barrier path following + active-set Newton polish.
// ---------------------------------------------------------------------------

namespace {

struct Constraint {
  SubsetMask mask;
  double capacity;  // tau - I_S
};

struct BarrierProblem {
  const SystemConfig& cfg;
  std::vector<Constraint> constraints;

  int n() const { return cfg.size(); }

  double slack(const Constraint& c, const Eigen::VectorXd& q) const {
    double load = 0.0;
    for (SubsetMask m = c.mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      load += q[i] / cfg.clients[i].p;
    }
    return c.capacity - load;
  }

  bool strictly_feasible(const Eigen::VectorXd& q) const {
    for (int i = 0; i < n(); ++i) {
      if (!(q[i] > 0.0)) return false;
    }
    for (const Constraint& c : constraints) {
      if (!(slack(c, q) > 0.0)) return false;
    }
    return true;
  }

  double second_derivative(int i, double q) const {
    const double h = 1e-6 * std::max(q, 1e-3);
    const UtilityFunction& u = *cfg.clients[i].utility;
    return (u.derivative(q + h) - u.derivative(q - h)) / (2.0 * h);
  }

  double value(double t, const Eigen::VectorXd& q) const {
    double phi = 0.0;
    for (int i = 0; i < n(); ++i) {
      phi -= t * cfg.clients[i].utility->value(q[i]);
      phi -= std::log(q[i]);
    }
    for (const Constraint& c : constraints) {
      phi -= std::log(slack(c, q));
    }
    return phi;
  }

  Eigen::VectorXd gradient(double t, const Eigen::VectorXd& q) const {
    Eigen::VectorXd g(n());
    for (int i = 0; i < n(); ++i) {
      g[i] = -t * cfg.clients[i].utility->derivative(q[i]) - 1.0 / q[i];
    }
    for (const Constraint& c : constraints) {
      const double inv_slack = 1.0 / slack(c, q);
      for (SubsetMask m = c.mask; m != 0; m &= m - 1) {
        const int i = std::countr_zero(m);
        g[i] += inv_slack / cfg.clients[i].p;
      }
    }
    return g;
  }

  Eigen::MatrixXd hessian(double t, const Eigen::VectorXd& q) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n(), n());
    for (int i = 0; i < n(); ++i) {
      h(i, i) = -t * second_derivative(i, q[i]) + 1.0 / (q[i] * q[i]);
    }
    for (const Constraint& c : constraints) {
      const double s = slack(c, q);
      const double inv_s2 = 1.0 / (s * s);
      const std::vector<int> ids = mask_to_ids(c.mask);
      for (int a : ids) {
        for (int b : ids) {
          h(a - 1, b - 1) +=
              inv_s2 / (cfg.clients[a - 1].p * cfg.clients[b - 1].p);
        }
      }
    }
    return h;
  }
};

// Damped Newton until the decrement stalls below eps.
void newton_minimize(const BarrierProblem& prob, double t, Eigen::VectorXd& q,
                     double eps) {
  for (int iter = 0; iter < 120; ++iter) {
    const Eigen::VectorXd g = prob.gradient(t, q);
    Eigen::MatrixXd h = prob.hessian(t, q);
    Eigen::VectorXd dx = -h.ldlt().solve(g);
    if (!dx.allFinite()) {
      h.diagonal().array() += 1e-10 * (1.0 + h.diagonal().maxCoeff());
      dx = -h.ldlt().solve(g);
      if (!dx.allFinite()) return;
    }
    const double decrement = -g.dot(dx);
    if (decrement <= eps) return;

    double step = 1.0;
    Eigen::VectorXd next = q + step * dx;
    const double phi0 = prob.value(t, q);
    int halvings = 0;
    while ((!prob.strictly_feasible(next) ||
            prob.value(t, next) > phi0 - 0.25 * step * decrement) &&
           halvings < 80) {
      step *= 0.5;
      next = q + step * dx;
      ++halvings;
    }
    if (halvings >= 80) return;
    q = next;
  }
}

struct PolishResult {
  Eigen::VectorXd q;
  std::vector<double> lambda;  // aligned with active set
  bool ok = false;
};

// Newton on the equality-constrained KKT system over the active set:
//   -U'(q) + A^T lambda = 0,  A q = capacity.
PolishResult polish_active_set(const BarrierProblem& prob,
                               const std::vector<int>& active,
                               const Eigen::VectorXd& q0,
                               const std::vector<double>& lambda0) {
  const int n = prob.n();
  const int m = static_cast<int>(active.size());
  PolishResult result;
  result.q = q0;
  result.lambda = lambda0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd cap(m);
  for (int r = 0; r < m; ++r) {
    const Constraint& c = prob.constraints[active[r]];
    cap[r] = c.capacity;
    for (SubsetMask mm = c.mask; mm != 0; mm &= mm - 1) {
      const int i = std::countr_zero(mm);
      a(r, i) = 1.0 / prob.cfg.clients[i].p;
    }
  }

  Eigen::VectorXd q = q0;
  Eigen::VectorXd lambda(m);
  for (int r = 0; r < m; ++r) lambda[r] = lambda0[r];

  for (int iter = 0; iter < 80; ++iter) {
    Eigen::VectorXd f(n + m);
    for (int i = 0; i < n; ++i) {
      f[i] = -prob.cfg.clients[i].utility->derivative(q[i]);
    }
    f.head(n) += a.transpose() * lambda;
    f.tail(m) = a * q - cap;

    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      scale = std::max(scale, std::abs(prob.cfg.clients[i].utility->derivative(q[i])));
    }
    if (f.lpNorm<Eigen::Infinity>() < 1e-12 * scale) {
      result.q = q;
      result.lambda.assign(lambda.data(), lambda.data() + m);
      result.ok = true;
      return result;
    }

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
      jac(i, i) = -prob.second_derivative(i, q[i]);
    }
    jac.block(0, n, n, m) = a.transpose();
    jac.block(n, 0, m, n) = a;

    const Eigen::VectorXd dz = jac.fullPivLu().solve(-f);
    if (!dz.allFinite()) return result;

    // keep q inside the utility domain
    double step = 1.0;
    for (int i = 0; i < n; ++i) {
      const double qi = q[i] + dz[i];
      if (qi < UtilityFunction::kDomainFloor || qi > 1.0) {
        double limit = 1.0;
        if (dz[i] < 0.0) {
          limit = (UtilityFunction::kDomainFloor - q[i]) / dz[i];
        } else if (dz[i] > 0.0) {
          limit = (1.0 - q[i]) / dz[i];
        }
        step = std::min(step, 0.999 * limit);
      }
    }
    q += step * dz.head(n);
    lambda += step * dz.tail(m);
  }
  return result;
}

}  // namespace

SystemSolution solve_system(const SystemConfig& cfg, double tol) {
  cfg.validate();
  require_utilities(cfg);
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (cfg.size() > 8) {
    throw std::invalid_argument("solve_system is an oracle for N <= 8");
  }

  SystemSolution sol;
  sol.certificate.context = KKTContext::System;
  if (cfg.size() == 0) return sol;
  const int n = cfg.size();

  BarrierProblem prob{cfg, {}};
  scan_idle_times(cfg, 0, full_mask(n), [&](SubsetMask s, double idle) {
    prob.constraints.push_back({s, cfg.tau - idle});
  });
  std::sort(prob.constraints.begin(), prob.constraints.end(),
            [](const Constraint& x, const Constraint& y) {
              return x.mask < y.mask;
            });

  // strictly interior start: q_i = eps * p_i clears every subset constraint
  double min_capacity = std::numeric_limits<double>::infinity();
  for (const Constraint& c : prob.constraints) {
    min_capacity = std::min(min_capacity, c.capacity);
  }
  const double eps0 = 0.5 * min_capacity / n;
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = eps0 * cfg.clients[i].p;
  if (!prob.strictly_feasible(q)) {
    throw std::runtime_error("failed to construct an interior starting point");
  }

  {
    // derivative check of the barrier gradient at the start point
    const double t0 = 2.0;
    const Eigen::VectorXd g = prob.gradient(t0, q);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd qp = q, qm = q;
      const double h = 1e-7 * std::max(q[i], 1e-3);
      qp[i] += h;
      qm[i] -= h;
      const double fd = (prob.value(t0, qp) - prob.value(t0, qm)) / (2.0 * h);
      if (std::abs(fd - g[i]) > 1e-4 * std::max(1.0, std::abs(g[i]))) {
        throw std::runtime_error("barrier gradient fails its derivative check");
      }
    }
  }

  const double total_barriers =
      static_cast<double>(prob.constraints.size() + n);
  const double gap_target = std::min(tol, 1e-7);

  for (int attempt = 0; attempt < 2; ++attempt) {
    double t = 1.0;
    const double t_final =
        total_barriers / (attempt == 0 ? gap_target : gap_target * 1e-2);
    while (true) {
      newton_minimize(prob, t, q, 1e-9 * (1.0 + t) * 1e-2);
      if (t >= t_final) break;
      t = std::min(t * 20.0, t_final);
    }

    // multiplier estimates from the central path
    std::vector<double> lambda_hat(prob.constraints.size());
    double lambda_max = 0.0;
    for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
      lambda_hat[k] = 1.0 / (t * prob.slack(prob.constraints[k], q));
      lambda_max = std::max(lambda_max, lambda_hat[k]);
    }
    const double active_floor = std::max(1e-8, 1e-5 * lambda_max);

    std::vector<int> active;
    std::vector<double> lambda0;
    for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
      if (lambda_hat[k] >= active_floor) {
        active.push_back(static_cast<int>(k));
        lambda0.push_back(lambda_hat[k]);
      }
    }

    // polish, dropping negative multipliers / adding violated constraints
    PolishResult polish;
    for (int round = 0; round < 12; ++round) {
      polish = polish_active_set(prob, active, q, lambda0);
      if (!polish.ok) break;

      int worst_negative = -1;
      double most_negative = -1e-9;
      for (std::size_t r = 0; r < active.size(); ++r) {
        if (polish.lambda[r] < most_negative) {
          most_negative = polish.lambda[r];
          worst_negative = static_cast<int>(r);
        }
      }
      if (worst_negative >= 0) {
        active.erase(active.begin() + worst_negative);
        lambda0.erase(lambda0.begin() + worst_negative);
        continue;
      }

      int worst_violated = -1;
      double worst_slack = -1e-12;
      for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
        if (std::find(active.begin(), active.end(), static_cast<int>(k)) !=
            active.end()) {
          continue;
        }
        const double s = prob.slack(prob.constraints[k], polish.q);
        if (s < worst_slack) {
          worst_slack = s;
          worst_violated = static_cast<int>(k);
        }
      }
      if (worst_violated >= 0) {
        active.push_back(worst_violated);
        lambda0.push_back(0.0);
        continue;
      }
      break;
    }

    if (polish.ok) {
      sol.q.q.assign(polish.q.data(), polish.q.data() + n);
      sol.certificate.zeta.clear();
      for (std::size_t r = 0; r < active.size(); ++r) {
        sol.certificate.zeta[prob.constraints[active[r]].mask] =
            std::max(polish.lambda[r], 0.0);
      }
      sol.certificate.mu.assign(n, 0.0);
      sol.objective = total_utility(cfg, sol.q.q);

      const KKTReport check =
          verify_kkt_system(sol.q, sol.certificate, cfg, tol);
      if (check.pass) return sol;
    }
    // retry with a deeper barrier before giving up
  }

  throw std::runtime_error(
      "solve_system failed to certify a solution at the requested tolerance");
}

}  // namespace qos
