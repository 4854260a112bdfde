#pragma once

#include <memory>
#include <optional>
#include <string>

namespace qos {

// Utility of a delivery ratio: strictly increasing, strictly concave,
// differentiable on (0, 1]. The value at 0 is taken as the right limit and
// may be -infinity, so callers never evaluate below kDomainFloor.
//
// Concrete utilities run check_shape() at the end of their constructor: a
// grid spot-check of positivity and strict decrease of the derivative, and
// agreement of the derivative with central finite differences to 1e-6
// relative.
class UtilityFunction {
 public:
  static constexpr double kDomainFloor = 1e-12;

  virtual ~UtilityFunction() = default;

  virtual double value(double q) const = 0;
  virtual double derivative(double q) const = 0;

  // Solves derivative(q) == y when a closed form exists. Used by tests as an
  // independent cross-check of the bisection path, never by the solver.
  virtual std::optional<double> inverse_derivative(double /*y*/) const {
    return std::nullopt;
  }

  virtual std::string describe() const = 0;

 protected:
  void check_shape() const;
};

using UtilityPtr = std::shared_ptr<const UtilityFunction>;

// weight * log(q). weight > 0.
class LogUtility final : public UtilityFunction {
 public:
  explicit LogUtility(double weight = 1.0);

  double value(double q) const override;
  double derivative(double q) const override;
  std::optional<double> inverse_derivative(double y) const override;
  std::string describe() const override;

  double weight() const { return weight_; }

 private:
  double weight_;
};

// gamma * (q^alpha - 1) / alpha with gamma > 0 and 0 < alpha < 1.
class PowerUtility final : public UtilityFunction {
 public:
  PowerUtility(double gamma, double alpha);

  double value(double q) const override;
  double derivative(double q) const override;
  std::optional<double> inverse_derivative(double y) const override;
  std::string describe() const override;

  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }

 private:
  double gamma_;
  double alpha_;
};

UtilityPtr make_log_utility(double weight = 1.0);
UtilityPtr make_power_utility(double gamma, double alpha);

// Outcome of the client's selfish payment choice at price psi.
struct ClientResponse {
  double rho_star = 0.0;  // optimal payment, in [0, psi]
  double q_implied = 0.0; // rho_star / psi
  bool interior = false;  // first-order condition met strictly inside (0, psi)
};

// Maximizes U(rho/psi) - rho over rho in [0, psi], equivalently
// U(q) - psi*q over q in [0, 1]. Interior solutions come from bisecting the
// strictly decreasing U'(q) - psi to width tol in q; boundary cases return
// rho = psi (U'(1) >= psi) or rho = 0 (U'(0+) <= psi, bounded-slope
// utilities only).
ClientResponse client_best_response(double psi, const UtilityFunction& u,
                                    double tol = 1e-10);

}  // namespace qos
