#include "qos/utility.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qos {

void UtilityFunction::check_shape() const {
  constexpr int kGrid = 32;
  double prev_deriv = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double q = static_cast<double>(i) / kGrid;
    const double d = derivative(q);
    if (!(d > 0.0)) {
      throw std::invalid_argument("utility derivative not positive at q=" +
                                  std::to_string(q));
    }
    if (i > 1 && !(d < prev_deriv)) {
      throw std::invalid_argument("utility derivative not strictly decreasing");
    }
    prev_deriv = d;

    const double h = 1e-6 * q;
    const double fd = (value(q + h) - value(q - h)) / (2.0 * h);
    if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) {
      throw std::invalid_argument(
          "utility derivative disagrees with finite differences at q=" +
          std::to_string(q));
    }
  }
}

LogUtility::LogUtility(double weight) : weight_(weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("log utility weight must be positive");
  }
  check_shape();
}

double LogUtility::value(double q) const { return weight_ * std::log(q); }

double LogUtility::derivative(double q) const { return weight_ / q; }

std::optional<double> LogUtility::inverse_derivative(double y) const {
  return weight_ / y;
}

std::string LogUtility::describe() const {
  std::ostringstream os;
  os << "log(weight=" << weight_ << ")";
  return os.str();
}

PowerUtility::PowerUtility(double gamma, double alpha)
    : gamma_(gamma), alpha_(alpha) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("power utility gamma must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("power utility alpha must lie in (0,1)");
  }
  check_shape();
}

double PowerUtility::value(double q) const {
  return gamma_ * (std::pow(q, alpha_) - 1.0) / alpha_;
}

double PowerUtility::derivative(double q) const {
  return gamma_ * std::pow(q, alpha_ - 1.0);
}

std::optional<double> PowerUtility::inverse_derivative(double y) const {
  return std::pow(y / gamma_, 1.0 / (alpha_ - 1.0));
}

std::string PowerUtility::describe() const {
  std::ostringstream os;
  os << "power(gamma=" << gamma_ << ",alpha=" << alpha_ << ")";
  return os.str();
}

UtilityPtr make_log_utility(double weight) {
  return std::make_shared<LogUtility>(weight);
}

UtilityPtr make_power_utility(double gamma, double alpha) {
  return std::make_shared<PowerUtility>(gamma, alpha);
}

ClientResponse client_best_response(double psi, const UtilityFunction& u,
                                    double tol) {
  if (!(psi > 0.0)) {
    throw std::invalid_argument("psi must be positive");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tol must be positive");
  }

  // U' is strictly decreasing, so U'(q) = psi has at most one root in (0,1].
  if (u.derivative(1.0) >= psi) {
    return {psi, 1.0, false};
  }
  if (u.derivative(UtilityFunction::kDomainFloor) <= psi) {
    return {0.0, 0.0, false};
  }

  double lo = UtilityFunction::kDomainFloor;  // U'(lo) > psi
  double hi = 1.0;                            // U'(hi) < psi
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (u.derivative(mid) > psi) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double q = 0.5 * (lo + hi);
  return {psi * q, q, true};
}

}  // namespace qos
