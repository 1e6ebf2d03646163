#include "tailrisk/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tailrisk {
namespace {

void require_rho(double rho) {
  if (!std::isfinite(rho) || rho >= 0.0) {
    throw std::domain_error("kernel requires rho < 0, got " + std::to_string(rho));
  }
}

void require_nu(double nu) {
  if (!std::isfinite(nu) || nu < 0.0) {
    throw std::domain_error("kernel requires nu >= 0, got " + std::to_string(nu));
  }
}

}  // namespace

Kernel Kernel::power(double nu) {
  require_nu(nu);
  return Kernel(Family::power, nu);
}

Kernel Kernel::log_weight(double nu) {
  require_nu(nu);
  return Kernel(Family::log_weight, nu);
}

Kernel Kernel::second_order(double rho) {
  require_rho(rho);
  return Kernel(Family::second_order, rho);
}

Kernel Kernel::optimal_mixture(double rho) {
  require_rho(rho);
  return Kernel(Family::optimal_mixture, rho);
}

double optimal_mixture_weight(double rho) {
  require_rho(rho);
  const double r = (1.0 - rho) / rho;
  return r * r;
}

double Kernel::operator()(double t) const {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::domain_error("kernel argument must lie in (0, 1], got " +
                            std::to_string(t));
  }
  switch (family_) {
    case Family::power:
      return (1.0 + param_) * std::pow(t, param_);
    case Family::log_weight:
      return std::pow(-std::log(t), param_) / std::tgamma(1.0 + param_);
    case Family::second_order:
      return (1.0 - param_) * std::pow(t, -param_);
    case Family::optimal_mixture: {
      const double rho = param_;
      const double delta = optimal_mixture_weight(rho);
      return delta - (1.0 - rho) * (1.0 - 2.0 * rho) / (rho * rho) * std::pow(t, -rho);
    }
  }
  return 0.0;
}

double Kernel::cumulative(double t) const {
  if (t == 0.0) return 0.0;
  return t * (*this)(t);
}

double Kernel::measure_density(double t) const {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::domain_error("kernel argument must lie in (0, 1], got " +
                            std::to_string(t));
  }
  switch (family_) {
    case Family::power:
      return (1.0 + param_) * (1.0 + param_) * std::pow(t, param_);
    case Family::log_weight: {
      if (param_ == 0.0) return 1.0;
      const double l = -std::log(t);
      return (std::pow(l, param_) - param_ * std::pow(l, param_ - 1.0)) /
             std::tgamma(1.0 + param_);
    }
    case Family::second_order:
      return (1.0 - param_) * (1.0 - param_) * std::pow(t, -param_);
    case Family::optimal_mixture: {
      const double rho = param_;
      const double delta = optimal_mixture_weight(rho);
      return delta + (1.0 - delta) * (1.0 - rho) * (1.0 - rho) * std::pow(t, -rho);
    }
  }
  return 0.0;
}

std::vector<double> Kernel::weights(std::size_t k) const {
  std::vector<double> w(k);
  const double dk = static_cast<double>(k);
  double prev = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double cur = cumulative(static_cast<double>(i) / dk);
    w[i - 1] = cur - prev;
    prev = cur;
  }
  return w;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case Family::power: os << "power(" << param_ << ")"; break;
    case Family::log_weight: os << "log_weight(" << param_ << ")"; break;
    case Family::second_order: os << "second_order(" << param_ << ")"; break;
    case Family::optimal_mixture: os << "optimal_mixture(" << param_ << ")"; break;
  }
  return os.str();
}

}  // namespace tailrisk
