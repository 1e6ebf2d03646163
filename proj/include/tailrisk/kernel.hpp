#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tailrisk {

/// Weight function on (0,1) integrating to one.
///
///   power(nu)            (1+nu) t^nu
///   log_weight(nu)       (-log t)^nu / Gamma(1+nu)
///   second_order(rho)    (1-rho) t^(-rho)
///   optimal_mixture(rho) ((1-rho)/rho)^2 - (1-rho)(1-2rho)/rho^2 t^(-rho)
///
/// The optimal mixture is Delta* K_1 + (1 - Delta*) K_{2,rho} with
/// Delta* = ((1-rho)/rho)^2; its bias integral against t^(-rho) vanishes.
class Kernel {
 public:
  enum class Family { power, log_weight, second_order, optimal_mixture };

  static Kernel power(double nu);
  static Kernel log_weight(double nu);
  static Kernel second_order(double rho);
  static Kernel optimal_mixture(double rho);
  static Kernel constant() { return power(0.0); }

  Family family() const { return family_; }
  double parameter() const { return param_; }

  /// K(t) for t in (0,1]. Throws std::domain_error outside that range.
  double operator()(double t) const;

  /// d(tK(t))/dt, the density of the measure the log-spacings are
  /// integrated against.
  double measure_density(double t) const;

  /// t K(t), with the limit 0 at t = 0.
  double cumulative(double t) const;

  /// Increments w_i = (i/k)K(i/k) - ((i-1)/k)K((i-1)/k), i = 1..k.
  /// They telescope to K(1).
  std::vector<double> weights(std::size_t k) const;

  std::string describe() const;

 private:
  Kernel(Family f, double p) : family_(f), param_(p) {}

  Family family_;
  double param_;
};

/// Delta* = ((1-rho)/rho)^2, the weight on K_1 in the optimal mixture.
double optimal_mixture_weight(double rho);

}  // namespace tailrisk
