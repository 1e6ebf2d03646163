#pragma once

#include <string>

#include "tailrisk/kernel.hpp"

namespace tailrisk {

/// AB(K) = int_0^1 t^(-rho) K(t) dt, by adaptive quadrature.
double ab_kernel(const Kernel& kernel, double rho);

/// Closed-form AB of the optimal mixture built with rho_tilde when the true
/// second-order parameter is rho.
double ab_optimal_misspecified(double rho_tilde, double rho);

/// i.i.d. asymptotic variance
///   gamma^2 { int int min(s,t)/(ts) d(tK(t)) d(sK(s)) - K(1)^2 },
/// reduced along the diagonal to gamma^2 { 2 int_0^1 d(tK(t))/dt K(t) dt - K(1)^2 }.
double av_iid(const Kernel& kernel, double gamma);

/// gamma^2 ((1-rho)/rho)^2, the minimal i.i.d. variance.
double av_optimal_closed_form(double gamma, double rho);

struct DependenceModel {
  enum class Kind { iid, ar1, ma1 };
  Kind kind = Kind::iid;
  double theta = 0.0;

  static DependenceModel iid() { return {Kind::iid, 0.0}; }
  static DependenceModel ar1(double theta) { return {Kind::ar1, theta}; }
  static DependenceModel ma1(double theta) { return {Kind::ma1, theta}; }
};

std::string to_string(const DependenceModel& model);

/// Limiting tail covariance r(x, y) of the exceedance counts.
double covariance_r(const DependenceModel& model, double gamma, double x, double y);

struct VarianceComparison {
  /// AV(K_{Delta*opt}) = gamma^2 ((1-rho)/rho)^2 r(1,1).
  double optimal = 0.0;
  /// sigma^2(theta, gamma, rho) of the moment-based competitor.
  double competitor = 0.0;
};

VarianceComparison av_dependent_optimal(const DependenceModel& model, double gamma,
                                        double rho);

}  // namespace tailrisk
