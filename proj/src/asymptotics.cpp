#include "tailrisk/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace tailrisk {
namespace {

using boost::math::quadrature::tanh_sinh;

constexpr double kSeriesCutoff = 1e-14;

template <class F>
double integrate(tanh_sinh<double>& q, F f, double a, double b, double tol) {
  if (a >= b) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  const double value = q.integrate(f, a, b, tol, &err, &l1);
  if (!std::isfinite(value) || err > 1e3 * tol * std::max(1.0, l1)) {
    throw std::runtime_error("quadrature did not converge (error estimate " +
                             std::to_string(err) + ")");
  }
  return value;
}

// Abscissa tables grow lazily, so each thread keeps its own integrator.
tanh_sinh<double>& integrator() {
  thread_local tanh_sinh<double> q;
  return q;
}

void require_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::domain_error("dependence parameter theta must lie in (0, 1), got " +
                            std::to_string(theta));
  }
}

}  // namespace

double ab_kernel(const Kernel& kernel, double rho) {
  if (!(rho < 0.0)) throw std::domain_error("rho must be negative");
  return integrate(
      integrator(), [&](double t) { return std::pow(t, -rho) * kernel(t); }, 0.0, 1.0,
      1e-13);
}

double ab_optimal_misspecified(double rho_tilde, double rho) {
  if (!(rho < 0.0 && rho_tilde < 0.0)) throw std::domain_error("rho must be negative");
  return (1.0 - rho_tilde) * (rho_tilde - rho) /
         (rho_tilde * (1.0 - rho) * (1.0 - rho_tilde - rho));
}

double av_iid(const Kernel& kernel, double gamma) {
  if (gamma == 0.0) return 0.0;
  // Splitting the double integral along the diagonal and using
  // int_0^t g = tK(t) collapses it to 2 int_0^1 g(t) K(t) dt.
  const double dbl =
      2.0 * integrate(
                integrator(), [&](double t) { return kernel.measure_density(t) * kernel(t); },
                0.0, 1.0, 1e-12);
  const double k1 = kernel(1.0);
  return gamma * gamma * (dbl - k1 * k1);
}

double av_optimal_closed_form(double gamma, double rho) {
  const double r = (1.0 - rho) / rho;
  return gamma * gamma * r * r;
}

std::string to_string(const DependenceModel& model) {
  switch (model.kind) {
    case DependenceModel::Kind::iid: return "iid";
    case DependenceModel::Kind::ar1: return "ar1(" + std::to_string(model.theta) + ")";
    case DependenceModel::Kind::ma1: return "ma1(" + std::to_string(model.theta) + ")";
  }
  return "?";
}

double covariance_r(const DependenceModel& model, double gamma, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0)) throw std::domain_error("r(x, y) needs x, y >= 0");
  const double base = std::min(x, y);
  if (model.kind == DependenceModel::Kind::iid) return base;
  require_theta(model.theta);
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");

  const double a = std::pow(model.theta, 1.0 / gamma);
  if (model.kind == DependenceModel::Kind::ma1) {
    return base + (std::min(x, y * a) + std::min(y, x * a)) / (1.0 + a);
  }

  // AR(1): sum_m min(x, y a^m) + min(y, x a^m); each term is bounded by
  // max(x, y) a^m.
  const double scale = std::max(x, y);
  double sum = 0.0;
  double am = a;
  while (scale * am >= kSeriesCutoff) {
    sum += std::min(x, y * am) + std::min(y, x * am);
    am *= a;
  }
  return base + sum;
}

VarianceComparison av_dependent_optimal(const DependenceModel& model, double gamma,
                                        double rho) {
  if (!(rho < 0.0)) throw std::domain_error("rho must be negative");
  if (gamma == 0.0) return {};
  const double r11 = covariance_r(model, gamma, 1.0, 1.0);
  const double g2 = gamma * gamma;

  VarianceComparison out;
  out.optimal = av_optimal_closed_form(gamma, rho) * r11;

  double cross = 0.0;
  if (model.kind != DependenceModel::Kind::iid) {
    const double a = std::pow(model.theta, 1.0 / gamma);
    const double alog = a * std::log(a);
    const double denom =
        model.kind == DependenceModel::Kind::ar1 ? (1.0 - a) * (1.0 - a) : 1.0 + a;
    cross = 2.0 * rho * (1.0 - rho) * alog / denom;
  }
  out.competitor =
      g2 / (rho * rho) * (((1.0 - rho) * (1.0 - rho) + rho * rho) * r11 + cross);
  return out;
}

}  // namespace tailrisk
