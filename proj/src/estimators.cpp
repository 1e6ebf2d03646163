#include "tailrisk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tailrisk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_negative(double v, const char* name) {
  if (!std::isfinite(v) || v >= 0.0) {
    throw std::domain_error(std::string(name) + " must be negative, got " +
                            std::to_string(v));
  }
}

struct Moments {
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
};

// Spacings are logs[i] - base for i < k.
Moments log_moments(std::span<const double> logs, std::size_t k, double base) {
  Moments m;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = logs[i] - base;
    const double d2 = d * d;
    m.m1 += d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double inv = 1.0 / static_cast<double>(k);
  m.m1 *= inv;
  m.m2 *= inv;
  m.m3 *= inv;
  m.m4 *= inv;
  return m;
}

double s_from_moments(const Moments& m) {
  const double m1_2 = m.m1 * m.m1;
  const double den = m.m3 - 6.0 * m1_2 * m.m1;
  if (den == 0.0) return kNaN;
  return 0.75 * (m.m4 - 24.0 * m1_2 * m1_2) * (m.m2 - 2.0 * m1_2) / (den * den);
}

double extrapolation_ratio(const TailSample& sample, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("tail probability must lie in (0, 1), got " +
                            std::to_string(p));
  }
  return static_cast<double>(sample.k()) / (static_cast<double>(sample.n()) * p);
}

void require_extrapolation(const TailSample& sample, double p, double ratio) {
  if (!(ratio > 1.0)) {
    throw std::domain_error("p = " + std::to_string(p) + " must be below k/n = " +
                            std::to_string(static_cast<double>(sample.k()) /
                                           static_cast<double>(sample.n())));
  }
}

void fill_diagnostics(QuantileEstimate& q, const TailSample& sample, double p,
                      double ratio) {
  q.p = p;
  q.k = sample.k();
  q.ratio = ratio;
  q.log_np_over_sqrt_k = std::log(static_cast<double>(sample.n()) * p) /
                         std::sqrt(static_cast<double>(sample.k()));
}

}  // namespace

std::string to_string(IndexMethod m) {
  switch (m) {
    case IndexMethod::hill: return "hill";
    case IndexMethod::kernel: return "kernel";
    case IndexMethod::optimal_unbiased: return "optimal_unbiased";
    case IndexMethod::dhmz: return "dhmz";
  }
  return "?";
}

std::string to_string(QuantileMethod m) {
  switch (m) {
    case QuantileMethod::unbiased: return "unbiased";
    case QuantileMethod::weissman: return "weissman";
    case QuantileMethod::dhmz: return "dhmz";
  }
  return "?";
}

bool TailIndexEstimate::usable() const {
  return std::isfinite(gamma_hat) && gamma_hat > 0.0;
}

TailIndexEstimate gamma_kernel(const TailSample& sample, const Kernel& kernel) {
  const auto w = kernel.weights(sample.k());
  const auto logs = sample.top_log();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * logs[i];
  TailIndexEstimate est;
  est.gamma_hat = acc;
  est.method = IndexMethod::kernel;
  est.k = sample.k();
  est.kernel = kernel;
  return est;
}

TailIndexEstimate hill(const TailSample& sample) {
  double acc = 0.0;
  for (double v : sample.top_log()) acc += v;
  TailIndexEstimate est;
  est.gamma_hat = acc / static_cast<double>(sample.k());
  est.method = IndexMethod::hill;
  est.k = sample.k();
  return est;
}

double moment(const TailSample& sample, int alpha) {
  if (alpha < 1 || alpha > 4) {
    throw std::invalid_argument("moment order must be 1..4, got " + std::to_string(alpha));
  }
  double acc = 0.0;
  for (double v : sample.top_log()) acc += std::pow(v, alpha);
  return acc / static_cast<double>(sample.k());
}

TailIndexEstimate gamma_optimal_unbiased(const TailSample& sample, double rho) {
  require_negative(rho, "rho");
  auto est = gamma_kernel(sample, Kernel::optimal_mixture(rho));
  est.method = IndexMethod::optimal_unbiased;
  est.rho_used = rho;
  return est;
}

TailIndexEstimate gamma_dhmz(const TailSample& sample, double rho) {
  require_negative(rho, "rho");
  const double h = hill(sample).gamma_hat;
  if (h == 0.0) {
    throw std::domain_error("moment-corrected index undefined: Hill estimate is zero");
  }
  const double m2 = moment(sample, 2);
  TailIndexEstimate est;
  est.gamma_hat = h - (m2 - 2.0 * h * h) * (1.0 - rho) / (2.0 * h * rho);
  est.method = IndexMethod::dhmz;
  est.k = sample.k();
  est.rho_used = rho;
  return est;
}

double s_statistic(const TailSample& sample) {
  return s_from_moments(log_moments(sample.top_log(), sample.k(), 0.0));
}

std::optional<double> rho_from_s(double s) {
  if (!(s > 2.0 / 3.0 && s < 0.75)) return std::nullopt;
  const double rho = (-4.0 + 6.0 * s + std::sqrt(3.0 * s - 2.0)) / (4.0 * s - 3.0);
  // Rounding right at the lower edge can produce zero.
  if (!(rho < 0.0)) return std::nullopt;
  return rho;
}

SecondOrderEstimate rho_estimate(const TailSample& sample) {
  SecondOrderEstimate est;
  est.k_rho = sample.k();
  est.s_value = s_statistic(sample);
  if (auto r = rho_from_s(est.s_value)) {
    est.rho_hat = *r;
    est.valid = true;
  } else {
    est.rho_hat = kNaN;
  }
  return est;
}

std::size_t k_rho_cap(std::size_t m) {
  if (m < kMinPositiveForKRho) {
    throw std::invalid_argument("k_rho selection needs at least " +
                                std::to_string(kMinPositiveForKRho) +
                                " positive observations, got " + std::to_string(m));
  }
  const double md = static_cast<double>(m);
  return static_cast<std::size_t>(
      std::floor(std::min(md - 1.0, 2.0 * md / std::log(std::log(md)))));
}

SecondOrderEstimate select_k_rho(const OrderStatistics& stats) {
  const std::size_t cap = k_rho_cap(stats.positive_count());

  std::vector<double> logs(cap + 1);
  for (std::size_t i = 0; i <= cap; ++i) logs[i] = std::log(stats.largest(i + 1));

  SecondOrderEstimate none;
  none.rho_hat = kNaN;
  none.s_value = kNaN;
  for (std::size_t k = cap; k >= 1; --k) {
    const double s = s_from_moments(log_moments(logs, k, logs[k]));
    if (auto r = rho_from_s(s)) {
      SecondOrderEstimate est;
      est.k_rho = k;
      est.s_value = s;
      est.rho_hat = *r;
      est.valid = true;
      return est;
    }
  }
  return none;
}

SecondOrderEstimate select_k_rho(std::span<const double> series) {
  return select_k_rho(OrderStatistics(series));
}

XiChoice resolve_xi(const OrderStatistics& stats, double canonical) {
  require_negative(canonical, "canonical xi");
  XiChoice choice;
  choice.xi = canonical;
  choice.rho.rho_hat = kNaN;
  choice.rho.s_value = kNaN;
  if (stats.positive_count() < kMinPositiveForKRho) return choice;
  choice.rho = select_k_rho(stats);
  if (choice.rho.valid) {
    choice.xi = choice.rho.rho_hat;
    choice.fallback = false;
  }
  return choice;
}

double estimate_A(const TailSample& sample, double xi) {
  require_negative(xi, "xi");
  const double g1 = hill(sample).gamma_hat;
  const double g2 = gamma_kernel(sample, Kernel::second_order(xi)).gamma_hat;
  return -((1.0 - xi) * (1.0 - 2.0 * xi) / (xi * xi)) * (g1 - g2);
}

QuantileEstimate quantile_unbiased(const TailSample& sample, double p, double xi,
                                   const TailIndexEstimate& gamma) {
  require_negative(xi, "xi");
  const double ratio = extrapolation_ratio(sample, p);
  require_extrapolation(sample, p, ratio);
  if (!gamma.usable()) {
    throw std::domain_error("index estimate " + std::to_string(gamma.gamma_hat) +
                            " is not usable for extrapolation");
  }
  const double a_hat = estimate_A(sample, xi);
  const double exponent = a_hat * (std::pow(ratio, xi) - 1.0) / xi;
  if (!std::isfinite(exponent)) {
    throw std::domain_error("non-finite second-order correction exponent");
  }
  QuantileEstimate q;
  fill_diagnostics(q, sample, p, ratio);
  q.method = QuantileMethod::unbiased;
  q.xi = xi;
  q.gamma_hat = gamma.gamma_hat;
  q.correction_factor = std::exp(exponent);
  q.x_hat = sample.threshold() * std::pow(ratio, gamma.gamma_hat) * q.correction_factor;
  if (!std::isfinite(q.x_hat)) throw std::domain_error("non-finite quantile estimate");
  return q;
}

QuantileEstimate quantile_unbiased(const TailSample& sample, double p, double xi) {
  return quantile_unbiased(sample, p, xi, gamma_optimal_unbiased(sample, xi));
}

QuantileEstimate quantile_weissman(const TailSample& sample, double p,
                                   const TailIndexEstimate& gamma) {
  double ratio = extrapolation_ratio(sample, p);
  // p = k/n is the limiting case and yields the threshold itself.
  if (std::abs(ratio - 1.0) <= 1e-12) ratio = 1.0;
  if (ratio < 1.0) require_extrapolation(sample, p, ratio);
  if (!gamma.usable()) {
    throw std::domain_error("index estimate " + std::to_string(gamma.gamma_hat) +
                            " is not usable for extrapolation");
  }
  QuantileEstimate q;
  fill_diagnostics(q, sample, p, ratio);
  q.method = QuantileMethod::weissman;
  q.gamma_hat = gamma.gamma_hat;
  q.x_hat = sample.threshold() * std::pow(ratio, gamma.gamma_hat);
  if (!std::isfinite(q.x_hat)) throw std::domain_error("non-finite quantile estimate");
  return q;
}

QuantileEstimate quantile_weissman(const TailSample& sample, double p) {
  return quantile_weissman(sample, p, hill(sample));
}

QuantileEstimate quantile_dhmz(const TailSample& sample, double p, double rho) {
  require_negative(rho, "rho");
  const double ratio = extrapolation_ratio(sample, p);
  require_extrapolation(sample, p, ratio);
  const double h = hill(sample).gamma_hat;
  if (!(h > 0.0)) {
    throw std::domain_error("moment-corrected quantile needs a positive Hill estimate");
  }
  const double m2 = moment(sample, 2);
  const double g = gamma_dhmz(sample, rho).gamma_hat;
  const double factor = 1.0 - (m2 - 2.0 * h * h) * (1.0 - rho) * (1.0 - rho) /
                                  (2.0 * h * rho * rho) * (1.0 - std::pow(ratio, rho));
  QuantileEstimate q;
  fill_diagnostics(q, sample, p, ratio);
  q.method = QuantileMethod::dhmz;
  q.xi = rho;
  q.gamma_hat = g;
  q.correction_factor = factor;
  q.x_hat = sample.threshold() * std::pow(ratio, g) * factor;
  if (!(factor > 0.0)) q.status = QuantileStatus::correction_overshoot;
  if (!std::isfinite(q.x_hat)) throw std::domain_error("non-finite quantile estimate");
  return q;
}

}  // namespace tailrisk
