#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "tailrisk/kernel.hpp"
#include "tailrisk/tail_sample.hpp"

namespace tailrisk {

enum class IndexMethod { hill, kernel, optimal_unbiased, dhmz };
enum class QuantileMethod { unbiased, weissman, dhmz };

std::string to_string(IndexMethod m);
std::string to_string(QuantileMethod m);

struct TailIndexEstimate {
  double gamma_hat = 0.0;
  IndexMethod method = IndexMethod::hill;
  std::size_t k = 0;
  std::optional<Kernel> kernel;
  std::optional<double> rho_used;

  /// Usable for extrapolation: finite and strictly positive. Estimates that
  /// fail this are returned as-is and refused by the quantile estimators.
  bool usable() const;
};

struct SecondOrderEstimate {
  double rho_hat = 0.0;  // meaningful only when valid
  std::size_t k_rho = 0;
  double s_value = 0.0;
  bool valid = false;
};

enum class QuantileStatus { ok, correction_overshoot };

struct QuantileEstimate {
  double x_hat = 0.0;
  double p = 0.0;
  std::size_t k = 0;
  QuantileMethod method = QuantileMethod::weissman;
  std::optional<double> xi;
  double gamma_hat = 0.0;
  /// Multiplicative second-order factor; 1 for the plain Weissman form.
  double correction_factor = 1.0;
  QuantileStatus status = QuantileStatus::ok;
  std::optional<std::pair<double, double>> ci;

  /// k/(np), the extrapolation ratio.
  double ratio = 1.0;
  /// log(np)/sqrt(k); should be small for the extrapolation to be reliable.
  double log_np_over_sqrt_k = 0.0;
};

// Index estimators -----------------------------------------------------------

TailIndexEstimate gamma_kernel(const TailSample& sample, const Kernel& kernel);
TailIndexEstimate hill(const TailSample& sample);

/// M_k^(alpha) = (1/k) sum (top_log_i)^alpha, alpha in {1,2,3,4}.
double moment(const TailSample& sample, int alpha);

/// Kernel estimator with the bias-cancelling mixture K_{Delta*opt}(rho).
TailIndexEstimate gamma_optimal_unbiased(const TailSample& sample, double rho);

/// Hill minus the moment-based bias estimate (de Haan, Mercadier, Zhou).
TailIndexEstimate gamma_dhmz(const TailSample& sample, double rho);

// Second-order parameter -----------------------------------------------------

/// S_k^(2) built from M^(1..4). NaN when its denominator vanishes.
double s_statistic(const TailSample& sample);

/// (-4 + 6S + sqrt(3S-2)) / (4S-3); defined for S in (2/3, 3/4).
std::optional<double> rho_from_s(double s);

SecondOrderEstimate rho_estimate(const TailSample& sample);

/// Largest k <= min(m-1, 2m/log log m) at which rho_estimate is valid, with
/// m the count of positive observations. Returns an estimate with
/// valid = false when no k qualifies. Throws std::invalid_argument when
/// m < kMinPositiveForKRho.
inline constexpr std::size_t kMinPositiveForKRho = 16;
/// floor(min(m-1, 2m/log log m)).
std::size_t k_rho_cap(std::size_t m);
SecondOrderEstimate select_k_rho(const OrderStatistics& stats);
SecondOrderEstimate select_k_rho(std::span<const double> series);

/// Canonical second-order value used when no valid rho-hat exists.
inline constexpr double kCanonicalXi = -1.0;

struct XiChoice {
  double xi = kCanonicalXi;
  SecondOrderEstimate rho;
  bool fallback = true;
};

/// rho-hat at k_rho when available, otherwise `canonical`. Never throws for
/// short or mostly non-positive series; those fall back.
XiChoice resolve_xi(const OrderStatistics& stats, double canonical = kCanonicalXi);

// Quantile estimators --------------------------------------------------------

/// A-hat(n/k) = -((1-xi)(1-2xi)/xi^2) [gamma(K_1) - gamma(K_{2,xi})].
double estimate_A(const TailSample& sample, double xi);

/// Bias-corrected extreme quantile:
///   X_{n-k,n} (k/np)^gamma exp{ A-hat ((k/np)^xi - 1)/xi }.
/// Requires 0 < p < k/n, xi < 0, and a usable gamma.
QuantileEstimate quantile_unbiased(const TailSample& sample, double p, double xi,
                                   const TailIndexEstimate& gamma);
QuantileEstimate quantile_unbiased(const TailSample& sample, double p, double xi);

/// X_{n-k,n} (k/np)^gamma. p = k/n is accepted and returns the threshold.
QuantileEstimate quantile_weissman(const TailSample& sample, double p,
                                   const TailIndexEstimate& gamma);
QuantileEstimate quantile_weissman(const TailSample& sample, double p);

/// Corrected second-order quantile of de Haan, Mercadier and Zhou. A
/// non-positive correction factor is returned with
/// status = correction_overshoot.
QuantileEstimate quantile_dhmz(const TailSample& sample, double p, double rho);

}  // namespace tailrisk
