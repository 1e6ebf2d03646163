#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailrisk/estimators.hpp"
#include "tailrisk/random.hpp"

namespace tailrisk {

// Coverage test ---------------------------------------------------------------

struct KupiecResult {
  double lr = 0.0;
  double pvalue = 1.0;
};

/// Kupiec proportion-of-failures likelihood ratio for `violations` out of
/// `forecasts` at nominal rate p, with its chi-square(1) p-value.
KupiecResult kupiec_test(std::size_t forecasts, std::size_t violations, double p);

// Block bootstrap -------------------------------------------------------------

struct BootstrapOptions {
  std::size_t block_length = 200;
  std::size_t n_boot = 99;
  double level = 0.95;
  std::uint64_t seed = 1;
  /// Redraws allowed for a resample whose statistic fails.
  std::size_t max_retries = 10;
  unsigned threads = 1;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
};

/// One circular moving-block resample of `series`: ceil(n/L) uniform block
/// starts, wrapped blocks concatenated and trimmed to n.
std::vector<double> circular_block_resample(std::span<const double> series,
                                            std::size_t block_length, SeededStream& stream);

/// Percentile interval from sorted bootstrap values using the (B+1) rule:
/// ranks ceil((B+1)a/2) and floor((B+1)(1-a/2)), a = 1 - level.
Interval percentile_interval(std::vector<double> values, double level);

using ScalarStatistic = std::function<double(std::span<const double>)>;
using VectorStatistic = std::function<std::vector<double>(std::span<const double>)>;

/// A statistic fails by throwing or by returning a non-finite value; such a
/// resample is redrawn up to max_retries times and then excluded.
Interval block_bootstrap_ci(std::span<const double> series, const ScalarStatistic& statistic,
                            const BootstrapOptions& options);

/// Component-wise intervals for a vector statistic (e.g. a whole k-sweep
/// evaluated on each resample). A throwing statistic is redrawn as above;
/// non-finite components are excluded per component.
std::vector<Interval> block_bootstrap_ci(std::span<const double> series,
                                         const VectorStatistic& statistic,
                                         std::size_t dimension, const BootstrapOptions& options);

// ARIMA(1,1,1) filter ----------------------------------------------------------

struct ArimaCoeffs {
  double phi1 = 0.0;
  double theta1 = 0.0;
};

/// e_t = x_t - x_{t-1} - phi1 x_{t-1} + phi1 x_{t-2} + theta1 e_{t-1},
/// starting from a zero pre-sample residual; returns n-2 values, the first
/// aligned with x[2].
std::vector<double> arima_residuals(std::span<const double> series, const ArimaCoeffs& coeffs);

/// Maps a residual-scale level back to the original scale:
///   r_x = r_e - theta1 e_{t-1} + x_{t-1} + phi1 x_{t-1} - phi1 x_{t-2}.
double return_level_transform(double r_e, double e_prev, double x_prev, double x_prev2,
                              const ArimaCoeffs& coeffs);

// Rolling backtest --------------------------------------------------------------

enum class XiPolicy { from_rho_hat, canonical };

struct BacktestConfig {
  std::size_t window = 600;
  std::size_t horizon_points = 400;
  double p = 0.01;
  std::size_t k = 80;
  QuantileMethod method = QuantileMethod::unbiased;
  XiPolicy xi_policy = XiPolicy::from_rho_hat;
  double canonical_xi = kCanonicalXi;

  void validate(std::size_t series_length) const;
};

/// Estimates x_p from one window with the configured method and xi policy.
QuantileEstimate estimate_window_quantile(std::span<const double> window,
                                          const BacktestConfig& config);

struct Forecast {
  std::size_t time = 0;
  /// Empty when the estimator failed on this window.
  std::optional<double> x_hat;
  double realized = 0.0;
  bool violation = false;
  /// Bootstrap percentile interval of the forecast, when requested.
  std::optional<std::pair<double, double>> ci;
};

struct BacktestReport {
  std::vector<Forecast> forecasts;
  std::vector<std::size_t> violations;
  std::size_t n_missing = 0;
  double expected_violations = 0.0;
  double kupiec_lr = 0.0;
  double kupiec_pvalue = 1.0;

  /// Present for ARIMA-filtered runs: forecasts mapped back to the original
  /// scale, aligned with `forecasts`.
  std::optional<std::vector<Forecast>> original;

  std::size_t n_forecasts() const { return forecasts.size() - n_missing; }
};

/// Produces the forecast for time t from the preceding window; empty on
/// failure.
using Forecaster = std::function<std::optional<double>(std::span<const double>)>;

BacktestReport rolling_forecast_with(std::span<const double> series, const BacktestConfig& config,
                                     const Forecaster& forecaster, unsigned threads = 1);

/// Rolling out-of-sample forecasts of x_p for the last horizon_points
/// observations, each from the preceding `window` points. A violation is a
/// realized value strictly above its forecast.
///
/// With `bootstrap`, each forecast also carries a block-bootstrap interval
/// computed from its window.
BacktestReport rolling_forecast(std::span<const double> series, const BacktestConfig& config,
                                unsigned threads = 1,
                                const std::optional<BootstrapOptions>& bootstrap = {});

/// Filters `series` through the ARIMA residual recursion, backtests the
/// residuals and maps each forecast back to the original scale. Time
/// indices refer to positions in `series`.
BacktestReport rolling_forecast_arima(std::span<const double> series,
                                      const BacktestConfig& config, const ArimaCoeffs& coeffs,
                                      unsigned threads = 1,
                                      const std::optional<BootstrapOptions>& bootstrap = {});

/// x_t -> -log(P_t / P_{t-1}); throws std::domain_error on non-positive
/// prices.
std::vector<double> neg_log_returns(std::span<const double> prices);

BacktestConfig backtest_config_from_json(const nlohmann::json& cfg);
nlohmann::json backtest_config_to_json(const BacktestConfig& config);

nlohmann::json backtest_to_json(const BacktestReport& report);
/// Columns: time, forecast, realized, violation (plus the original-scale
/// triple for ARIMA runs).
std::string backtest_to_csv(const BacktestReport& report);

}  // namespace tailrisk
