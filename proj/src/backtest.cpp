#include "tailrisk/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tailrisk/config.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/study.hpp"

namespace tailrisk {
namespace {

// x log(x / n) with the 0 log 0 = 0 convention, written as x log y.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

KupiecResult kupiec_test(std::size_t forecasts, std::size_t violations, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("p must lie in (0, 1)");
  if (violations > forecasts) {
    throw std::invalid_argument("violations cannot exceed the number of forecasts");
  }
  if (forecasts == 0) return {};
  const double n = static_cast<double>(forecasts);
  const double x = static_cast<double>(violations);
  const double null_ll = xlogy(n - x, 1.0 - p) + xlogy(x, p);
  const double alt_ll = xlogy(n - x, 1.0 - x / n) + xlogy(x, x / n);
  KupiecResult r;
  r.lr = std::max(0.0, -2.0 * null_ll + 2.0 * alt_ll);
  r.pvalue = std::erfc(std::sqrt(r.lr / 2.0));
  return r;
}

std::vector<double> circular_block_resample(std::span<const double> series,
                                            std::size_t block_length, SeededStream& stream) {
  const std::size_t n = series.size();
  if (n == 0) throw std::invalid_argument("cannot resample an empty series");
  if (block_length < 1 || block_length > n) {
    throw std::invalid_argument("block length must lie in [1, n]");
  }
  const std::size_t blocks = (n + block_length - 1) / block_length;
  std::vector<double> out;
  out.reserve(blocks * block_length);
  for (std::size_t b = 0; b < blocks; ++b) {
    auto start = static_cast<std::size_t>(stream.uniform_open() * static_cast<double>(n));
    start = std::min(start, n - 1);
    for (std::size_t j = 0; j < block_length; ++j) out.push_back(series[(start + j) % n]);
  }
  out.resize(n);
  return out;
}

Interval percentile_interval(std::vector<double> values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("level must lie in (0, 1)");
  Interval iv;
  iv.n_used = values.size();
  if (values.empty()) {
    iv.lower = iv.upper = std::numeric_limits<double>::quiet_NaN();
    return iv;
  }
  std::sort(values.begin(), values.end());
  const double b1 = static_cast<double>(values.size() + 1);
  const double a = 1.0 - level;
  const auto clamp_rank = [&](double r) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, values.size());
  };
  const std::size_t lo = clamp_rank(std::ceil(b1 * a / 2.0 - 1e-9));
  const std::size_t hi = clamp_rank(std::floor(b1 * (1.0 - a / 2.0) + 1e-9));
  iv.lower = values[lo - 1];
  iv.upper = values[hi - 1];
  return iv;
}

std::vector<Interval> block_bootstrap_ci(std::span<const double> series,
                                         const VectorStatistic& statistic,
                                         std::size_t dimension, const BootstrapOptions& options) {
  if (options.n_boot < 2) throw std::invalid_argument("need at least two bootstrap resamples");
  if (options.block_length < 1 || options.block_length > series.size()) {
    throw std::invalid_argument("block length must lie in [1, n]");
  }
  const SeededStream root(options.seed);
  std::vector<std::optional<std::vector<double>>> draws(options.n_boot);
  parallel_for(options.n_boot, options.threads, [&](std::size_t b) {
    auto stream = root.derive(b);
    for (std::size_t attempt = 0; attempt <= options.max_retries; ++attempt) {
      const auto resample = circular_block_resample(series, options.block_length, stream);
      std::vector<double> v;
      try {
        v = statistic(resample);
      } catch (const std::exception&) {
        continue;
      }
      if (v.size() != dimension) {
        throw std::logic_error("bootstrap statistic returned the wrong dimension");
      }
      draws[b] = std::move(v);
      return;
    }
  });

  std::vector<Interval> out(dimension);
  std::vector<double> column;
  for (std::size_t d = 0; d < dimension; ++d) {
    column.clear();
    std::size_t excluded = 0;
    for (const auto& draw : draws) {
      if (draw && std::isfinite((*draw)[d])) {
        column.push_back((*draw)[d]);
      } else {
        ++excluded;
      }
    }
    out[d] = percentile_interval(column, options.level);
    out[d].n_excluded = excluded;
  }
  return out;
}

Interval block_bootstrap_ci(std::span<const double> series, const ScalarStatistic& statistic,
                            const BootstrapOptions& options) {
  auto vector_stat = [&](std::span<const double> s) {
    const double v = statistic(s);
    if (!std::isfinite(v)) throw std::domain_error("non-finite bootstrap statistic");
    return std::vector<double>{v};
  };
  return block_bootstrap_ci(series, vector_stat, 1, options).front();
}

std::vector<double> arima_residuals(std::span<const double> series, const ArimaCoeffs& coeffs) {
  if (series.size() < 3) throw std::invalid_argument("ARIMA filter needs at least 3 values");
  std::vector<double> e(series.size() - 2);
  double prev = 0.0;
  for (std::size_t t = 2; t < series.size(); ++t) {
    const double et = series[t] - series[t - 1] - coeffs.phi1 * series[t - 1] +
                      coeffs.phi1 * series[t - 2] + coeffs.theta1 * prev;
    e[t - 2] = et;
    prev = et;
  }
  return e;
}

double return_level_transform(double r_e, double e_prev, double x_prev, double x_prev2,
                              const ArimaCoeffs& coeffs) {
  return r_e - coeffs.theta1 * e_prev + x_prev + coeffs.phi1 * x_prev - coeffs.phi1 * x_prev2;
}

void BacktestConfig::validate(std::size_t series_length) const {
  if (window < 3) throw std::invalid_argument("window must hold at least 3 points");
  if (horizon_points < 1) throw std::invalid_argument("horizon must be positive");
  if (window + horizon_points > series_length) {
    throw std::invalid_argument("window + horizon_points = " +
                                std::to_string(window + horizon_points) +
                                " exceeds the series length " + std::to_string(series_length));
  }
  if (k < 1 || k >= window) throw std::invalid_argument("k must lie in [1, window - 1]");
  if (!(p > 0.0 && p * static_cast<double>(window) < static_cast<double>(k))) {
    throw std::invalid_argument("p must satisfy 0 < p < k / window");
  }
  if (!(canonical_xi < 0.0)) throw std::invalid_argument("canonical xi must be negative");
}

QuantileEstimate estimate_window_quantile(std::span<const double> window,
                                          const BacktestConfig& config) {
  const OrderStatistics stats(window);
  const TailSample sample(stats, config.k);
  double xi = config.canonical_xi;
  if (config.xi_policy == XiPolicy::from_rho_hat) xi = resolve_xi(stats, config.canonical_xi).xi;
  switch (config.method) {
    case QuantileMethod::unbiased: return quantile_unbiased(sample, config.p, xi);
    case QuantileMethod::weissman: return quantile_weissman(sample, config.p);
    case QuantileMethod::dhmz: return quantile_dhmz(sample, config.p, xi);
  }
  throw std::logic_error("unhandled quantile method");
}

BacktestReport rolling_forecast_with(std::span<const double> series, const BacktestConfig& config,
                                     const Forecaster& forecaster, unsigned threads) {
  config.validate(series.size());
  const std::size_t first = series.size() - config.horizon_points;
  BacktestReport report;
  report.forecasts.resize(config.horizon_points);
  parallel_for(config.horizon_points, threads, [&](std::size_t h) {
    const std::size_t t = first + h;
    Forecast f;
    f.time = t;
    f.realized = series[t];
    f.x_hat = forecaster(series.subspan(t - config.window, config.window));
    if (f.x_hat && std::isnan(*f.x_hat)) f.x_hat.reset();
    f.violation = f.x_hat && f.realized > *f.x_hat;
    report.forecasts[h] = f;
  });
  for (const auto& f : report.forecasts) {
    if (!f.x_hat) ++report.n_missing;
    if (f.violation) report.violations.push_back(f.time);
  }
  report.expected_violations = static_cast<double>(config.horizon_points) * config.p;
  const auto k = kupiec_test(report.n_forecasts(), report.violations.size(), config.p);
  report.kupiec_lr = k.lr;
  report.kupiec_pvalue = k.pvalue;
  return report;
}

BacktestReport rolling_forecast(std::span<const double> series, const BacktestConfig& config,
                                unsigned threads, const std::optional<BootstrapOptions>& bootstrap) {
  auto forecaster = [&](std::span<const double> window) -> std::optional<double> {
    try {
      const auto q = estimate_window_quantile(window, config);
      if (q.status != QuantileStatus::ok) return std::nullopt;
      return q.x_hat;
    } catch (const std::domain_error&) {
    } catch (const std::invalid_argument&) {
    }
    return std::nullopt;
  };
  auto report = rolling_forecast_with(series, config, forecaster, threads);
  if (bootstrap) {
    parallel_for(report.forecasts.size(), threads, [&](std::size_t h) {
      auto& f = report.forecasts[h];
      if (!f.x_hat) return;
      auto opts = *bootstrap;
      opts.seed = splitmix64(bootstrap->seed ^ f.time);
      opts.threads = 1;
      opts.block_length = std::min(opts.block_length, config.window);
      const auto iv = block_bootstrap_ci(
          series.subspan(f.time - config.window, config.window),
          [&](std::span<const double> w) {
            const auto q = estimate_window_quantile(w, config);
            if (q.status != QuantileStatus::ok) throw std::domain_error("overshoot");
            return q.x_hat;
          },
          opts);
      if (iv.n_used > 0) f.ci = std::make_pair(iv.lower, iv.upper);
    });
  }
  return report;
}

BacktestReport rolling_forecast_arima(std::span<const double> series,
                                      const BacktestConfig& config, const ArimaCoeffs& coeffs,
                                      unsigned threads,
                                      const std::optional<BootstrapOptions>& bootstrap) {
  const auto e = arima_residuals(series, coeffs);
  auto report = rolling_forecast(e, config, threads, bootstrap);
  std::vector<Forecast> original;
  original.reserve(report.forecasts.size());
  for (auto& f : report.forecasts) {
    const std::size_t te = f.time;
    const std::size_t tx = te + 2;
    const double e_prev = te > 0 ? e[te - 1] : 0.0;
    const double shift =
        return_level_transform(0.0, e_prev, series[tx - 1], series[tx - 2], coeffs);
    Forecast o;
    o.time = tx;
    o.realized = series[tx];
    if (f.x_hat) {
      o.x_hat = *f.x_hat + shift;
      o.violation = o.realized > *o.x_hat;
    }
    if (f.ci) o.ci = std::make_pair(f.ci->first + shift, f.ci->second + shift);
    f.time = tx;
    original.push_back(o);
  }
  for (auto& v : report.violations) v += 2;
  report.original = std::move(original);
  return report;
}

std::vector<double> neg_log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw std::invalid_argument("need at least two prices");
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) {
    if (!(prices[t] > 0.0 && prices[t - 1] > 0.0)) {
      throw std::domain_error("log-returns need positive prices (row " + std::to_string(t) + ")");
    }
    out[t - 1] = -std::log(prices[t] / prices[t - 1]);
  }
  return out;
}

BacktestConfig backtest_config_from_json(const nlohmann::json& cfg) {
  reject_unknown_keys(cfg, {"window", "horizon_points", "p", "k", "method", "xi_policy", "xi",
                            "phi1", "theta1", "seed"});
  BacktestConfig c;
  if (auto v = get_count(cfg, "window")) c.window = static_cast<std::size_t>(*v);
  if (auto v = get_count(cfg, "horizon_points")) c.horizon_points = static_cast<std::size_t>(*v);
  if (auto v = get_double(cfg, "p")) c.p = *v;
  if (auto v = get_count(cfg, "k")) c.k = static_cast<std::size_t>(*v);
  if (auto v = get_string(cfg, "method")) {
    try {
      c.method = parse_quantile_method(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("method", e.what());
    }
  }
  if (auto v = get_string(cfg, "xi_policy")) {
    if (*v == "rho_hat" || *v == "from_rho_hat") {
      c.xi_policy = XiPolicy::from_rho_hat;
    } else if (*v == "canonical") {
      c.xi_policy = XiPolicy::canonical;
    } else {
      throw ConfigError("xi_policy", "expected rho_hat or canonical, got '" + *v + "'");
    }
  }
  if (auto v = get_double(cfg, "xi")) {
    if (!(*v < 0.0)) throw ConfigError("xi", "must be negative");
    c.canonical_xi = *v;
  }
  if (c.k < 1) throw ConfigError("k", "must be positive");
  if (!(c.p > 0.0 && c.p < 1.0)) throw ConfigError("p", "must lie in (0, 1)");
  return c;
}

nlohmann::json backtest_config_to_json(const BacktestConfig& config) {
  nlohmann::json j;
  j["window"] = config.window;
  j["horizon_points"] = config.horizon_points;
  j["p"] = config.p;
  j["k"] = config.k;
  j["method"] = to_string(config.method);
  j["xi_policy"] = config.xi_policy == XiPolicy::from_rho_hat ? "rho_hat" : "canonical";
  j["xi"] = config.canonical_xi;
  return j;
}

namespace {

nlohmann::json forecasts_json(const std::vector<Forecast>& forecasts) {
  auto arr = nlohmann::json::array();
  for (const auto& f : forecasts) {
    nlohmann::json r;
    r["time"] = f.time;
    r["forecast"] = f.x_hat ? nlohmann::json(*f.x_hat) : nlohmann::json(nullptr);
    r["realized"] = f.realized;
    r["violation"] = f.violation;
    if (f.ci) r["ci"] = {f.ci->first, f.ci->second};
    arr.push_back(r);
  }
  return arr;
}

}  // namespace

nlohmann::json backtest_to_json(const BacktestReport& report) {
  nlohmann::json j;
  j["forecasts"] = forecasts_json(report.forecasts);
  j["violations"] = report.violations;
  j["n_forecasts"] = report.n_forecasts();
  j["n_missing"] = report.n_missing;
  j["n_violations"] = report.violations.size();
  j["expected_violations"] = report.expected_violations;
  j["kupiec_lr"] = report.kupiec_lr;
  j["kupiec_pvalue"] = report.kupiec_pvalue;
  if (report.original) {
    j["original"] = forecasts_json(*report.original);
    std::size_t v = 0;
    for (const auto& f : *report.original) v += f.violation ? 1 : 0;
    j["n_violations_original"] = v;
  }
  return j;
}

std::string backtest_to_csv(const BacktestReport& report) {
  std::ostringstream os;
  const bool ci = std::any_of(report.forecasts.begin(), report.forecasts.end(),
                              [](const Forecast& f) { return f.ci.has_value(); });
  os << "time,forecast,realized,violation";
  if (ci) os << ",ci_lower,ci_upper";
  if (report.original) os << ",forecast_original,realized_original,violation_original";
  os << '\n';
  for (std::size_t i = 0; i < report.forecasts.size(); ++i) {
    const auto& f = report.forecasts[i];
    os << f.time << ',' << opt_double(f.x_hat) << ',' << format_double(f.realized) << ','
       << (f.violation ? 1 : 0);
    if (ci) {
      os << ',' << (f.ci ? format_double(f.ci->first) : "") << ','
         << (f.ci ? format_double(f.ci->second) : "");
    }
    if (report.original) {
      const auto& o = (*report.original)[i];
      os << ',' << opt_double(o.x_hat) << ',' << format_double(o.realized) << ','
         << (o.violation ? 1 : 0);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace tailrisk
