#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "tailrisk/backtest.hpp"
#include "tailrisk/simulate.hpp"

using namespace tailrisk;
using doctest::Approx;

TEST_SUITE("kupiec") {
  TEST_CASE("published counts") {
    const auto a = kupiec_test(400, 7, 0.01);
    CHECK(a.lr == Approx(1.857406).epsilon(1e-6));
    CHECK(a.pvalue == Approx(0.172924).epsilon(1e-5));
    const auto b = kupiec_test(1200, 17, 0.01);
    CHECK(b.lr == Approx(1.863501).epsilon(1e-6));
    CHECK(b.pvalue == Approx(0.172221).epsilon(1e-5));
  }

  TEST_CASE("exact nominal rate") {
    const auto r = kupiec_test(400, 4, 0.01);
    CHECK(r.lr == Approx(0.0).epsilon(1e-12));
    CHECK(r.pvalue == Approx(1.0));
  }

  TEST_CASE("zero and full violation counts") {
    const auto z = kupiec_test(400, 0, 0.01);
    CHECK(z.lr == Approx(-2 * 400 * std::log(0.99)));
    CHECK(z.pvalue >= 0.0);
    CHECK(z.pvalue <= 1.0);
    const auto f = kupiec_test(10, 10, 0.01);
    CHECK(f.lr == Approx(-2 * 10 * std::log(0.01)));
  }

  TEST_CASE("non-negative and p-value decreasing in LR") {
    double last_lr = -1, last_p = 2;
    for (std::size_t x = 4; x <= 40; ++x) {
      const auto r = kupiec_test(400, x, 0.01);
      CHECK(r.lr >= 0.0);
      CHECK(r.lr > last_lr);
      CHECK(r.pvalue < last_p);
      last_lr = r.lr;
      last_p = r.pvalue;
    }
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS(kupiec_test(10, 11, 0.01));
    CHECK_THROWS(kupiec_test(10, 1, 0.0));
    CHECK_THROWS(kupiec_test(10, 1, 1.0));
  }
}

TEST_SUITE("bootstrap") {
  TEST_CASE("percentile ranks for B = 99") {
    std::vector<double> v(99);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    const auto ci = percentile_interval(v, 0.95);
    CHECK(ci.lower == 3.0);
    CHECK(ci.upper == 97.0);
    CHECK(ci.n_used == 99);
  }

  TEST_CASE("resample structure") {
    std::vector<double> x(10);
    std::iota(x.begin(), x.end(), 0.0);
    SeededStream s(3);
    const auto r = circular_block_resample(x, 4, s);
    REQUIRE(r.size() == 10);
    for (std::size_t b = 0; b < 10; b += 4) {
      for (std::size_t j = 1; j < 4 && b + j < 10; ++j) {
        CHECK(r[b + j] == std::fmod(r[b + j - 1] + 1.0, 10.0));
      }
    }
  }

  TEST_CASE("constant series gives a degenerate interval") {
    const std::vector<double> c(300, 2.5);
    BootstrapOptions o;
    o.block_length = 50;
    const auto ci = block_bootstrap_ci(
        c, [](std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); },
        o);
    CHECK(ci.lower == Approx(2.5));
    CHECK(ci.upper == Approx(2.5));
  }

  TEST_CASE("full-length blocks are rotations") {
    const auto x = oracle::pareto_sample(0.5, 400, 8);
    BootstrapOptions o;
    o.block_length = x.size();
    o.n_boot = 49;
    auto sum = [](std::span<const double> v) {
      std::vector<double> s(v.begin(), v.end());
      std::sort(s.begin(), s.end());
      return std::accumulate(s.begin(), s.end(), 0.0);
    };
    const auto ci = block_bootstrap_ci(x, sum, o);
    CHECK(ci.lower == ci.upper);
    CHECK(ci.lower == Approx(sum(x)));
  }

  TEST_CASE("determinism and thread independence") {
    const auto x = generate(reference_model(2).spec, 1000, 5);
    BootstrapOptions o;
    o.seed = 17;
    auto stat = [](std::span<const double> v) {
      return hill(build_tail_sample(v, 100)).gamma_hat;
    };
    const auto a = block_bootstrap_ci(x, stat, o);
    o.threads = 4;
    const auto b = block_bootstrap_ci(x, stat, o);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    o.seed = 18;
    const auto c = block_bootstrap_ci(x, stat, o);
    CHECK((c.lower != a.lower || c.upper != a.upper));
  }

  TEST_CASE("failing statistic is redrawn then excluded") {
    const auto x = oracle::pareto_sample(0.5, 200, 1);
    BootstrapOptions o;
    o.block_length = 20;
    o.n_boot = 19;
    const auto ci = block_bootstrap_ci(
        x, [](std::span<const double>) -> double { throw std::domain_error("always"); }, o);
    CHECK(ci.n_used == 0);
    CHECK(ci.n_excluded == 19);
    CHECK(std::isnan(ci.lower));

    int calls = 0;
    o.threads = 1;
    const auto flaky = block_bootstrap_ci(
        x,
        [&](std::span<const double> v) {
          if (++calls % 2 == 1) return std::numeric_limits<double>::quiet_NaN();
          return v[0];
        },
        o);
    CHECK(flaky.n_used == 19);
    CHECK(flaky.n_excluded == 0);
  }

  TEST_CASE("vector statistic") {
    const auto x = oracle::pareto_sample(0.5, 500, 2);
    BootstrapOptions o;
    o.block_length = 50;
    o.n_boot = 39;
    auto sweep = [](std::span<const double> v) {
      const OrderStatistics os(v);
      std::vector<double> out;
      for (std::size_t k : {20u, 50u, 100u}) out.push_back(hill(TailSample(os, k)).gamma_hat);
      return out;
    };
    const auto cis = block_bootstrap_ci(x, sweep, 3, o);
    REQUIRE(cis.size() == 3);
    for (const auto& ci : cis) {
      CHECK(ci.lower <= ci.upper);
      CHECK(ci.n_used == 39);
    }
    CHECK_THROWS_AS(block_bootstrap_ci(x, sweep, 2, o), std::logic_error);
  }
}

TEST_SUITE("arima") {
  TEST_CASE("pure differencing") {
    const std::vector<double> x = {1, 4, 9, 16, 25};
    const auto e = arima_residuals(x, {0, 0});
    REQUIRE(e.size() == 3);
    CHECK(e[0] == 5);
    CHECK(e[1] == 7);
    CHECK(e[2] == 9);
  }

  TEST_CASE("scripted recursion") {
    const std::vector<double> x = {1, 2, 4};
    const auto e = arima_residuals(x, {0.5, -1});
    REQUIRE(e.size() == 1);
    CHECK(e[0] == Approx(1.5));
  }

  TEST_CASE("return level transform") {
    CHECK(return_level_transform(1.0, 0.2, 3.0, 2.5, {0.819, -0.989}) == Approx(4.6073).epsilon(1e-12));
    CHECK(return_level_transform(1.5, 9.0, 3.0, 2.0, {0, 0}) == 4.5);
  }

  TEST_CASE("round trip through the inverse transform") {
    SeededStream s(4);
    std::vector<double> x(500);
    for (auto& v : x) v = 10 * s.uniform_open();
    const ArimaCoeffs c{0.819, -0.989};
    const auto e = arima_residuals(x, c);
    for (std::size_t t = 2; t < x.size(); ++t) {
      const double e_prev = t >= 3 ? e[t - 3] : 0.0;
      const double back = return_level_transform(e[t - 2], e_prev, x[t - 1], x[t - 2], c);
      REQUIRE(std::abs(back - x[t]) <= 1e-12 * std::max(1.0, std::abs(x[t])));
    }
  }
}

TEST_SUITE("rolling") {
  TEST_CASE("infinite forecasts never violate") {
    std::vector<double> x(100);
    std::iota(x.begin(), x.end(), 1.0);
    BacktestConfig c;
    c.window = 50;
    c.horizon_points = 40;
    c.k = 10;
    c.p = 0.01;
    const auto r = rolling_forecast_with(
        x, c, [](std::span<const double>) { return std::optional<double>(INFINITY); });
    CHECK(r.violations.empty());
    CHECK(r.forecasts.size() == 40);
    CHECK(r.expected_violations == Approx(0.4));
    CHECK(r.kupiec_pvalue == Approx(kupiec_test(40, 0, 0.01).pvalue));
  }

  TEST_CASE("known violation pattern and missing windows") {
    std::vector<double> x(60, 0.0);
    for (std::size_t t : {45u, 50u, 59u}) x[t] = 5.0;
    x[52] = 1.0;  // equal to the forecast: not a violation
    BacktestConfig c;
    c.window = 40;
    c.horizon_points = 20;
    c.k = 10;
    c.p = 0.05;
    const auto r = rolling_forecast_with(x, c, [](std::span<const double> w) -> std::optional<double> {
      if (w.size() != 40) throw std::logic_error("bad window");
      return 1.0;
    });
    CHECK(r.violations == std::vector<std::size_t>{45, 50, 59});
    CHECK(r.forecasts.front().time == 40);
    CHECK(r.n_missing == 0);

    const auto m = rolling_forecast_with(x, c, [](std::span<const double> w) -> std::optional<double> {
      if (w.back() == 5.0) return std::nullopt;
      return 1.0;
    });
    // Forecasts for t = 46, 51 follow a 5.0 and are missing.
    CHECK(m.n_missing == 2);
    CHECK(m.n_forecasts() == 18);
    CHECK(m.violations == std::vector<std::size_t>{45, 50, 59});
  }

  TEST_CASE("thread independence") {
    const auto x = generate(reference_model(2).spec, 1200, 9);
    BacktestConfig c;
    c.window = 600;
    c.horizon_points = 300;
    const auto a = rolling_forecast(x, c, 1);
    const auto b = rolling_forecast(x, c, 5);
    CHECK(backtest_to_csv(a) == backtest_to_csv(b));
    CHECK(a.violations.size() + 0 == b.violations.size());
  }

  TEST_CASE("config validation") {
    BacktestConfig c;
    CHECK_THROWS(c.validate(900));
    CHECK_NOTHROW(c.validate(1000));
    c.p = 0.5;
    CHECK_THROWS(c.validate(1000));
  }

  TEST_CASE("ARIMA run carries original-scale forecasts") {
    const auto e = generate(ModelSpec::iid(InnovationLaw::student_t(4)), 800, 12);
    std::vector<double> x(e.size());
    x[0] = 10;
    x[1] = 10.5;
    for (std::size_t t = 2; t < x.size(); ++t) x[t] = x[t - 1] + 0.5 * (x[t - 1] - x[t - 2]) + e[t];
    BacktestConfig c;
    c.window = 500;
    c.horizon_points = 200;
    c.k = 60;
    c.xi_policy = XiPolicy::canonical;
    const ArimaCoeffs co{0.5, 0.0};
    const auto r = rolling_forecast_arima(x, c, co);
    REQUIRE(r.original.has_value());
    REQUIRE(r.original->size() == r.forecasts.size());
    const auto res = arima_residuals(x, co);
    for (std::size_t i = 0; i < r.forecasts.size(); ++i) {
      const auto& f = r.forecasts[i];
      const auto& o = (*r.original)[i];
      CHECK(f.time == o.time);
      CHECK(o.realized == x[o.time]);
      CHECK(f.realized == Approx(res[f.time - 2]).epsilon(1e-12));
      if (f.x_hat && o.x_hat) {
        CHECK(f.violation == o.violation);
      }
    }
    const auto csv = backtest_to_csv(r);
    CHECK(csv.find("forecast_original") != std::string::npos);
  }

  TEST_CASE("negative log returns") {
    const std::vector<double> p = {100, 110, 99};
    const auto r = neg_log_returns(p);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == Approx(-std::log(1.1)));
    CHECK(r[1] == Approx(-std::log(0.9)));
    CHECK_THROWS_AS(neg_log_returns(std::vector<double>{1, 0}), std::domain_error);
  }

  TEST_CASE("json config") {
    const auto c = backtest_config_from_json({{"window", 500}, {"horizon_points", 100}, {"k", 50},
                                              {"method", "weissman"}, {"xi_policy", "canonical"},
                                              {"xi", -0.5}});
    CHECK(c.window == 500);
    CHECK(c.method == QuantileMethod::weissman);
    CHECK(c.xi_policy == XiPolicy::canonical);
    CHECK(c.canonical_xi == -0.5);
    CHECK_THROWS(backtest_config_from_json({{"windw", 10}}));
  }
}
