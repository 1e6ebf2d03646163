#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tailrisk/parallel.hpp"
#include "tailrisk/random.hpp"
#include "tailrisk/simulate.hpp"

using namespace tailrisk;
using doctest::Approx;

namespace {

InnovationSource scripted(std::vector<double> values) {
  auto data = std::make_shared<std::vector<double>>(std::move(values));
  auto pos = std::make_shared<std::size_t>(0);
  return [data, pos] { return (*data)[(*pos)++ % data->size()]; };
}

double kurtosis(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m += v;
  m /= x.size();
  double m2 = 0, m4 = 0;
  for (double v : x) {
    m2 += (v - m) * (v - m);
    m4 += std::pow(v - m, 4);
  }
  m2 /= x.size();
  m4 /= x.size();
  return m4 / (m2 * m2);
}

}  // namespace

TEST_SUITE("random") {
  TEST_CASE("streams are reproducible and derived streams independent of order") {
    SeededStream a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.engine()() == b.engine()());

    const SeededStream root(7);
    auto c5 = root.derive(5);
    auto c5b = SeededStream(7).derive(5);
    auto c6 = root.derive(6);
    const auto x = c5.engine()();
    CHECK(x == c5b.engine()());
    CHECK(x != c6.engine()());
    CHECK(root.derive(0).seed() != root.seed());
  }

  TEST_CASE("uniform_open stays inside (0, 1)") {
    SeededStream s(1);
    double lo = 1, hi = 0, sum = 0;
    for (int i = 0; i < 200000; ++i) {
      const double u = s.uniform_open();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    CHECK(sum / 200000 == Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("pairwise_sum is exact on small integers") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
    CHECK(pairwise_sum(v) == 499500.0);
  }
}

TEST_SUITE("innovations") {
  TEST_CASE("Frechet mixture inversion") {
    CHECK(frechet_mixture_quantile(0.875, 0.75) == Approx(5.484814947747078).epsilon(1e-14));
    CHECK(frechet_mixture_quantile(0.625, 0.75) == Approx(1.0 / std::log(2.0)).epsilon(1e-14));
    CHECK(std::signbit(frechet_mixture_quantile(0.25, 0.75)));
    CHECK(frechet_mixture_quantile(0.25 + 1e-12, 0.75) > 0.0);
    CHECK(frechet_mixture_quantile(0.1, 0.75) < frechet_mixture_quantile(0.2, 0.75));
    CHECK(frechet_mixture_quantile(0.6, 0.75) < frechet_mixture_quantile(0.9, 0.75));
  }

  TEST_CASE("Frechet mixture tail ratio") {
    SeededStream s(2024);
    const auto law = InnovationLaw::frechet_mixture(0.75);
    const std::size_t n = 10000000;
    const double x = 1000.0;
    std::size_t above = 0;
    for (std::size_t i = 0; i < n; ++i) above += sample_innovation(law, s) > x ? 1 : 0;
    const double ratio = double(above) / n * x;
    // P(eps > x) = q (1 - exp(-1/x)), within the MC error of 7500 events.
    CHECK(ratio == Approx(0.75).epsilon(0.04));
  }

  TEST_CASE("standardized Student t has unit variance") {
    SeededStream s(99);
    const auto law = InnovationLaw::student_t(5.99);
    const std::size_t n = 10000000;
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = sample_innovation(law, s);
      acc += e * e;
    }
    CHECK(acc / n == Approx(1.0).epsilon(0.01));
  }
}

TEST_SUITE("models") {
  TEST_CASE("homogeneous recursion from zero innovations") {
    for (auto spec : {ModelSpec::ar1(0.7, InnovationLaw{}), ModelSpec::ma1(0.4, InnovationLaw{}),
                      ModelSpec::iid(InnovationLaw{})}) {
      const auto x = generate_with(spec, 50, [] { return 0.0; });
      REQUIRE(x.size() == 50);
      for (double v : x) CHECK(v == 0.0);
    }
  }

  TEST_CASE("scripted MA(1)") {
    auto spec = ModelSpec::ma1(0.3, InnovationLaw{});
    const auto x = generate_with(spec, 1, scripted({1.0, 1.0}));
    CHECK(x[0] == Approx(1.3));
  }

  TEST_CASE("scripted AR(1) without burn-in") {
    auto spec = ModelSpec::ar1(0.5, InnovationLaw{});
    spec.burn_in = 0;
    const auto x = generate_with(spec, 3, scripted({1.0, 2.0, 3.0}));
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 2.5);
    CHECK(x[2] == 4.25);
  }

  TEST_CASE("constant innovations give a deterministic quantile") {
    auto spec = ModelSpec::iid(InnovationLaw{});
    auto x = generate_with(spec, 1000, [] { return 3.25; });
    CHECK(empirical_upper_quantile(x, 0.01) == 3.25);
  }

  TEST_CASE("empirical quantile picks the (floor(np)+1)-th largest") {
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i + 1);
    CHECK(empirical_upper_quantile(x, 0.001) == 999.0);
    CHECK(empirical_upper_quantile(x, 0.01) == 990.0);
    CHECK(empirical_upper_quantile(x, 0.0005) == 1000.0);
  }

  TEST_CASE("determinism across calls") {
    for (int id = 1; id <= 5; ++id) {
      const auto ref = reference_model(id);
      const auto a = generate(ref.spec, 2000, 77);
      const auto b = generate(ref.spec, 2000, 77);
      CHECK(a == b);
      CHECK(a != generate(ref.spec, 2000, 78));
    }
  }

  TEST_CASE("GARCH series are heavy tailed") {
    const auto spec = reference_model(4).spec;
    int heavy = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) heavy += kurtosis(generate(spec, 1000, seed)) > 3;
    CHECK(heavy >= 18);
  }

  TEST_CASE("stationarity smoke check") {
    for (int id = 2; id <= 5; ++id) {
      const auto x = generate(reference_model(id).spec, 400000, 11);
      const std::size_t h = x.size() / 2;
      // |X| has infinite variance in Models 2-3; winsorizing at 50 keeps the
      // standard error finite.
      std::vector<double> a, b;
      for (std::size_t i = 0; i < h; ++i) a.push_back(std::min(std::abs(x[i]), 50.0));
      for (std::size_t i = h; i < x.size(); ++i) b.push_back(std::min(std::abs(x[i]), 50.0));
      auto mean_sd = [](const std::vector<double>& v) {
        double m = 0, s = 0;
        for (double e : v) m += e;
        m /= v.size();
        for (double e : v) s += (e - m) * (e - m);
        return std::pair{m, std::sqrt(s / (v.size() - 1))};
      };
      const auto [ma, sa] = mean_sd(a);
      const auto [mb, sb] = mean_sd(b);
      // Serial dependence inflates the standard error; 50-lag blocks are a
      // generous allowance for the reference parameters.
      const double se = std::sqrt((sa * sa + sb * sb) / h * 50);
      INFO("model ", id);
      CHECK(std::abs(ma - mb) < 5 * se);
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(validate(ModelSpec::ar1(1.0, InnovationLaw{})), std::invalid_argument);
    CHECK_THROWS_AS(validate(ModelSpec::iid(InnovationLaw::student_t(2.0))), std::invalid_argument);
    CHECK_THROWS_AS(validate(ModelSpec::iid(InnovationLaw::frechet_mixture(1.5))),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(ModelSpec::garch(-1.0, {0.1}, {0.8}, InnovationLaw::student_t(5))),
                    std::invalid_argument);
    const auto w = validate(ModelSpec::garch(0.1, {0.5}, {0.6}, InnovationLaw::student_t(5)));
    CHECK(w.size() == 1);
    CHECK(validate(reference_model(5).spec).empty());
    CHECK(ModelSpec::ma1(0.3, {}).effective_burn_in() == 0);
    CHECK(ModelSpec::ar1(0.3, {}).effective_burn_in() == kDefaultBurnIn);
  }

  TEST_CASE("true quantile Monte Carlo") {
    const SeededStream s(5);
    auto spec = ModelSpec::iid(InnovationLaw{});
    const auto a = true_quantile_mc(spec, 0.01, 20, 20000, s, 1);
    const auto b = true_quantile_mc(spec, 0.01, 20, 20000, s, 4);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    // Exact 0.99-quantile of the mixture: 1/log(1/(1 - 0.01/0.75)).
    const double exact = -1.0 / std::log(1.0 - 0.01 / 0.75);
    CHECK(std::abs(a.estimate - exact) < 5 * a.std_error + 0.01 * exact);
    CHECK_THROWS_AS(true_quantile_mc(spec, 0.01, 1000, 1000000, s, 1, 1e8), std::length_error);
  }

  TEST_CASE("config round trip") {
    for (int id = 1; id <= 5; ++id) {
      const auto spec = reference_model(id).spec;
      const auto j = model_to_json(spec);
      const auto back = model_from_config(j);
      CHECK(model_to_json(back) == j);
    }
    const auto spec = reference_model(5).spec;
    const auto text = model_to_key_value(spec);
    CHECK(text.find("kind = garch") != std::string::npos);
  }
}
