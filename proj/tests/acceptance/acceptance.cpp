// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Criteria can be selected by number on the
// command line, e.g. `acceptance 1 5`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tailrisk/asymptotics.hpp"
#include "tailrisk/backtest.hpp"
#include "tailrisk/estimators.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/simulate.hpp"
#include "tailrisk/study.hpp"

using namespace tailrisk;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

unsigned threads() { return default_thread_count(); }

std::vector<double> pareto(double gamma, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = std::pow(1.0 - u(rng), -gamma);
  return x;
}

const double kRhos[] = {-0.25, -0.5, -1.0, -2.0};

// 1 -------------------------------------------------------------------------
Outcome hill_equivalence() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(3, 10000);
  std::uniform_real_distribution<double> g(0.05, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = pareto(g(rng), size(rng), rng);
    std::uniform_int_distribution<std::size_t> kd(1, x.size() - 1);
    const auto s = build_tail_sample(x, kd(rng));
    const double h = hill(s).gamma_hat;
    const double kh = gamma_kernel(s, Kernel::power(0)).gamma_hat;
    worst = std::max(worst, std::abs(kh - h) / std::abs(h));
  }
  return {worst <= 1e-12, "max relative difference " + fmt("%.3g", worst) + " over 1000 samples"};
}

// 2 -------------------------------------------------------------------------
Outcome bias_cancellation() {
  double worst_zero = 0.0, worst_mis = 0.0;
  for (double rho : kRhos) {
    worst_zero = std::max(worst_zero, std::abs(ab_kernel(Kernel::optimal_mixture(rho), rho)));
    for (double rt : kRhos) {
      if (rt == rho) continue;
      worst_mis = std::max(worst_mis, std::abs(ab_kernel(Kernel::optimal_mixture(rt), rho) -
                                               ab_optimal_misspecified(rt, rho)));
    }
  }
  return {worst_zero <= 1e-8 && worst_mis <= 1e-8,
          "max |AB| " + fmt("%.3g", worst_zero) + ", max misspecified error " +
              fmt("%.3g", worst_mis)};
}

// 3 -------------------------------------------------------------------------
Outcome minimal_variance() {
  double worst = 0.0;
  for (double rho : kRhos)
    for (double g : {0.5, 1.0, 2.0}) {
      const double want = g * g * std::pow((1 - rho) / rho, 2);
      worst = std::max(worst, std::abs(av_iid(Kernel::optimal_mixture(rho), g) - want) / want);
    }
  return {worst <= 1e-6, "max relative error " + fmt("%.3g", worst)};
}

// 4 -------------------------------------------------------------------------
Outcome covariance_forms() {
  const double ar = covariance_r(DependenceModel::ar1(0.3), 1.0, 1, 1);
  const double ma = covariance_r(DependenceModel::ma1(0.3), 1.0, 1, 1);
  const double e_ar = std::abs(ar - 13.0 / 7.0);
  const double e_ma = std::abs(ma - 19.0 / 13.0);
  std::size_t checked = 0, violations = 0;
  for (int i = 1; i <= 9; ++i)
    for (auto m : {DependenceModel::ar1(0.1 * i), DependenceModel::ma1(0.1 * i)})
      for (double g : {0.5, 1.0, 2.0})
        for (double rho : {-2.0, -1.0, -0.5}) {
          const auto v = av_dependent_optimal(m, g, rho);
          ++checked;
          if (!(v.optimal <= v.competitor)) ++violations;
        }
  return {e_ar <= 1e-12 && e_ma <= 1e-12 && violations == 0,
          "r_ar error " + fmt("%.2g", e_ar) + ", r_ma error " + fmt("%.2g", e_ma) + ", ordering " +
              std::to_string(checked - violations) + "/" + std::to_string(checked)};
}

// 5 -------------------------------------------------------------------------
Outcome kupiec() {
  const auto a = kupiec_test(400, 7, 0.01);
  const auto b = kupiec_test(1200, 17, 0.01);
  return {std::abs(a.pvalue - 0.173) <= 0.001 && std::abs(b.pvalue - 0.172) <= 0.001,
          "p-values " + fmt("%.6f", a.pvalue) + " and " + fmt("%.6f", b.pvalue)};
}

// 6 -------------------------------------------------------------------------
Outcome true_quantiles() {
  bool ok = true;
  std::string detail;
  for (int id = 1; id <= 5; ++id) {
    const auto ref = reference_model(id);
    const std::size_t reps = id <= 3 ? 100 : 200;
    const double tol = id <= 3 ? 0.03 : 0.05;
    const auto mc = true_quantile_mc(ref.spec, 0.001, reps, 1000000,
                                     SeededStream(6000 + static_cast<std::uint64_t>(id)), threads());
    const double rel = std::abs(mc.estimate / ref.x_p_true - 1);
    ok = ok && rel <= tol;
    detail += (id > 1 ? "; " : "") + std::string("M") + std::to_string(id) + " " +
              fmt("%.4g", mc.estimate) + " vs " + fmt("%.4g", ref.x_p_true) + " (" +
              fmt("%.2f", 100 * rel) + "%)";
  }
  return {ok, detail};
}

// 7 -------------------------------------------------------------------------
Outcome bias_comparison() {
  bool ok = true;
  std::string detail;
  for (int id = 1; id <= 3; ++id) {
    const auto ref = reference_model(id);
    StudyConfig c;
    c.model_name = "model" + std::to_string(id);
    c.spec = ref.spec;
    c.n = 1000;
    c.replications = 500;
    c.p = 0.001;
    c.k_grid = default_k_grid(c.n);
    c.x_p_true = ref.x_p_true;
    c.seed = 7000 + static_cast<std::uint64_t>(id);
    const auto r = run_study(c, threads());

    std::size_t in_range = 0, better = 0, width_u = 0, width_d = 0;
    for (std::size_t k : c.k_grid) {
      const auto& u = r.cell(QuantileMethod::unbiased, k);
      const auto& w = r.cell(QuantileMethod::weissman, k);
      const auto& d = r.cell(QuantileMethod::dhmz, k);
      if (!u.missing() && u.abias < 0.15) ++width_u;
      if (!d.missing() && d.abias < 0.15) ++width_d;
      if (k < 100 || k > 400) continue;
      ++in_range;
      if (!u.missing() && (w.missing() || u.abias < w.abias)) ++better;
    }
    const double share = double(better) / double(in_range);
    const bool pass = share >= 0.6 && width_u >= width_d;
    ok = ok && pass;
    detail += (id > 1 ? "; " : "") + std::string("M") + std::to_string(id) + " below Weissman " +
              std::to_string(better) + "/" + std::to_string(in_range) + ", |ABias|<0.15 at " +
              std::to_string(width_u) + " vs " + std::to_string(width_d) + " k";
  }
  return {ok, detail};
}

// 8 -------------------------------------------------------------------------
Outcome properties() {
  std::vector<std::string> failed;
  auto expect = [&](bool cond, const char* name) {
    if (!cond) failed.emplace_back(name);
  };

  std::mt19937_64 rng(8);

  {  // scale equivariance
    bool ok = true;
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = pareto(0.5, 2000, rng);
      const double c = std::exp(std::uniform_real_distribution<double>(-8, 8)(rng));
      std::vector<double> y(x);
      for (auto& v : y) v *= c;
      for (std::size_t k : {40u, 150u, 400u}) {
        const auto sx = build_tail_sample(x, k), sy = build_tail_sample(y, k);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
        ok = ok && rel(hill(sy).gamma_hat, hill(sx).gamma_hat) < 1e-10;
        ok = ok && rel(gamma_optimal_unbiased(sy, -1).gamma_hat,
                       gamma_optimal_unbiased(sx, -1).gamma_hat) < 1e-10;
        ok = ok && rel(gamma_dhmz(sy, -1).gamma_hat, gamma_dhmz(sx, -1).gamma_hat) < 1e-10;
        ok = ok && rel(quantile_unbiased(sy, 0.001, -1).x_hat,
                       c * quantile_unbiased(sx, 0.001, -1).x_hat) < 1e-10;
        ok = ok && rel(quantile_weissman(sy, 0.001).x_hat, c * quantile_weissman(sx, 0.001).x_hat) <
                       1e-10;
        ok = ok && rel(quantile_dhmz(sy, 0.001, -1).x_hat, c * quantile_dhmz(sx, 0.001, -1).x_hat) <
                       1e-10;
      }
    }
    expect(ok, "scale equivariance");
  }

  std::vector<Kernel> kernels;
  for (double nu : {0.0, 1.0, 2.5}) {
    kernels.push_back(Kernel::power(nu));
    kernels.push_back(Kernel::log_weight(nu));
  }
  for (double rho : kRhos) {
    kernels.push_back(Kernel::second_order(rho));
    kernels.push_back(Kernel::optimal_mixture(rho));
  }

  {  // weight telescoping
    bool ok = true;
    for (const auto& K : kernels)
      for (std::size_t k = 1; k <= 500; ++k) {
        double s = 0;
        for (double w : K.weights(k)) s += w;
        ok = ok && std::abs(s - K(1.0)) <= 1e-12 * std::max(1.0, std::abs(K(1.0)));
      }
    expect(ok, "weight telescoping");
  }

  {  // kernel normalization
    bool ok = true;
    for (const auto& K : kernels) {
      auto f = [&](double u) { return u > 0 ? 2 * u * K(u * u) : 0.0; };
      const double v =
          boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 25, 1e-13);
      ok = ok && std::abs(v - 1) <= 1e-9;
    }
    expect(ok, "kernel normalization");
  }

  {  // strict negativity of rho-hat
    bool ok = true;
    std::uniform_real_distribution<double> u(2.0 / 3.0, 0.75);
    for (int i = 0; i < 200000; ++i)
      if (const auto r = rho_from_s(u(rng))) ok = ok && *r < 0;
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = generate(reference_model(1 + rep % 5).spec, 2000,
                              static_cast<std::uint64_t>(rep));
      const auto est = select_k_rho(x);
      if (est.valid) ok = ok && est.rho_hat < 0;
    }
    expect(ok, "rho-hat negativity");
  }

  {  // rmse >= abias
    StudyConfig c;
    c.spec = reference_model(2).spec;
    c.x_p_true = reference_model(2).x_p_true;
    c.replications = 40;
    c.k_grid = default_k_grid(c.n);
    const auto r = run_study(c, threads());
    bool ok = true;
    for (const auto& cell : r.cells)
      if (!cell.missing()) ok = ok && cell.rmse >= cell.abias && cell.abias >= 0;
    expect(ok, "rmse >= abias");
  }

  {  // ARIMA round trip
    std::vector<double> x(2000);
    std::normal_distribution<double> nd(5, 3);
    for (auto& v : x) v = nd(rng);
    const ArimaCoeffs co{0.819, -0.989};
    const auto e = arima_residuals(x, co);
    double worst = 0;
    for (std::size_t t = 2; t < x.size(); ++t) {
      const double back =
          return_level_transform(e[t - 2], t >= 3 ? e[t - 3] : 0.0, x[t - 1], x[t - 2], co);
      worst = std::max(worst, std::abs(back - x[t]) / std::max(1.0, std::abs(x[t])));
    }
    expect(worst <= 1e-12, "ARIMA round trip");
  }

  {  // bootstrap and simulation determinism
    const auto a = generate(reference_model(4).spec, 5000, 99);
    const auto b = generate(reference_model(4).spec, 5000, 99);
    expect(a == b, "simulation determinism");
    BootstrapOptions o;
    o.seed = 5;
    auto stat = [](std::span<const double> v) { return hill(build_tail_sample(v, 200)).gamma_hat; };
    const auto x = generate(reference_model(2).spec, 2000, 3);
    const auto c1 = block_bootstrap_ci(x, stat, o);
    o.threads = threads();
    const auto c2 = block_bootstrap_ci(x, stat, o);
    expect(c1.lower == c2.lower && c1.upper == c2.upper, "bootstrap determinism");
  }

  std::string detail = failed.empty() ? "all property checks green" : "failed:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

// 9 -------------------------------------------------------------------------
Outcome bootstrap_coverage() {
  const std::size_t outer = 200, n = 1000, k = 100;
  const auto spec = ModelSpec::ar1(0.3, InnovationLaw::frechet_mixture(0.75));
  std::vector<int> covered(outer, 0);
  const SeededStream root(9000);
  parallel_for(outer, threads(), [&](std::size_t i) {
    auto stream = root.derive(i);
    const auto x = generate(spec, n, stream);
    BootstrapOptions o;
    o.block_length = 200;
    o.n_boot = 99;
    o.level = 0.95;
    o.seed = splitmix64(9000 + i);
    const auto ci = block_bootstrap_ci(
        x, [&](std::span<const double> v) { return hill(build_tail_sample(v, k)).gamma_hat; }, o);
    covered[i] = ci.lower <= 1.0 && 1.0 <= ci.upper;
  });
  std::size_t hits = 0;
  for (int c : covered) hits += static_cast<std::size_t>(c);
  const double rate = 100.0 * double(hits) / double(outer);
  return {std::abs(rate - 95.0) <= 5.0,
          "coverage " + fmt("%.1f", rate) + "% over " + std::to_string(outer) +
              " replications (n = 1000, k = 100, L = 200, B = 99)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "Hill equivalence", hill_equivalence},
      {2, "bias cancellation", bias_cancellation},
      {3, "minimal variance identity", minimal_variance},
      {4, "covariance closed forms and variance ordering", covariance_forms},
      {5, "Kupiec reproduction", kupiec},
      {6, "true-quantile oracles", true_quantiles},
      {7, "desk-scale bias comparison", bias_comparison},
      {8, "property suites", properties},
      {9, "bootstrap coverage", bootstrap_coverage},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
