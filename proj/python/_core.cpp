#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "tailrisk/asymptotics.hpp"
#include "tailrisk/backtest.hpp"
#include "tailrisk/config.hpp"
#include "tailrisk/estimators.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/simulate.hpp"
#include "tailrisk/study.hpp"

namespace py = pybind11;
using namespace tailrisk;

namespace {

// Dicts cross the boundary as JSON text; configs are small.
nlohmann::json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

QuantileMethod quantile_method(const std::string& name) { return parse_quantile_method(name); }

py::dict quantile_dict(const QuantileEstimate& q) {
  py::dict d;
  d["x_hat"] = q.x_hat;
  d["p"] = q.p;
  d["k"] = q.k;
  d["method"] = to_string(q.method);
  d["xi"] = q.xi ? py::object(py::float_(*q.xi)) : py::object(py::none());
  d["gamma_hat"] = q.gamma_hat;
  d["correction_factor"] = q.correction_factor;
  d["overshoot"] = q.status == QuantileStatus::correction_overshoot;
  return d;
}

py::dict rho_dict(const SecondOrderEstimate& r) {
  py::dict d;
  d["valid"] = r.valid;
  d["rho_hat"] = r.valid ? py::object(py::float_(r.rho_hat)) : py::object(py::none());
  d["k_rho"] = r.valid ? py::object(py::int_(r.k_rho)) : py::object(py::none());
  d["s_value"] = r.s_value;
  return d;
}

double resolved_xi(const OrderStatistics& os, const std::optional<double>& xi) {
  return xi ? *xi : resolve_xi(os).xi;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extreme-value index and extreme-quantile estimation for dependent series";
  m.attr("__version__") = TAILRISK_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "hill",
      [](py::array_t<double> x, std::size_t k) {
        return hill(build_tail_sample(as_vector(x), k)).gamma_hat;
      },
      py::arg("x"), py::arg("k"));

  m.def(
      "gamma_unbiased",
      [](py::array_t<double> x, std::size_t k, std::optional<double> xi) {
        const auto v = as_vector(x);
        const OrderStatistics os(v);
        return gamma_optimal_unbiased(TailSample(os, k), resolved_xi(os, xi)).gamma_hat;
      },
      py::arg("x"), py::arg("k"), py::arg("xi") = py::none(),
      "Kernel estimate with the optimal mixture; xi defaults to rho-hat at k_rho.");

  m.def(
      "gamma_dhmz",
      [](py::array_t<double> x, std::size_t k, std::optional<double> xi) {
        const auto v = as_vector(x);
        const OrderStatistics os(v);
        return gamma_dhmz(TailSample(os, k), resolved_xi(os, xi)).gamma_hat;
      },
      py::arg("x"), py::arg("k"), py::arg("xi") = py::none());

  m.def(
      "rho_estimate",
      [](py::array_t<double> x) { return rho_dict(select_k_rho(as_vector(x))); }, py::arg("x"),
      "Second-order parameter at the largest admissible k_rho.");

  m.def(
      "quantile",
      [](py::array_t<double> x, std::size_t k, double p, const std::string& method,
         std::optional<double> xi) {
        const auto v = as_vector(x);
        const OrderStatistics os(v);
        const TailSample s(os, k);
        switch (quantile_method(method)) {
          case QuantileMethod::unbiased:
            return quantile_dict(quantile_unbiased(s, p, resolved_xi(os, xi)));
          case QuantileMethod::dhmz:
            return quantile_dict(quantile_dhmz(s, p, resolved_xi(os, xi)));
          case QuantileMethod::weissman:
            break;
        }
        return quantile_dict(quantile_weissman(s, p));
      },
      py::arg("x"), py::arg("k"), py::arg("p"), py::arg("method") = "unbiased",
      py::arg("xi") = py::none());

  m.def("av_optimal", &av_optimal_closed_form, py::arg("gamma"), py::arg("rho"));
  m.def(
      "ab_optimal_misspecified", &ab_optimal_misspecified, py::arg("rho_tilde"), py::arg("rho"));
  m.def(
      "covariance_r",
      [](const std::string& model, double theta, double gamma, double x, double y) {
        DependenceModel d = DependenceModel::iid();
        if (model == "ar1") d = DependenceModel::ar1(theta);
        else if (model == "ma1") d = DependenceModel::ma1(theta);
        else if (model != "iid") throw std::invalid_argument("model must be iid, ar1 or ma1");
        return covariance_r(d, gamma, x, y);
      },
      py::arg("model"), py::arg("theta"), py::arg("gamma"), py::arg("x"), py::arg("y"));

  m.def(
      "reference_model",
      [](int id) {
        const auto r = reference_model(id);
        auto j = model_to_json(r.spec);
        j["x_p_true"] = r.x_p_true;
        j["n"] = r.n;
        return from_json(j);
      },
      py::arg("id"));

  m.def(
      "simulate",
      [](const py::object& model, std::size_t n, std::uint64_t seed) {
        ModelSpec spec;
        if (py::isinstance<py::int_>(model)) {
          spec = reference_model(model.cast<int>()).spec;
        } else {
          auto j = to_json(model);
          j.erase("x_p_true");
          j.erase("n");
          spec = model_from_config(j);
        }
        std::vector<double> out;
        {
          py::gil_scoped_release release;
          out = generate(spec, n, seed);
        }
        return as_array(out);
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 1,
      "Simulate from a model dict or a reference model number 1-5.");

  m.def(
      "kupiec",
      [](std::size_t n, std::size_t violations, double p) {
        const auto r = kupiec_test(n, violations, p);
        return py::make_tuple(r.lr, r.pvalue);
      },
      py::arg("n_forecasts"), py::arg("n_violations"), py::arg("p"));

  m.def(
      "hill_bootstrap_ci",
      [](py::array_t<double> x, std::size_t k, std::size_t block_length, std::size_t n_boot,
         double level, std::uint64_t seed) {
        BootstrapOptions o;
        o.block_length = block_length;
        o.n_boot = n_boot;
        o.level = level;
        o.seed = seed;
        const auto v = as_vector(x);
        Interval iv;
        {
          py::gil_scoped_release release;
          iv = block_bootstrap_ci(
              v, [k](std::span<const double> s) { return hill(build_tail_sample(s, k)).gamma_hat; },
              o);
        }
        return py::make_tuple(iv.lower, iv.upper);
      },
      py::arg("x"), py::arg("k"), py::arg("block_length") = 200, py::arg("n_boot") = 99,
      py::arg("level") = 0.95, py::arg("seed") = 1);

  m.def(
      "mcstudy",
      [](const py::object& config, unsigned threads) {
        const auto c = study_config_from_json(to_json(config));
        StudyResult r;
        {
          py::gil_scoped_release release;
          r = run_study(c, threads == 0 ? default_thread_count() : threads);
        }
        return from_json(study_to_json(r));
      },
      py::arg("config"), py::arg("threads") = 0);

  m.def(
      "backtest",
      [](py::array_t<double> x, const py::object& config, std::optional<std::pair<double, double>> arima) {
        const auto c = backtest_config_from_json(to_json(config));
        const auto v = as_vector(x);
        BacktestReport r;
        {
          py::gil_scoped_release release;
          r = arima ? rolling_forecast_arima(v, c, ArimaCoeffs{arima->first, arima->second})
                    : rolling_forecast(v, c);
        }
        return from_json(backtest_to_json(r));
      },
      py::arg("x"), py::arg("config"), py::arg("arima") = py::none(),
      "Rolling forecasts; arima=(phi1, theta1) filters through ARIMA(1,1,1) residuals.");

  m.def(
      "neg_log_returns", [](py::array_t<double> prices) { return as_array(neg_log_returns(as_vector(prices))); },
      py::arg("prices"));
}
