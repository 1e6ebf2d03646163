#include "tailrisk/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tailrisk/config.hpp"
#include "tailrisk/parallel.hpp"

namespace tailrisk {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double estimate_ratio(QuantileMethod method, const TailSample& sample, double p, double xi,
                      double x_true) {
  try {
    switch (method) {
      case QuantileMethod::unbiased:
        return quantile_unbiased(sample, p, xi).x_hat / x_true;
      case QuantileMethod::weissman:
        return quantile_weissman(sample, p).x_hat / x_true;
      case QuantileMethod::dhmz: {
        const auto q = quantile_dhmz(sample, p, xi);
        if (q.status != QuantileStatus::ok) return kNaN;
        return q.x_hat / x_true;
      }
    }
  } catch (const std::domain_error&) {
  } catch (const std::invalid_argument&) {
  }
  return kNaN;
}

}  // namespace

std::vector<std::size_t> default_k_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 20; k <= 600 && k < n; k += 20) grid.push_back(k);
  return grid;
}

void StudyConfig::validate() const {
  tailrisk::validate(spec);
  if (n < 3) throw std::invalid_argument("series length n must be at least 3");
  if (replications < 1) throw std::invalid_argument("replication count must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (!(x_p_true > 0.0)) throw std::invalid_argument("x_p_true must be positive");
  if (k_grid.empty()) throw std::invalid_argument("k grid is empty");
  if (estimators.empty()) throw std::invalid_argument("no estimators requested");
  for (std::size_t j = 0; j < k_grid.size(); ++j) {
    if (k_grid[j] < 1) throw std::invalid_argument("k grid values must be positive");
    if (j > 0 && k_grid[j] <= k_grid[j - 1]) {
      throw std::invalid_argument("k grid must be strictly increasing");
    }
  }
  if (k_grid.back() >= n) throw std::invalid_argument("k grid maximum must be below n");
  if (!(canonical_xi < 0.0)) throw std::invalid_argument("canonical xi must be negative");
}

const StudyCell& StudyResult::cell(QuantileMethod estimator, std::size_t k) const {
  for (const auto& c : cells) {
    if (c.estimator == estimator && c.k == k) return c;
  }
  throw std::out_of_range("no study cell for " + to_string(estimator) + " at k = " +
                          std::to_string(k));
}

ReplicationRatios run_replication(const StudyConfig& config, std::size_t index) {
  auto stream = SeededStream(config.seed).derive(index);
  const auto series = generate(config.spec, config.n, stream);
  const OrderStatistics stats(series);
  const auto xi = resolve_xi(stats, config.canonical_xi);

  const std::size_t nk = config.k_grid.size();
  ReplicationRatios out;
  out.xi_fallback = xi.fallback;
  out.ratios.assign(config.estimators.size() * nk, kNaN);
  for (std::size_t j = 0; j < nk; ++j) {
    std::optional<TailSample> sample;
    try {
      sample.emplace(stats, config.k_grid[j]);
    } catch (const std::domain_error&) {
      continue;  // threshold not positive: every estimator fails here
    }
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      out.ratios[e * nk + j] =
          estimate_ratio(config.estimators[e], *sample, config.p, xi.xi, config.x_p_true);
    }
  }
  return out;
}

StudyResult aggregate_study(const StudyConfig& config,
                            const std::vector<ReplicationRatios>& reps) {
  StudyResult result;
  result.model_name = config.model_name;
  result.replications = reps.size();
  for (const auto& r : reps) result.xi_fallbacks += r.xi_fallback ? 1 : 0;

  const std::size_t nk = config.k_grid.size();
  std::vector<double> dev;
  std::vector<double> sq;
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    for (std::size_t j = 0; j < nk; ++j) {
      dev.clear();
      sq.clear();
      StudyCell cell;
      cell.estimator = config.estimators[e];
      cell.k = config.k_grid[j];
      for (const auto& r : reps) {
        const double ratio = r.ratios[e * nk + j];
        if (std::isfinite(ratio)) {
          dev.push_back(ratio - 1.0);
          sq.push_back((ratio - 1.0) * (ratio - 1.0));
        } else {
          ++cell.n_failed;
        }
      }
      cell.n_used = dev.size();
      if (cell.n_used == 0) {
        cell.abias = cell.rmse = kNaN;
      } else {
        const double m = static_cast<double>(cell.n_used);
        cell.abias = std::abs(pairwise_sum(dev) / m);
        cell.rmse = std::sqrt(pairwise_sum(sq) / m);
        // Both are computed independently; clamp the last-ulp disagreement
        // that rounding can produce when every deviation is equal.
        cell.rmse = std::max(cell.rmse, cell.abias);
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

StudyResult run_study(const StudyConfig& config, unsigned threads,
                      std::optional<std::chrono::steady_clock::time_point> deadline) {
  config.validate();
  std::vector<ReplicationRatios> reps(config.replications);
  parallel_for(config.replications, threads, [&](std::size_t i) {
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      throw StudyDeadlineExceeded("study exceeded its wall-clock budget at replication " +
                                  std::to_string(i));
    }
    reps[i] = run_replication(config, i);
  });
  return aggregate_study(config, reps);
}

QuantileMethod parse_quantile_method(const std::string& name) {
  if (name == "unbiased") return QuantileMethod::unbiased;
  if (name == "weissman") return QuantileMethod::weissman;
  if (name == "dhmz") return QuantileMethod::dhmz;
  throw std::invalid_argument("unknown quantile estimator '" + name +
                              "' (expected unbiased, weissman or dhmz)");
}

StudyConfig study_config_from_json(const nlohmann::json& cfg) {
  reject_unknown_keys(cfg, {"kind", "theta", "alpha0", "alpha", "beta", "innovation", "q", "nu",
                            "burn_in", "seed", "name", "reference_model", "n", "replications",
                            "p", "k_grid", "estimators", "x_p_true", "canonical_xi"});
  StudyConfig c;
  if (auto ref = get_count(cfg, "reference_model")) {
    if (cfg.contains("kind")) {
      throw ConfigError("reference_model", "give either reference_model or kind, not both");
    }
    ReferenceModel m;
    try {
      m = reference_model(static_cast<int>(*ref));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("reference_model", e.what());
    }
    c.spec = m.spec;
    c.n = m.n;
    c.p = m.p;
    c.x_p_true = m.x_p_true;
    c.model_name = "model" + std::to_string(m.id);
    if (auto b = get_count(cfg, "burn_in")) c.spec.burn_in = static_cast<std::size_t>(*b);
  } else {
    c.spec = model_from_config(cfg);
    c.model_name = to_string(c.spec.kind);
  }
  if (auto v = get_string(cfg, "name")) c.model_name = *v;
  if (auto v = get_count(cfg, "n")) c.n = static_cast<std::size_t>(*v);
  if (auto v = get_count(cfg, "replications")) c.replications = static_cast<std::size_t>(*v);
  if (auto v = get_double(cfg, "p")) c.p = *v;
  if (auto v = get_double(cfg, "x_p_true")) c.x_p_true = *v;
  if (auto v = get_count(cfg, "seed")) c.seed = *v;
  if (auto v = get_double(cfg, "canonical_xi")) c.canonical_xi = *v;
  if (auto v = get_count_list(cfg, "k_grid")) {
    c.k_grid.assign(v->begin(), v->end());
  } else {
    c.k_grid = default_k_grid(c.n);
  }
  if (auto v = get_string_list(cfg, "estimators")) {
    c.estimators.clear();
    for (const auto& name : *v) {
      try {
        c.estimators.push_back(parse_quantile_method(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("estimators", e.what());
      }
    }
  }
  if (!(c.x_p_true > 0.0)) throw ConfigError("x_p_true", "required and must be positive");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

nlohmann::json study_config_to_json(const StudyConfig& config) {
  nlohmann::json j = model_to_json(config.spec);
  j["name"] = config.model_name;
  j["n"] = config.n;
  j["replications"] = config.replications;
  j["p"] = config.p;
  j["k_grid"] = config.k_grid;
  std::vector<std::string> est;
  for (auto e : config.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  j["x_p_true"] = config.x_p_true;
  j["seed"] = config.seed;
  j["canonical_xi"] = config.canonical_xi;
  return j;
}

std::string study_to_csv(const StudyResult& result) {
  std::ostringstream os;
  os << "model,estimator,k,abias,rmse,n_failed\n";
  for (const auto& c : result.cells) {
    os << result.model_name << ',' << to_string(c.estimator) << ',' << c.k << ',';
    if (c.missing()) {
      os << ",,";
    } else {
      os << format_double(c.abias) << ',' << format_double(c.rmse) << ',';
    }
    os << c.n_failed << '\n';
  }
  return os.str();
}

nlohmann::json study_to_json(const StudyResult& result) {
  nlohmann::json j;
  j["model"] = result.model_name;
  j["replications"] = result.replications;
  j["xi_fallbacks"] = result.xi_fallbacks;
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json cell;
    cell["estimator"] = to_string(c.estimator);
    cell["k"] = c.k;
    cell["abias"] = c.missing() ? nlohmann::json(nullptr) : nlohmann::json(c.abias);
    cell["rmse"] = c.missing() ? nlohmann::json(nullptr) : nlohmann::json(c.rmse);
    cell["n_failed"] = c.n_failed;
    cells.push_back(cell);
  }
  return j;
}

}  // namespace tailrisk
