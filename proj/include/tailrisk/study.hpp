#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailrisk/estimators.hpp"
#include "tailrisk/simulate.hpp"

namespace tailrisk {

struct StudyConfig {
  std::string model_name = "model";
  ModelSpec spec;
  std::size_t n = 1000;
  std::size_t replications = 100;
  double p = 0.001;
  std::vector<std::size_t> k_grid;
  std::vector<QuantileMethod> estimators = {QuantileMethod::unbiased, QuantileMethod::weissman,
                                            QuantileMethod::dhmz};
  double x_p_true = 0.0;
  std::uint64_t seed = 1;
  /// xi used when no valid rho-hat exists for a replication.
  double canonical_xi = kCanonicalXi;

  /// Throws std::invalid_argument on an inconsistent config.
  void validate() const;
};

/// k = 20, 40, ..., 600 clipped below n.
std::vector<std::size_t> default_k_grid(std::size_t n);

struct StudyCell {
  QuantileMethod estimator = QuantileMethod::unbiased;
  std::size_t k = 0;
  /// |mean(x/x_p) - 1|; NaN when every replication failed.
  double abias = 0.0;
  /// sqrt(mean((x/x_p - 1)^2)); NaN when every replication failed.
  double rmse = 0.0;
  std::size_t n_failed = 0;
  std::size_t n_used = 0;

  bool missing() const { return n_used == 0; }
};

struct StudyResult {
  std::string model_name;
  std::size_t replications = 0;
  /// Replications whose xi fell back to the canonical value.
  std::size_t xi_fallbacks = 0;
  std::vector<StudyCell> cells;

  const StudyCell& cell(QuantileMethod estimator, std::size_t k) const;
};

/// Per-replication estimate of x_p divided by the truth; NaN marks a
/// replication where the estimator failed or was flagged.
struct ReplicationRatios {
  bool xi_fallback = true;
  /// ratios[e * k_grid.size() + j] for estimator e at k_grid[j]
  std::vector<double> ratios;
};

ReplicationRatios run_replication(const StudyConfig& config, std::size_t index);

class StudyDeadlineExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo ABias/RMSE of the configured quantile estimators. Results
/// are independent of `threads`. When `deadline` passes before every
/// replication finishes, throws StudyDeadlineExceeded.
StudyResult run_study(const StudyConfig& config, unsigned threads = 1,
                      std::optional<std::chrono::steady_clock::time_point> deadline = {});

/// Aggregates ratio vectors in replication order.
StudyResult aggregate_study(const StudyConfig& config,
                            const std::vector<ReplicationRatios>& reps);

StudyConfig study_config_from_json(const nlohmann::json& cfg);
nlohmann::json study_config_to_json(const StudyConfig& config);

/// Columns: model, estimator, k, abias, rmse, n_failed.
std::string study_to_csv(const StudyResult& result);
nlohmann::json study_to_json(const StudyResult& result);

QuantileMethod parse_quantile_method(const std::string& name);

}  // namespace tailrisk
