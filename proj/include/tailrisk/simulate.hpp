#pragma once

#include <array>
#include <string_view>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailrisk/random.hpp"

namespace tailrisk {

/// Innovation distribution of the simulation models.
///
/// frechet_mixture(q): positive part with probability q follows the unit
/// Frechet law exp(-1/x), negative part mirrors it with weight 1-q; the
/// upper tail is q/x.  student_t(nu): Student t scaled by sqrt((nu-2)/nu)
/// to unit variance.
struct InnovationLaw {
  enum class Family { frechet_mixture, student_t };
  Family family = Family::frechet_mixture;
  double q = 0.75;
  double nu = 5.0;

  static InnovationLaw frechet_mixture(double q) { return {Family::frechet_mixture, q, 5.0}; }
  static InnovationLaw student_t(double nu) { return {Family::student_t, 0.75, nu}; }
};

/// Inverse CDF of the Frechet mixture at u in (0,1). u = 1-q belongs to the
/// negative branch.
double frechet_mixture_quantile(double u, double q);

double sample_innovation(const InnovationLaw& law, SeededStream& stream);

struct ModelSpec {
  enum class Kind { iid, ar1, ma1, garch };
  Kind kind = Kind::iid;
  double theta = 0.0;
  double alpha0 = 0.0;
  std::vector<double> alpha;
  std::vector<double> beta;
  InnovationLaw innovation;
  /// Discarded warm-up steps. Unset means the per-kind default.
  std::optional<std::size_t> burn_in;

  static ModelSpec iid(InnovationLaw law);
  static ModelSpec ar1(double theta, InnovationLaw law);
  static ModelSpec ma1(double theta, InnovationLaw law);
  static ModelSpec garch(double alpha0, std::vector<double> alpha, std::vector<double> beta,
                         InnovationLaw law);

  std::size_t effective_burn_in() const;
  /// sum(alpha) + sum(beta), the GARCH persistence.
  double persistence() const;
};

std::string to_string(ModelSpec::Kind kind);

inline constexpr std::size_t kDefaultBurnIn = 1000;

/// Throws std::invalid_argument for illegal parameters. Returns warnings
/// for legal but questionable ones (non-stationary GARCH).
std::vector<std::string> validate(const ModelSpec& spec);

using InnovationSource = std::function<double()>;

/// Runs the model recursion on innovations drawn from `next`.
std::vector<double> generate_with(const ModelSpec& spec, std::size_t n,
                                  const InnovationSource& next);
std::vector<double> generate(const ModelSpec& spec, std::size_t n, SeededStream& stream);
std::vector<double> generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

/// Empirical (1-p)-quantile X_{n-j,n} with j = floor(np): the (j+1)-th
/// largest value. Reorders `values`.
double empirical_upper_quantile(std::vector<double>& values, double p);

struct QuantileMC {
  double estimate = 0.0;
  double std_error = 0.0;
};

inline constexpr double kDefaultMCBudget = 5e9;

/// Mean over n_samples independent series of length sample_size of the
/// empirical (1-p)-quantile, with its standard error. Replicate i uses
/// stream.derive(i). Throws std::length_error when
/// n_samples * sample_size exceeds `budget`.
QuantileMC true_quantile_mc(const ModelSpec& spec, double p, std::size_t n_samples,
                            std::size_t sample_size, const SeededStream& stream,
                            unsigned threads = 1, double budget = kDefaultMCBudget);

/// Same estimator over an arbitrary replicate generator.
QuantileMC replicate_quantile(const std::function<std::vector<double>(std::size_t)>& replicate,
                              double p, std::size_t n_samples, unsigned threads = 1);

// Serialization --------------------------------------------------------------

/// Reads kind, theta, alpha0, alpha, beta, innovation, q, nu, burn_in from a
/// config object (seed is read by the caller). Unknown keys are left for
/// the caller to police.
ModelSpec model_from_config(const nlohmann::json& cfg);
nlohmann::json model_to_json(const ModelSpec& spec);
std::string model_to_key_value(const ModelSpec& spec);

/// Keys understood by model_from_config.
inline constexpr std::array<std::string_view, 10> kModelKeys = {
    "kind", "theta", "alpha0", "alpha", "beta", "innovation", "q", "nu", "burn_in", "seed"};

/// The five reference models of the simulation study with their published
/// x_{0.001} and series lengths.
struct ReferenceModel {
  int id = 1;
  ModelSpec spec;
  double x_p_true = 0.0;
  double p = 0.001;
  std::size_t n = 1000;
};

ReferenceModel reference_model(int id);

}  // namespace tailrisk
