#include "tailrisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/random/student_t_distribution.hpp>

#include "tailrisk/config.hpp"
#include "tailrisk/parallel.hpp"

namespace tailrisk {
namespace {

class InnovationSampler {
 public:
  explicit InnovationSampler(const InnovationLaw& law)
      : law_(law),
        student_(law.family == InnovationLaw::Family::student_t ? law.nu : 3.0),
        scale_(law.family == InnovationLaw::Family::student_t
                   ? std::sqrt((law.nu - 2.0) / law.nu)
                   : 1.0) {}

  double operator()(SeededStream& stream) {
    if (law_.family == InnovationLaw::Family::frechet_mixture) {
      return frechet_mixture_quantile(stream.uniform_open(), law_.q);
    }
    return scale_ * student_(stream.engine());
  }

 private:
  InnovationLaw law_;
  boost::random::student_t_distribution<double> student_;
  double scale_;
};

void validate_law(const InnovationLaw& law) {
  if (law.family == InnovationLaw::Family::frechet_mixture) {
    if (!(law.q > 0.0 && law.q < 1.0)) {
      throw std::invalid_argument("innovation q must lie in (0, 1)");
    }
  } else if (!(law.nu > 2.0) || !std::isfinite(law.nu)) {
    throw std::invalid_argument("standardized Student t needs nu > 2");
  }
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

double frechet_mixture_quantile(double u, double q) {
  if (u > 1.0 - q) return -1.0 / std::log((u - 1.0 + q) / q);
  return 1.0 / std::log1p(-u / (1.0 - q));
}

double sample_innovation(const InnovationLaw& law, SeededStream& stream) {
  validate_law(law);
  InnovationSampler sampler(law);
  return sampler(stream);
}

ModelSpec ModelSpec::iid(InnovationLaw law) {
  ModelSpec s;
  s.kind = Kind::iid;
  s.innovation = law;
  return s;
}

ModelSpec ModelSpec::ar1(double theta, InnovationLaw law) {
  ModelSpec s;
  s.kind = Kind::ar1;
  s.theta = theta;
  s.innovation = law;
  return s;
}

ModelSpec ModelSpec::ma1(double theta, InnovationLaw law) {
  ModelSpec s;
  s.kind = Kind::ma1;
  s.theta = theta;
  s.innovation = law;
  return s;
}

ModelSpec ModelSpec::garch(double alpha0, std::vector<double> alpha, std::vector<double> beta,
                           InnovationLaw law) {
  ModelSpec s;
  s.kind = Kind::garch;
  s.alpha0 = alpha0;
  s.alpha = std::move(alpha);
  s.beta = std::move(beta);
  s.innovation = law;
  return s;
}

std::size_t ModelSpec::effective_burn_in() const {
  if (burn_in) return *burn_in;
  return (kind == Kind::ar1 || kind == Kind::garch) ? kDefaultBurnIn : 0;
}

double ModelSpec::persistence() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0) +
         std::accumulate(beta.begin(), beta.end(), 0.0);
}

std::string to_string(ModelSpec::Kind kind) {
  switch (kind) {
    case ModelSpec::Kind::iid: return "iid";
    case ModelSpec::Kind::ar1: return "ar1";
    case ModelSpec::Kind::ma1: return "ma1";
    case ModelSpec::Kind::garch: return "garch";
  }
  return "?";
}

std::vector<std::string> validate(const ModelSpec& spec) {
  validate_law(spec.innovation);
  std::vector<std::string> warnings;
  switch (spec.kind) {
    case ModelSpec::Kind::iid:
      break;
    case ModelSpec::Kind::ar1:
    case ModelSpec::Kind::ma1:
      if (!(spec.theta > 0.0 && spec.theta < 1.0)) {
        throw std::invalid_argument("theta must lie in (0, 1)");
      }
      break;
    case ModelSpec::Kind::garch: {
      if (!(spec.alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
      if (spec.alpha.empty()) throw std::invalid_argument("garch needs at least one alpha");
      for (double a : spec.alpha) {
        if (!(a > 0.0)) throw std::invalid_argument("alpha coefficients must be positive");
      }
      for (double b : spec.beta) {
        if (!(b > 0.0)) throw std::invalid_argument("beta coefficients must be positive");
      }
      if (spec.persistence() >= 1.0) {
        warnings.push_back("sum(alpha) + sum(beta) = " + format_double(spec.persistence()) +
                           " >= 1: not covariance stationary");
      }
      break;
    }
  }
  return warnings;
}

std::vector<double> generate_with(const ModelSpec& spec, std::size_t n,
                                  const InnovationSource& next) {
  validate(spec);
  const std::size_t burn = spec.effective_burn_in();
  std::vector<double> out;
  out.reserve(n);

  switch (spec.kind) {
    case ModelSpec::Kind::iid:
      for (std::size_t t = 0; t < burn; ++t) next();
      for (std::size_t t = 0; t < n; ++t) out.push_back(next());
      break;

    case ModelSpec::Kind::ar1: {
      double x = 0.0;
      for (std::size_t t = 0; t < burn + n; ++t) {
        x = spec.theta * x + next();
        if (t >= burn) out.push_back(x);
      }
      break;
    }

    case ModelSpec::Kind::ma1: {
      double prev = next();
      for (std::size_t t = 0; t < burn + n; ++t) {
        const double eps = next();
        if (t >= burn) out.push_back(spec.theta * prev + eps);
        prev = eps;
      }
      break;
    }

    case ModelSpec::Kind::garch: {
      const double pers = spec.persistence();
      const double var0 = pers < 1.0 ? spec.alpha0 / (1.0 - pers) : spec.alpha0;
      // x2[j] = X^2_{t-1-j}, s2[j] = sigma^2_{t-1-j}
      std::vector<double> x2(spec.alpha.size(), var0);
      std::vector<double> s2(spec.beta.size(), var0);
      for (std::size_t t = 0; t < burn + n; ++t) {
        double var = spec.alpha0;
        for (std::size_t j = 0; j < x2.size(); ++j) var += spec.alpha[j] * x2[j];
        for (std::size_t j = 0; j < s2.size(); ++j) var += spec.beta[j] * s2[j];
        const double x = std::sqrt(var) * next();
        if (!x2.empty()) {
          std::rotate(x2.rbegin(), x2.rbegin() + 1, x2.rend());
          x2[0] = x * x;
        }
        if (!s2.empty()) {
          std::rotate(s2.rbegin(), s2.rbegin() + 1, s2.rend());
          s2[0] = var;
        }
        if (t >= burn) out.push_back(x);
      }
      break;
    }
  }
  return out;
}

std::vector<double> generate(const ModelSpec& spec, std::size_t n, SeededStream& stream) {
  validate_law(spec.innovation);
  InnovationSampler sampler(spec.innovation);
  return generate_with(spec, n, [&] { return sampler(stream); });
}

std::vector<double> generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  SeededStream stream(seed);
  return generate(spec, n, stream);
}

double empirical_upper_quantile(std::vector<double>& values, double p) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("p must lie in (0, 1)");
  const auto n = values.size();
  const auto j = static_cast<std::size_t>(std::floor(static_cast<double>(n) * p + 1e-9));
  if (j >= n) throw std::domain_error("p too large for the sample size");
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(n - 1 - j);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

QuantileMC replicate_quantile(const std::function<std::vector<double>(std::size_t)>& replicate,
                              double p, std::size_t n_samples, unsigned threads) {
  if (n_samples == 0) throw std::invalid_argument("need at least one replicate");
  std::vector<double> q(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    auto series = replicate(i);
    q[i] = empirical_upper_quantile(series, p);
  });
  QuantileMC out;
  const double nd = static_cast<double>(n_samples);
  out.estimate = pairwise_sum(q) / nd;
  if (n_samples > 1) {
    std::vector<double> sq(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      sq[i] = (q[i] - out.estimate) * (q[i] - out.estimate);
    }
    out.std_error = std::sqrt(pairwise_sum(sq) / (nd - 1.0) / nd);
  } else {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

QuantileMC true_quantile_mc(const ModelSpec& spec, double p, std::size_t n_samples,
                            std::size_t sample_size, const SeededStream& stream,
                            unsigned threads, double budget) {
  validate(spec);
  if (static_cast<double>(n_samples) * static_cast<double>(sample_size) > budget) {
    throw std::length_error("Monte Carlo request of " + std::to_string(n_samples) + " x " +
                            std::to_string(sample_size) + " draws exceeds the budget");
  }
  return replicate_quantile(
      [&](std::size_t i) {
        auto s = stream.derive(i);
        return generate(spec, sample_size, s);
      },
      p, n_samples, threads);
}

ModelSpec model_from_config(const nlohmann::json& cfg) {
  ModelSpec spec;
  const auto kind = get_string(cfg, "kind").value_or("iid");
  if (kind == "iid") {
    spec.kind = ModelSpec::Kind::iid;
  } else if (kind == "ar1") {
    spec.kind = ModelSpec::Kind::ar1;
  } else if (kind == "ma1") {
    spec.kind = ModelSpec::Kind::ma1;
  } else if (kind == "garch") {
    spec.kind = ModelSpec::Kind::garch;
  } else {
    throw ConfigError("kind", "expected iid, ar1, ma1 or garch, got '" + kind + "'");
  }

  const auto innov = get_string(cfg, "innovation")
                         .value_or(spec.kind == ModelSpec::Kind::garch ? "student_t"
                                                                       : "frechet_mixture");
  if (innov == "frechet_mixture") {
    spec.innovation = InnovationLaw::frechet_mixture(get_double(cfg, "q").value_or(0.75));
    if (!(spec.innovation.q > 0.0 && spec.innovation.q < 1.0)) {
      throw ConfigError("q", "must lie in (0, 1)");
    }
  } else if (innov == "student_t") {
    const auto nu = get_double(cfg, "nu");
    if (!nu) throw ConfigError("nu", "required for student_t innovations");
    if (!(*nu > 2.0)) throw ConfigError("nu", "must exceed 2");
    spec.innovation = InnovationLaw::student_t(*nu);
  } else {
    throw ConfigError("innovation",
                      "expected frechet_mixture or student_t, got '" + innov + "'");
  }

  if (spec.kind == ModelSpec::Kind::ar1 || spec.kind == ModelSpec::Kind::ma1) {
    const auto theta = get_double(cfg, "theta");
    if (!theta) throw ConfigError("theta", "required for " + kind);
    if (!(*theta > 0.0 && *theta < 1.0)) throw ConfigError("theta", "must lie in (0, 1)");
    spec.theta = *theta;
  }
  if (spec.kind == ModelSpec::Kind::garch) {
    const auto a0 = get_double(cfg, "alpha0");
    if (!a0) throw ConfigError("alpha0", "required for garch");
    if (!(*a0 > 0.0)) throw ConfigError("alpha0", "must be positive");
    spec.alpha0 = *a0;
    spec.alpha = get_double_list(cfg, "alpha").value_or(std::vector<double>{});
    spec.beta = get_double_list(cfg, "beta").value_or(std::vector<double>{});
    if (spec.alpha.empty()) throw ConfigError("alpha", "garch needs at least one alpha");
    for (double a : spec.alpha) {
      if (!(a > 0.0)) throw ConfigError("alpha", "coefficients must be positive");
    }
    for (double b : spec.beta) {
      if (!(b > 0.0)) throw ConfigError("beta", "coefficients must be positive");
    }
  }
  if (auto b = get_count(cfg, "burn_in")) spec.burn_in = static_cast<std::size_t>(*b);
  return spec;
}

nlohmann::json model_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  if (spec.kind == ModelSpec::Kind::ar1 || spec.kind == ModelSpec::Kind::ma1) {
    j["theta"] = spec.theta;
  }
  if (spec.kind == ModelSpec::Kind::garch) {
    j["alpha0"] = spec.alpha0;
    j["alpha"] = spec.alpha;
    j["beta"] = spec.beta;
  }
  if (spec.innovation.family == InnovationLaw::Family::frechet_mixture) {
    j["innovation"] = "frechet_mixture";
    j["q"] = spec.innovation.q;
  } else {
    j["innovation"] = "student_t";
    j["nu"] = spec.innovation.nu;
  }
  j["burn_in"] = spec.effective_burn_in();
  return j;
}

std::string model_to_key_value(const ModelSpec& spec) {
  std::ostringstream os;
  os << "kind = " << to_string(spec.kind) << "\n";
  if (spec.kind == ModelSpec::Kind::ar1 || spec.kind == ModelSpec::Kind::ma1) {
    os << "theta = " << format_double(spec.theta) << "\n";
  }
  if (spec.kind == ModelSpec::Kind::garch) {
    os << "alpha0 = " << format_double(spec.alpha0) << "\n";
    os << "alpha = " << join(spec.alpha) << "\n";
    if (!spec.beta.empty()) os << "beta = " << join(spec.beta) << "\n";
  }
  if (spec.innovation.family == InnovationLaw::Family::frechet_mixture) {
    os << "innovation = frechet_mixture\nq = " << format_double(spec.innovation.q) << "\n";
  } else {
    os << "innovation = student_t\nnu = " << format_double(spec.innovation.nu) << "\n";
  }
  os << "burn_in = " << spec.effective_burn_in() << "\n";
  return os.str();
}

ReferenceModel reference_model(int id) {
  ReferenceModel m;
  m.id = id;
  const auto frechet = InnovationLaw::frechet_mixture(0.75);
  switch (id) {
    case 1:
      m.spec = ModelSpec::iid(frechet);
      m.x_p_true = 749.80;
      break;
    case 2:
      m.spec = ModelSpec::ar1(0.3, frechet);
      m.x_p_true = 1072.26;
      break;
    case 3:
      m.spec = ModelSpec::ma1(0.3, frechet);
      m.x_p_true = 972.85;
      break;
    case 4:
      m.spec = ModelSpec::garch(4.49e-6, {0.195}, {0.746}, InnovationLaw::student_t(5.99));
      m.x_p_true = 0.049;
      break;
    case 5:
      m.spec = ModelSpec::garch(0.0443, {0.202}, {0.213, 0.467}, InnovationLaw::student_t(5.66));
      m.x_p_true = 3.103;
      m.n = 4000;
      break;
    default:
      throw std::invalid_argument("reference models are numbered 1..5, got " +
                                  std::to_string(id));
  }
  return m;
}

}  // namespace tailrisk
