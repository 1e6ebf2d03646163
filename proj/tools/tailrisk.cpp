// tailrisk: command-line front end.
//
//   tailrisk simulate  --model m.cfg --n 1000 --seed 7 --output x.csv
//   tailrisk estimate  --input x.csv --k-grid 20:400:20 --method unbiased,dhmz --p 0.001
//   tailrisk mcstudy   --config study.json --output fig1.csv
//   tailrisk backtest  --input prices.csv --neg-log-returns --output bt.csv
//
// Every file output is accompanied by <output>.manifest.json. Passing a
// manifest back through --config reruns the same computation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "tailrisk/backtest.hpp"
#include "tailrisk/config.hpp"
#include "tailrisk/estimators.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/simulate.hpp"
#include "tailrisk/study.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tailrisk;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kParse = 3, kDomain = 4, kIO = 5, kBudget = 6 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = default_thread_count();
  std::string output = "-";
  std::string format = "csv";
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--output,-o", c.output, "Output file, '-' for stdout");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--config", c.config, "Config file (key = value or JSON) or a manifest");
}

/// Loads --config; a manifest written by an earlier run yields its resolved
/// config, provided it belongs to the same subcommand.
json load_config(const Common& c, const std::string& subcommand, json* manifest_inputs) {
  if (c.config.empty()) return json::object();
  json cfg = load_config_file(c.config);
  if (cfg.contains("subcommand") && cfg.contains("config")) {
    if (cfg["subcommand"] != subcommand) {
      throw UsageError("manifest " + c.config + " was written by '" +
                       cfg["subcommand"].get<std::string>() + "', not '" + subcommand + "'");
    }
    if (manifest_inputs && cfg.contains("inputs")) *manifest_inputs = cfg["inputs"];
    return cfg["config"];
  }
  return cfg;
}

void take_cli_keys(json& cfg, json& into, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (cfg.contains(k)) {
      into[k] = cfg[k];
      cfg.erase(k);
    }
  }
}

void emit(const Common& c, const std::string& subcommand, const json& resolved,
          std::optional<std::uint64_t> seed, const std::vector<fs::path>& inputs,
          const std::string& body) {
  if (c.output == "-") {
    std::cout << body;
    std::cout.flush();
    return;
  }
  const fs::path out(c.output);
  write_text_file(out, body);

  json m;
  m["subcommand"] = subcommand;
  m["version"] = TAILRISK_VERSION;
  m["config"] = resolved;
  m["seed"] = seed ? json(*seed) : json(nullptr);
  m["format"] = c.format;
  m["rng"] = SeededStream::algorithm;
  auto arr = json::array();
  for (const auto& p : inputs) {
    arr.push_back({{"path", fs::absolute(p).string()}, {"sha256", sha256_file(p)}});
  }
  m["inputs"] = arr;
  m["output"] = {{"path", fs::absolute(out).string()}, {"sha256", sha256_file(out)}};
  write_text_file(fs::path(c.output + ".manifest.json"), m.dump(2) + "\n");
}

std::string json_body(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> read_input_values(const fs::path& path, bool neg_log) {
  SeriesData d;
  try {
    d = read_series_csv(path);
  } catch (const std::ios_base::failure&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!neg_log) return d.values;
  return neg_log_returns(d.values);
}

std::string resolve_input(const std::string& flag, const json& manifest_inputs) {
  if (!flag.empty()) return flag;
  if (manifest_inputs.is_array() && !manifest_inputs.empty()) {
    return manifest_inputs[0]["path"].get<std::string>();
  }
  throw UsageError("--input is required");
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string model;
  std::optional<int> reference;
  std::optional<std::size_t> n;
  std::optional<std::size_t> burn_in;
};

int run_simulate(const SimulateArgs& a) {
  json cfg = load_config(a.common, "simulate", nullptr);
  if (!a.model.empty()) {
    if (!cfg.empty()) throw UsageError("give either --model or --config, not both");
    cfg = load_config_file(a.model);
  }
  if (a.reference) {
    if (!cfg.empty()) throw UsageError("--reference-model cannot be combined with a model file");
    cfg = model_to_json(reference_model(*a.reference).spec);
  }
  if (cfg.empty()) throw UsageError("a model is required: --model, --config or --reference-model");

  json extra;
  take_cli_keys(cfg, extra, {"n"});
  std::vector<std::string_view> allowed(kModelKeys.begin(), kModelKeys.end());
  reject_unknown_keys(cfg, allowed);
  auto spec = model_from_config(cfg);
  if (a.burn_in) spec.burn_in = *a.burn_in;

  std::uint64_t seed = 1;
  if (auto s = get_count(cfg, "seed")) seed = *s;
  if (a.common.seed) seed = *a.common.seed;
  std::size_t n = 1000;
  if (auto v = get_count(extra, "n")) n = static_cast<std::size_t>(*v);
  if (a.n) n = *a.n;
  if (n == 0) throw std::invalid_argument("n must be positive");

  for (const auto& w : validate(spec)) std::cerr << "warning: " << w << "\n";
  const auto x = generate(spec, n, seed);

  json resolved = model_to_json(spec);
  resolved["burn_in"] = spec.effective_burn_in();
  resolved["seed"] = seed;
  resolved["n"] = n;
  const std::string body = a.common.format == "json"
                               ? json_body(json{{"values", x}})
                               : series_to_csv(x);
  emit(a.common, "simulate", resolved, seed, {}, body);
  return kOk;
}

// estimate -------------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string input;
  std::vector<std::size_t> k_list;
  std::string k_grid;
  std::vector<std::string> methods;
  std::vector<double> p;
  std::string xi_policy;
  std::optional<double> xi;
  bool neg_log = false;
  bool bootstrap = false;
  std::optional<std::size_t> block_length;
  std::optional<std::size_t> n_boot;
  std::optional<double> level;
};

struct Row {
  std::size_t k;
  std::string method;
  std::optional<double> p;
  std::optional<double> gamma_hat;
  std::optional<double> x_hat;
  std::vector<std::string> flags;
  std::optional<std::pair<double, double>> ci;
};

struct EstimatePlan {
  std::vector<std::size_t> ks;
  std::vector<std::string> methods;
  std::vector<double> ps;
  bool from_rho_hat = true;
  double xi = kCanonicalXi;
};

std::vector<Row> estimate_rows(std::span<const double> x, const EstimatePlan& plan,
                               XiChoice* xi_out) {
  const OrderStatistics os(x);
  XiChoice choice;
  if (plan.from_rho_hat) {
    choice = resolve_xi(os, plan.xi);
  } else {
    choice.xi = plan.xi;
    choice.fallback = false;
  }
  if (xi_out) *xi_out = choice;

  std::vector<Row> rows;
  for (std::size_t k : plan.ks) {
    std::optional<TailSample> s;
    std::string sample_error;
    try {
      s.emplace(os, k);
    } catch (const std::domain_error&) {
      sample_error = "nonpositive_threshold";
    }
    for (const auto& m : plan.methods) {
      std::vector<std::optional<double>> ps(plan.ps.begin(), plan.ps.end());
      if (ps.empty()) ps.push_back(std::nullopt);
      for (const auto& p : ps) {
        Row r{k, m, p, {}, {}, {}, {}};
        if (plan.from_rho_hat && choice.fallback && m != "hill" && m != "weissman") {
          r.flags.push_back("xi_fallback");
        }
        if (!s) {
          r.flags.push_back(sample_error);
          rows.push_back(std::move(r));
          continue;
        }
        try {
          TailIndexEstimate g;
          if (m == "hill" || m == "weissman") {
            g = hill(*s);
          } else if (m == "unbiased") {
            g = gamma_optimal_unbiased(*s, choice.xi);
          } else {
            g = gamma_dhmz(*s, choice.xi);
          }
          r.gamma_hat = g.gamma_hat;
          if (!g.usable()) r.flags.push_back("gamma_unusable");
          if (p && m != "hill" && g.usable()) {
            QuantileEstimate q;
            if (m == "unbiased") {
              q = quantile_unbiased(*s, *p, choice.xi, g);
            } else if (m == "weissman") {
              q = quantile_weissman(*s, *p, g);
            } else {
              q = quantile_dhmz(*s, *p, choice.xi);
            }
            r.x_hat = q.x_hat;
            if (q.status == QuantileStatus::correction_overshoot) r.flags.push_back("overshoot");
          }
        } catch (const std::domain_error&) {
          r.flags.push_back("failed");
        }
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

double row_value(const Row& r) {
  const auto& v = r.p && r.method != "hill" ? r.x_hat : r.gamma_hat;
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::size_t> parse_k_grid(const std::string& text) {
  json tmp;
  tmp["k_grid"] = text;
  const auto v = get_count_list(tmp, "k_grid");
  return {v->begin(), v->end()};
}

int run_estimate(const EstimateArgs& a) {
  json manifest_inputs;
  json cfg = load_config(a.common, "estimate", &manifest_inputs);
  reject_unknown_keys(cfg, {"k_grid", "methods", "p", "xi_policy", "xi", "neg_log_returns",
                            "bootstrap", "block_length", "n_boot", "level", "seed"});

  EstimatePlan plan;
  if (auto v = get_count_list(cfg, "k_grid")) plan.ks.assign(v->begin(), v->end());
  if (!a.k_grid.empty()) plan.ks = parse_k_grid(a.k_grid);
  if (!a.k_list.empty()) plan.ks = a.k_list;
  if (plan.ks.empty()) throw UsageError("give --k or --k-grid");

  plan.methods = {"unbiased", "weissman", "dhmz"};
  if (auto v = get_string_list(cfg, "methods")) plan.methods = *v;
  if (!a.methods.empty()) plan.methods = a.methods;
  for (const auto& m : plan.methods) {
    if (m != "hill" && m != "unbiased" && m != "weissman" && m != "dhmz") {
      throw UsageError("unknown method '" + m + "' (hill, unbiased, weissman, dhmz)");
    }
  }
  if (auto v = get_double_list(cfg, "p")) plan.ps = *v;
  if (!a.p.empty()) plan.ps = a.p;
  for (double p : plan.ps) {
    if (!(p > 0 && p < 1)) throw std::domain_error("p must lie in (0, 1)");
  }

  std::string policy = "rho_hat";
  if (auto v = get_string(cfg, "xi_policy")) policy = *v;
  if (!a.xi_policy.empty()) policy = a.xi_policy;
  if (policy != "rho_hat" && policy != "canonical") {
    throw ConfigError("xi_policy", "expected rho_hat or canonical, got '" + policy + "'");
  }
  plan.from_rho_hat = policy == "rho_hat";
  if (auto v = get_double(cfg, "xi")) plan.xi = *v;
  if (a.xi) plan.xi = *a.xi;
  if (!(plan.xi < 0)) throw std::domain_error("xi must be negative");

  bool neg_log = a.neg_log;
  if (auto v = get_string(cfg, "neg_log_returns")) neg_log = neg_log || *v == "true" || *v == "1";
  if (cfg.contains("neg_log_returns") && cfg["neg_log_returns"].is_boolean()) {
    neg_log = neg_log || cfg["neg_log_returns"].get<bool>();
  }

  BootstrapOptions boot;
  bool use_boot = a.bootstrap;
  if (cfg.contains("bootstrap") && cfg["bootstrap"].is_boolean()) {
    use_boot = use_boot || cfg["bootstrap"].get<bool>();
  }
  if (auto v = get_count(cfg, "block_length")) boot.block_length = *v;
  if (auto v = get_count(cfg, "n_boot")) boot.n_boot = *v;
  if (auto v = get_double(cfg, "level")) boot.level = *v;
  if (auto v = get_count(cfg, "seed")) boot.seed = *v;
  if (a.block_length) boot.block_length = *a.block_length;
  if (a.n_boot) boot.n_boot = *a.n_boot;
  if (a.level) boot.level = *a.level;
  if (a.common.seed) boot.seed = *a.common.seed;
  boot.threads = a.common.threads;

  const fs::path input = resolve_input(a.input, manifest_inputs);
  const auto x = read_input_values(input, neg_log);
  if (x.size() < 3) throw std::domain_error("need at least 3 observations");
  const OrderStatistics os(x);
  if (os.positive_count() == 0) throw std::domain_error("series has no positive observations");
  for (std::size_t k : plan.ks) {
    if (k < 1 || k > x.size() - 1) {
      throw std::out_of_range("k = " + std::to_string(k) + " outside [1, n - 1] = [1, " +
                              std::to_string(x.size() - 1) + "]");
    }
  }

  XiChoice choice;
  auto rows = estimate_rows(x, plan, &choice);

  if (use_boot) {
    if (boot.block_length > x.size()) throw std::domain_error("block length exceeds series length");
    const auto cis = block_bootstrap_ci(
        x,
        [&](std::span<const double> v) {
          const auto rr = estimate_rows(v, plan, nullptr);
          std::vector<double> out;
          out.reserve(rr.size());
          for (const auto& r : rr) out.push_back(row_value(r));
          return out;
        },
        rows.size(), boot);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (cis[i].n_used > 0) rows[i].ci = std::pair{cis[i].lower, cis[i].upper};
    }
  }

  json resolved;
  resolved["k_grid"] = plan.ks;
  resolved["methods"] = plan.methods;
  resolved["p"] = plan.ps;
  resolved["xi_policy"] = policy;
  resolved["xi"] = plan.xi;
  resolved["neg_log_returns"] = neg_log;
  resolved["bootstrap"] = use_boot;
  if (use_boot) {
    resolved["block_length"] = boot.block_length;
    resolved["n_boot"] = boot.n_boot;
    resolved["level"] = boot.level;
    resolved["seed"] = boot.seed;
  }

  const std::optional<double> rho =
      choice.rho.valid ? std::optional<double>(choice.rho.rho_hat) : std::nullopt;
  const std::optional<std::size_t> k_rho =
      choice.rho.valid ? std::optional<std::size_t>(choice.rho.k_rho) : std::nullopt;

  std::string body;
  if (a.common.format == "json") {
    json j;
    j["n"] = x.size();
    j["rho_hat"] = rho ? json(*rho) : json(nullptr);
    j["k_rho"] = k_rho ? json(*k_rho) : json(nullptr);
    j["xi"] = choice.xi;
    auto arr = json::array();
    for (const auto& r : rows) {
      json o;
      o["k"] = r.k;
      o["method"] = r.method;
      o["p"] = r.p ? json(*r.p) : json(nullptr);
      o["gamma_hat"] = r.gamma_hat ? json(*r.gamma_hat) : json(nullptr);
      o["x_hat"] = r.x_hat ? json(*r.x_hat) : json(nullptr);
      o["flags"] = r.flags;
      if (use_boot) {
        o["ci_lower"] = r.ci ? json(r.ci->first) : json(nullptr);
        o["ci_upper"] = r.ci ? json(r.ci->second) : json(nullptr);
      }
      arr.push_back(o);
    }
    j["rows"] = arr;
    body = json_body(j);
  } else {
    std::ostringstream os_;
    os_ << "k,method,p,gamma_hat,x_hat,rho_hat,k_rho,flags";
    if (use_boot) os_ << ",ci_lower,ci_upper";
    os_ << '\n';
    for (const auto& r : rows) {
      std::string flags;
      for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
      os_ << r.k << ',' << r.method << ',' << opt(r.p) << ',' << opt(r.gamma_hat) << ','
          << opt(r.x_hat) << ',' << opt(rho) << ',' << (k_rho ? std::to_string(*k_rho) : "")
          << ',' << flags;
      if (use_boot) {
        os_ << ',' << (r.ci ? format_double(r.ci->first) : "") << ','
            << (r.ci ? format_double(r.ci->second) : "");
      }
      os_ << '\n';
    }
    body = os_.str();
  }
  emit(a.common, "estimate", resolved,
       use_boot ? std::optional<std::uint64_t>(boot.seed) : std::nullopt, {input}, body);
  return kOk;
}

// mcstudy --------------------------------------------------------------------

struct StudyArgs {
  Common common;
  std::optional<int> reference;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> n;
  std::optional<double> time_budget;
  std::optional<std::size_t> max_replications;
};

int run_mcstudy(const StudyArgs& a) {
  json cfg = load_config(a.common, "mcstudy", nullptr);
  if (a.reference) {
    if (cfg.contains("kind")) throw UsageError("--reference-model conflicts with the config's model");
    cfg["reference_model"] = *a.reference;
  }
  if (cfg.empty()) throw UsageError("give --config or --reference-model");
  if (a.replications) cfg["replications"] = *a.replications;
  if (a.n) cfg["n"] = *a.n;
  if (a.common.seed) cfg["seed"] = *a.common.seed;
  const bool explicit_grid = cfg.contains("k_grid");

  auto config = study_config_from_json(cfg);
  if (!explicit_grid && (a.n || cfg.contains("n"))) config.k_grid = default_k_grid(config.n);
  config.validate();
  if (a.max_replications && config.replications > *a.max_replications) {
    throw BudgetError("replications = " + std::to_string(config.replications) +
                      " exceeds the budget of " + std::to_string(*a.max_replications));
  }

  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (a.time_budget) {
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(*a.time_budget));
  }
  StudyResult result;
  try {
    result = run_study(config, a.common.threads, deadline);
  } catch (const StudyDeadlineExceeded& e) {
    throw BudgetError(e.what());
  }
  if (result.xi_fallbacks > 0) {
    std::cerr << "note: " << result.xi_fallbacks << " of " << result.replications
              << " replications used the canonical xi\n";
  }
  const std::string body =
      a.common.format == "json" ? json_body(study_to_json(result)) : study_to_csv(result);
  emit(a.common, "mcstudy", study_config_to_json(config), config.seed, {}, body);
  return kOk;
}

// backtest -------------------------------------------------------------------

struct BacktestArgs {
  Common common;
  std::string input;
  std::optional<std::size_t> window, horizon, k;
  std::optional<double> p, xi;
  std::string method, xi_policy, arima, counts;
  bool neg_log = false;
  bool bootstrap = false;
  std::optional<std::size_t> block_length, n_boot;
  std::optional<double> level;
};

ArimaCoeffs parse_arima(const std::string& text) {
  ArimaCoeffs c;
  bool phi = false, theta = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--arima expects phi1=..,theta1=..");
    const std::string key = item.substr(0, eq);
    json tmp;
    tmp[key] = item.substr(eq + 1);
    if (key == "phi1") {
      c.phi1 = *get_double(tmp, key);
      phi = true;
    } else if (key == "theta1") {
      c.theta1 = *get_double(tmp, key);
      theta = true;
    } else {
      throw UsageError("--arima: unknown coefficient '" + key + "'");
    }
  }
  if (!phi || !theta) throw UsageError("--arima needs both phi1 and theta1");
  return c;
}

int run_backtest(const BacktestArgs& a) {
  if (!a.counts.empty()) {
    std::stringstream ss(a.counts);
    std::string nf, nv;
    if (!std::getline(ss, nf, ',') || !std::getline(ss, nv, ',')) {
      throw UsageError("--counts expects n_forecasts,n_violations");
    }
    json tmp{{"n", nf}, {"x", nv}};
    const auto n = *get_count(tmp, "n");
    const auto xv = *get_count(tmp, "x");
    const double p = a.p.value_or(0.01);
    const auto r = kupiec_test(n, xv, p);
    json resolved{{"counts", {{"n_forecasts", n}, {"n_violations", xv}}}, {"p", p}};
    std::string body;
    if (a.common.format == "json") {
      body = json_body({{"n_forecasts", n},
                        {"n_violations", xv},
                        {"p", p},
                        {"expected_violations", double(n) * p},
                        {"kupiec_lr", r.lr},
                        {"kupiec_pvalue", r.pvalue}});
    } else {
      body = "n_forecasts,n_violations,p,expected_violations,kupiec_lr,kupiec_pvalue\n" +
             std::to_string(n) + "," + std::to_string(xv) + "," + format_double(p) + "," +
             format_double(double(n) * p) + "," + format_double(r.lr) + "," +
             format_double(r.pvalue) + "\n";
    }
    emit(a.common, "backtest", resolved, std::nullopt, {}, body);
    return kOk;
  }

  json manifest_inputs;
  json cfg = load_config(a.common, "backtest", &manifest_inputs);
  json extra;
  take_cli_keys(cfg, extra,
                {"neg_log_returns", "bootstrap", "block_length", "n_boot", "level", "arima"});
  if (a.window) cfg["window"] = *a.window;
  if (a.horizon) cfg["horizon_points"] = *a.horizon;
  if (a.k) cfg["k"] = *a.k;
  if (a.p) cfg["p"] = *a.p;
  if (a.xi) cfg["xi"] = *a.xi;
  if (!a.method.empty()) cfg["method"] = a.method;
  if (!a.xi_policy.empty()) cfg["xi_policy"] = a.xi_policy;
  if (a.common.seed) cfg["seed"] = *a.common.seed;

  std::optional<ArimaCoeffs> arima;
  if (cfg.contains("phi1") || cfg.contains("theta1")) {
    ArimaCoeffs c;
    c.phi1 = get_double(cfg, "phi1").value_or(0.0);
    c.theta1 = get_double(cfg, "theta1").value_or(0.0);
    arima = c;
  }
  if (!a.arima.empty()) arima = parse_arima(a.arima);
  const auto config = backtest_config_from_json(cfg);

  bool neg_log = a.neg_log;
  if (extra.contains("neg_log_returns") && extra["neg_log_returns"].is_boolean()) {
    neg_log = neg_log || extra["neg_log_returns"].get<bool>();
  }
  std::optional<BootstrapOptions> boot;
  bool use_boot = a.bootstrap;
  if (extra.contains("bootstrap") && extra["bootstrap"].is_boolean()) {
    use_boot = use_boot || extra["bootstrap"].get<bool>();
  }
  if (use_boot) {
    BootstrapOptions o;
    if (auto v = get_count(extra, "block_length")) o.block_length = *v;
    if (auto v = get_count(extra, "n_boot")) o.n_boot = *v;
    if (auto v = get_double(extra, "level")) o.level = *v;
    if (a.block_length) o.block_length = *a.block_length;
    if (a.n_boot) o.n_boot = *a.n_boot;
    if (a.level) o.level = *a.level;
    o.seed = get_count(cfg, "seed").value_or(1);
    o.threads = 1;
    boot = o;
  }

  const fs::path input = resolve_input(a.input, manifest_inputs);
  const auto x = read_input_values(input, neg_log);
  const auto report = arima ? rolling_forecast_arima(x, config, *arima, a.common.threads, boot)
                            : rolling_forecast(x, config, a.common.threads, boot);

  json resolved = backtest_config_to_json(config);
  resolved["neg_log_returns"] = neg_log;
  if (arima) {
    resolved["phi1"] = arima->phi1;
    resolved["theta1"] = arima->theta1;
  }
  resolved["bootstrap"] = use_boot;
  if (boot) {
    resolved["block_length"] = boot->block_length;
    resolved["n_boot"] = boot->n_boot;
    resolved["level"] = boot->level;
    resolved["seed"] = boot->seed;
  }
  std::cerr << "violations " << report.violations.size() << " of " << report.n_forecasts()
            << " (expected " << format_double(report.expected_violations) << "), Kupiec p-value "
            << format_double(report.kupiec_pvalue) << "\n";
  const std::string body =
      a.common.format == "json" ? json_body(backtest_to_json(report)) : backtest_to_csv(report);
  emit(a.common, "backtest", resolved,
       boot ? std::optional<std::uint64_t>(boot->seed) : std::nullopt, {input}, body);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-value index and extreme-quantile estimation for dependent series"};
  app.set_version_flag("--version", std::string(TAILRISK_VERSION));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a series from a model spec");
  add_common(s, sim.common);
  s->add_option("--model", sim.model, "Model file (key = value or JSON)");
  s->add_option("--reference-model", sim.reference, "Built-in reference model 1-5")
      ->check(CLI::Range(1, 5));
  s->add_option("--n", sim.n, "Series length");
  s->add_option("--burn-in", sim.burn_in, "Warm-up steps to discard");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Tail index and quantile estimates over a k grid");
  add_common(e, est.common);
  e->add_option("--input,-i", est.input, "CSV with a 'value' column");
  e->add_option("--k", est.k_list, "Number(s) of top order statistics")->delimiter(',');
  e->add_option("--k-grid", est.k_grid, "k values as a list or lo:hi:step");
  e->add_option("--method", est.methods, "hill, unbiased, weissman, dhmz")->delimiter(',');
  e->add_option("--p", est.p, "Tail probabilities")->delimiter(',');
  e->add_option("--xi-policy", est.xi_policy, "rho_hat or canonical");
  e->add_option("--xi", est.xi, "Canonical second-order value (negative)");
  e->add_flag("--neg-log-returns", est.neg_log, "Treat input as prices, use -log(P_t/P_{t-1})");
  e->add_flag("--bootstrap", est.bootstrap, "Block-bootstrap percentile intervals");
  e->add_option("--block-length", est.block_length, "Bootstrap block length");
  e->add_option("--n-boot", est.n_boot, "Bootstrap resamples");
  e->add_option("--level", est.level, "Interval coverage");

  StudyArgs st;
  auto* m = app.add_subcommand("mcstudy", "Monte Carlo ABias/RMSE study");
  add_common(m, st.common);
  m->add_option("--reference-model", st.reference, "Built-in reference model 1-5")
      ->check(CLI::Range(1, 5));
  m->add_option("--replications,-N", st.replications, "Replication count");
  m->add_option("--n", st.n, "Series length");
  m->add_option("--time-budget", st.time_budget, "Wall-clock limit in seconds");
  m->add_option("--max-replications", st.max_replications, "Refuse configs above this count");

  BacktestArgs bt;
  auto* b = app.add_subcommand("backtest", "Rolling out-of-sample quantile backtest");
  add_common(b, bt.common);
  b->add_option("--input,-i", bt.input, "CSV with a 'value' column");
  b->add_option("--window", bt.window, "Historical points per forecast");
  b->add_option("--horizon", bt.horizon, "Out-of-sample forecasts");
  b->add_option("--k", bt.k, "Top order statistics per window");
  b->add_option("--p", bt.p, "Tail probability");
  b->add_option("--method", bt.method, "unbiased, weissman or dhmz");
  b->add_option("--xi-policy", bt.xi_policy, "rho_hat or canonical");
  b->add_option("--xi", bt.xi, "Canonical second-order value (negative)");
  b->add_option("--arima", bt.arima, "Filter through ARIMA residuals: phi1=..,theta1=..");
  b->add_option("--counts", bt.counts, "Kupiec test only: n_forecasts,n_violations");
  b->add_flag("--neg-log-returns", bt.neg_log, "Treat input as prices, use -log(P_t/P_{t-1})");
  b->add_flag("--bootstrap", bt.bootstrap, "Block-bootstrap interval per forecast");
  b->add_option("--block-length", bt.block_length, "Bootstrap block length");
  b->add_option("--n-boot", bt.n_boot, "Bootstrap resamples");
  b->add_option("--level", bt.level, "Interval coverage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*e) return run_estimate(est);
    if (*m) return run_mcstudy(st);
    if (*b) return run_backtest(bt);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kParse;
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kParse;
  } catch (const json::exception& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kParse;
  } catch (const std::ios_base::failure& err) {
    std::cerr << "I/O error: " << err.what() << "\n";
    return kIO;
  } catch (const BudgetError& err) {
    std::cerr << "budget exceeded: " << err.what() << "\n";
    return kBudget;
  } catch (const std::length_error& err) {
    std::cerr << "budget exceeded: " << err.what() << "\n";
    return kBudget;
  } catch (const std::logic_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kDomain;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kOther;
  }
  return kUsage;
}
