#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lodreg/baselines.hpp"
#include "lodreg/bootstrap.hpp"
#include "lodreg/csv.hpp"
#include "lodreg/errors.hpp"
#include "lodreg/gof.hpp"
#include "lodreg/parallel.hpp"
#include "lodreg/pseudo.hpp"
#include "lodreg/report.hpp"
#include "lodreg/sim.hpp"
#include "lodreg/version.hpp"

namespace {

using lodreg::fmt;
using lodreg::KeyValues;

struct CommonOpts {
  std::string input;
  std::vector<std::string> schema;
  std::string family = "gaussian";
  double limit = 0.0;
  std::optional<double> tau;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out;
};

lodreg::CsvSchema parse_schema(const std::vector<std::string>& entries,
                               double limit) {
  lodreg::CsvSchema s;
  s.limit = limit;
  for (const auto& kv : entries) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw lodreg::SchemaError("schema entry '" + kv +
                                "' is not name=column");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "response") {
      s.response = value;
    } else if (key == "z") {
      s.covariate = value;
    } else if (key == "detect") {
      s.detect = value;
    } else if (key == "x") {
      std::stringstream ss(value);
      std::string col;
      while (std::getline(ss, col, ','))
        if (!col.empty()) s.x_columns.push_back(col);
    } else {
      throw lodreg::SchemaError("unknown schema key '" + key + "'");
    }
  }
  return s;
}

KeyValues common_config(const CommonOpts& o, const std::string& subcommand) {
  KeyValues kv;
  kv.emplace_back("subcommand", subcommand);
  if (!o.input.empty()) kv.emplace_back("input", o.input);
  for (const auto& s : o.schema) kv.emplace_back("schema", s);
  kv.emplace_back("family", o.family);
  if (o.limit > 0.0) kv.emplace_back("limit", fmt(o.limit));
  if (o.tau) kv.emplace_back("tau", fmt(*o.tau));
  kv.emplace_back("seed", std::to_string(o.seed));
  kv.emplace_back("workers", std::to_string(o.workers));
  kv.emplace_back("out", o.out);
  return kv;
}

void write_outputs(const std::string& out, const KeyValues& config,
                   const std::string& csv_body) {
  lodreg::atomic_write(out, lodreg::comment_header(config) + csv_body);
  lodreg::atomic_write(out + ".meta", lodreg::meta_body(config));
}

void append_glm_block(std::ostringstream& os, const std::string& section,
                      const lodreg::GlmFit& fit) {
  for (Eigen::Index j = 0; j < fit.theta.size(); ++j)
    os << section << ",theta," << j << "," << fmt(fit.theta[j]) << "\n";
  os << section << ",phi,," << fmt(fit.phi) << "\n";
  os << section << ",n_used,," << fit.n_used << "\n";
  os << section << ",iterations,," << fit.iterations << "\n";
}

lodreg::SubstitutionRule parse_method_rule(const std::string& name) {
  if (name == "sub_L") return lodreg::SubstitutionRule::at_limit();
  if (name == "sub_Lsqrt2")
    return lodreg::SubstitutionRule::at_limit_over_sqrt2();
  if (name == "sub_zero") return lodreg::SubstitutionRule::at_zero();
  if (name.rfind("sub_condmean=", 0) == 0) {
    const double v = std::stod(name.substr(13));
    return lodreg::SubstitutionRule::conditional_mean(v);
  }
  throw lodreg::ConfigError("unknown method '" + name + "'");
}

int cmd_fit(const CommonOpts& o, const std::vector<std::string>& methods) {
  const lodreg::CsvSchema schema = parse_schema(o.schema, o.limit);
  const lodreg::ObservationSet data = lodreg::load_csv(o.input, schema);
  const lodreg::GlmFamily family = lodreg::family_from_name(o.family);
  lodreg::TwoStageOptions opts;
  opts.tau_override = o.tau;
  const lodreg::TwoStageFit fit = lodreg::fit_two_stage(data, family, opts);

  std::ostringstream os;
  os << "section,name,index,value\n";
  os << "data,n,," << data.n() << "\n";
  os << "data,n_detected,," << data.n_detected() << "\n";
  os << "data,censoring_rate,," << fmt(data.censoring_rate()) << "\n";
  append_glm_block(os, "complete_case", fit.complete_case);
  for (Eigen::Index j = 0; j < fit.aft.alpha.size(); ++j)
    os << "aft,alpha," << j << "," << fmt(fit.aft.alpha[j]) << "\n";
  os << "aft,gehan_objective,," << fmt(fit.aft.gehan_objective) << "\n";
  os << "aft,subgradient_norm,," << fmt(fit.aft.subgradient_norm) << "\n";
  os << "aft,iterations,," << fit.aft.iterations << "\n";
  os << "km,n_jumps,," << fit.nuisance.eta_hat.size() << "\n";
  os << "km,total_mass,," << fmt(fit.nuisance.eta_hat.total_mass) << "\n";
  os << "nuisance,tau,," << fmt(fit.nuisance.tau) << "\n";
  os << "nuisance,phi,," << fmt(fit.nuisance.phi_hat) << "\n";
  for (Eigen::Index j = 0; j < fit.pseudo.theta.size(); ++j)
    os << "two_stage,theta," << j << "," << fmt(fit.pseudo.theta[j]) << "\n";
  os << "two_stage,score_norm,," << fmt(fit.pseudo.score_norm) << "\n";
  os << "two_stage,iterations,," << fit.pseudo.iterations << "\n";
  os << "two_stage,floored_subjects,," << fit.pseudo.floored_subjects
     << "\n";
  for (const auto& m : methods) {
    if (m == "two_stage" || m == "complete_case") continue;  // always present
    const lodreg::GlmFit sub =
        lodreg::fit_substitution(data, parse_method_rule(m), family);
    append_glm_block(os, m, sub);
  }

  KeyValues config = common_config(o, "fit");
  for (const auto& m : methods) config.emplace_back("method", m);
  write_outputs(o.out, config, os.str());
  return 0;
}

int cmd_bootstrap(const CommonOpts& o, int n_boot) {
  const lodreg::CsvSchema schema = parse_schema(o.schema, o.limit);
  const lodreg::ObservationSet data = lodreg::load_csv(o.input, schema);
  const lodreg::GlmFamily family = lodreg::family_from_name(o.family);
  lodreg::TwoStageOptions opts;
  opts.tau_override = o.tau;
  const lodreg::BootstrapResult br =
      lodreg::bootstrap(data, family, n_boot, o.seed, opts);
  const auto ci90 = lodreg::wald_interval(br, 0.90);
  const auto ci95 = lodreg::wald_interval(br, 0.95);

  std::ostringstream os;
  os << "coef,estimate,boot_sd,ci90_lo,ci90_hi,ci95_lo,ci95_hi\n";
  for (Eigen::Index j = 0; j < br.theta_hat.size(); ++j) {
    os << j << "," << fmt(br.theta_hat[j]) << ","
       << fmt(std::sqrt(std::max(br.boot_cov(j, j), 0.0))) << ","
       << fmt(ci90[static_cast<std::size_t>(j)].first) << ","
       << fmt(ci90[static_cast<std::size_t>(j)].second) << ","
       << fmt(ci95[static_cast<std::size_t>(j)].first) << ","
       << fmt(ci95[static_cast<std::size_t>(j)].second) << "\n";
  }
  os << "cov_row,i";
  for (Eigen::Index j = 0; j < br.boot_cov.cols(); ++j) os << ",c" << j;
  os << ",,\n";
  for (Eigen::Index i = 0; i < br.boot_cov.rows(); ++i) {
    os << "cov," << i;
    for (Eigen::Index j = 0; j < br.boot_cov.cols(); ++j)
      os << "," << fmt(br.boot_cov(i, j));
    os << ",,\n";
  }

  KeyValues config = common_config(o, "bootstrap");
  config.emplace_back("n_boot", std::to_string(n_boot));
  config.emplace_back("n_failed", std::to_string(br.n_failed));
  if (!br.warning.empty()) config.emplace_back("warning", br.warning);
  write_outputs(o.out, config, os.str());
  return 0;
}

int cmd_gof(const CommonOpts& o, int n_sim, int covariate, int n_paths) {
  const lodreg::CsvSchema schema = parse_schema(o.schema, o.limit);
  const lodreg::ObservationSet data = lodreg::load_csv(o.input, schema);
  const lodreg::AftFit aft = lodreg::fit_gehan(data);

  std::ostringstream os;
  os << "covariate_index,column,p_value\n";
  lodreg::ScoreProcess selected;
  for (int j = 0; j < data.p(); ++j) {
    lodreg::ScoreProcess sp =
        lodreg::score_process(data, aft, j, n_sim, o.seed);
    os << j << "," << schema.x_columns[static_cast<std::size_t>(j)] << ","
       << fmt(sp.p_value) << "\n";
    if (j == covariate) selected = std::move(sp);
  }
  if (covariate < 0 || covariate >= data.p())
    throw lodreg::ConfigError("gof: covariate index out of range");
  const lodreg::PlotTable plot =
      lodreg::export_gof_plot_data(selected, n_paths);

  KeyValues config = common_config(o, "gof");
  config.emplace_back("n_sim", std::to_string(n_sim));
  config.emplace_back("covariate", std::to_string(covariate));
  config.emplace_back("n_paths", std::to_string(n_paths));
  write_outputs(o.out, config, os.str());
  lodreg::atomic_write(o.out + ".plot.csv",
                       lodreg::comment_header(config) +
                           lodreg::plot_table_csv(plot));
  return 0;
}

int cmd_simulate(const CommonOpts& o, lodreg::SimScenario scenario) {
  scenario.family = lodreg::family_from_name(o.family);
  scenario.seed = o.seed;
  const lodreg::MonteCarloReport report = lodreg::run_study(scenario);

  KeyValues config = common_config(o, "simulate");
  config.emplace_back("n", std::to_string(scenario.n));
  config.emplace_back("n_reps", std::to_string(scenario.n_reps));
  config.emplace_back("n_boot", std::to_string(scenario.n_boot));
  config.emplace_back("censoring", fmt(scenario.target_censoring));
  config.emplace_back("calibrated_c", fmt(report.c));
  config.emplace_back("calibrated_limit", fmt(report.limit));
  config.emplace_back("conditional_mean", fmt(report.cond_mean));
  write_outputs(o.out, config, lodreg::mc_report_csv(report));
  std::cout << lodreg::mc_report_table(report);
  return 0;
}

int cmd_calibrate(const CommonOpts& o, double censoring,
                  std::uint64_t draws) {
  lodreg::SimScenario scenario;
  scenario.family = lodreg::family_from_name(o.family);
  scenario.seed = o.seed;
  scenario.target_censoring = censoring;
  const lodreg::CalibratedLimit cal =
      lodreg::calibrate_limit(scenario, draws);
  const double cm = lodreg::conditional_mean_oracle(scenario, cal.c, draws);

  std::ostringstream os;
  os << "quantity,value\n";
  os << "c," << fmt(cal.c) << "\n";
  os << "limit," << fmt(cal.limit) << "\n";
  os << "conditional_mean," << fmt(cm) << "\n";

  KeyValues config = common_config(o, "calibrate");
  config.emplace_back("censoring", fmt(censoring));
  config.emplace_back("draws", std::to_string(draws));
  write_outputs(o.out, config, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(lodreg::kToolName) +
               " - two-stage regression with a covariate below a detection "
               "limit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lodreg::kVersion);

  CommonOpts o;
  std::vector<std::string> methods;
  int n_boot = 100;
  int n_sim = 500;
  int covariate = 0;
  int n_paths = 50;
  double censoring = 0.30;
  std::uint64_t draws = 10'000'000;
  lodreg::SimScenario scenario;

  auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) {
      sub->add_option("--input", o.input, "input CSV path")->required();
      sub->add_option("--schema", o.schema,
                      "column mapping name=column (response, z, detect, x)");
      sub->add_option("--limit", o.limit, "detection limit L")->required();
      sub->add_option("--tau", o.tau, "residual-scale truncation override");
    }
    sub->add_option("--family", o.family, "gaussian|bernoulli|poisson");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--workers", o.workers, "worker threads (0 = default)");
    sub->add_option("--out", o.out, "output path")->required();
  };

  CLI::App* fit = app.add_subcommand("fit", "two-stage fit of one dataset");
  add_common(fit, true);
  fit->add_option("--method", methods,
                  "baseline methods to include "
                  "(sub_L|sub_Lsqrt2|sub_zero|sub_condmean=VALUE)");

  CLI::App* boot =
      app.add_subcommand("bootstrap", "bootstrap covariance and intervals");
  add_common(boot, true);
  boot->add_option("--n-boot", n_boot, "bootstrap replicates");

  CLI::App* gof = app.add_subcommand(
      "gof", "martingale-residual score-process model check");
  add_common(gof, true);
  gof->add_option("--n-sim", n_sim, "simulated score processes");
  gof->add_option("--covariate", covariate, "column index for plot data");
  gof->add_option("--n-paths", n_paths, "simulated paths in the plot data");

  CLI::App* sim =
      app.add_subcommand("simulate", "Monte Carlo estimator comparison");
  add_common(sim, false);
  sim->add_option("--n", scenario.n, "sample size per replicate");
  sim->add_option("--n-reps", scenario.n_reps, "replications");
  sim->add_option("--n-boot", scenario.n_boot,
                  "bootstrap replicates per replication (0 disables)");
  sim->add_option("--censoring", scenario.target_censoring,
                  "target censoring rate");

  CLI::App* cal = app.add_subcommand(
      "calibrate", "detection limit for a target censoring rate");
  add_common(cal, false);
  cal->add_option("--censoring", censoring, "target censoring rate");
  cal->add_option("--draws", draws, "Monte Carlo draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  lodreg::par::set_workers(o.workers);
  try {
    if (fit->parsed()) return cmd_fit(o, methods);
    if (boot->parsed()) return cmd_bootstrap(o, n_boot);
    if (gof->parsed()) return cmd_gof(o, n_sim, covariate, n_paths);
    if (sim->parsed()) return cmd_simulate(o, scenario);
    if (cal->parsed()) return cmd_calibrate(o, censoring, draws);
  } catch (const lodreg::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 1;
  } catch (const lodreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lodreg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const lodreg::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
