#include "repel/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "repel/besq.hpp"
#include "repel/errors.hpp"
#include "repel/rmt_oracle.hpp"

namespace repel::cli {

namespace {

using nlohmann::json;

class HelpRequested : public std::runtime_error {
 public:
  explicit HelpRequested(const std::string& text) : std::runtime_error(text) {}
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void invalid(const std::string& flag, const std::string& what) {
  throw ValidationError("--" + flag + ": " + what);
}

// ConfigError messages start with the name of the offending quantity.
std::string flag_for(const std::string& message) {
  for (const char* f : {"dt-max", "dt-min", "alpha", "max-steps", "lambda", "x0", "n "})
    if (message.rfind(f, 0) == 0) return std::string(f) == "n " ? "n" : f;
  if (message.rfind("circle", 0) == 0) return "x0";
  return "config";
}

std::vector<double> default_positions(Geometry g, int n, double gap) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] =
        g == Geometry::Circle ? kTwoPi * i / n : (i - 0.5 * (n - 1)) * gap;
  }
  return x;
}

}  // namespace

CliConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Simulation and statistical checks for mutually repelling Brownian particles"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat 'key = value' file; flags override it");

  auto* simulate = app.add_subcommand("simulate", "Integrate one path and write its trajectory");
  auto* verify = app.add_subcommand("verify-bessel", "Test S/(2N) against its squared Bessel law");
  auto* scan = app.add_subcommand("collision-scan", "Estimate collision frequencies across lambda");
  auto* identity = app.add_subcommand("identity-check", "Fuzz the exact algebraic identities");
  auto* oracle = app.add_subcommand("oracle-compare", "Compare lambda = 1/2 paths with the matrix oracle");

  int n = 3;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  std::string geometry = "line";
  std::vector<double> x0;
  double gap = 1.0;
  CliConfig cfg;
  std::optional<std::uint64_t> seed;
  double alpha = cfg.scheme.gap_safety;
  bool no_taming = false;
  std::string format = "csv";
  std::string out;
  cfg.grid_step = 0.01;
  cfg.paths = 1000;

  app.add_option("--n", n, "Number of particles (>= 3)");
  app.add_option("--lambda", lambda, "Coupling constant (> 0)");
  app.add_option("--lambdas", lambdas, "Comma-separated couplings for collision-scan")->delimiter(',');
  app.add_option("--geometry", geometry, "line or circle")->check(CLI::IsMember({"line", "circle"}));
  app.add_option("--x0", x0, "Comma-separated ordered initial positions")->delimiter(',');
  app.add_option("--gap", gap, "Initial spacing when --x0 is omitted (line)");
  app.add_option("--t-end", cfg.t_end, "End time");
  app.add_option("--grid-step", cfg.grid_step, "Output grid spacing (0: end time only)");
  app.add_option("--dt-max", cfg.scheme.dt_max, "Largest step");
  app.add_option("--dt-min", cfg.scheme.dt_min, "Smallest step");
  app.add_option("--alpha", alpha, "Gap safety factor in h = alpha * gap^2");
  app.add_flag("--no-taming", no_taming, "Disable drift taming");
  app.add_option("--max-steps", cfg.scheme.max_steps, "Per-path step budget");
  app.add_option("--paths", cfg.paths, "Monte Carlo paths");
  app.add_option("--seed", seed, "Master seed (required)");
  app.add_option("--stream", cfg.stream, "Stream id for simulate");
  app.add_option("--threshold", cfg.threshold, "Pairwise collision threshold on the minimum gap");
  app.add_option("--window-threshold", cfg.window_threshold, "Threshold on r = 3 window spreads");
  app.add_option("--ks-alpha", cfg.ks_alpha, "KS tests pass when p exceeds this");
  app.add_option("--mean-tol-se", cfg.mean_tol_se, "verify-bessel mean tolerance in standard errors");
  app.add_option("--mean-tol-rel", cfg.mean_tol_rel, "verify-bessel relative mean tolerance");
  app.add_option("--var-tol-rel", cfg.var_tol_rel, "verify-bessel relative variance tolerance");
  app.add_option("--samples", cfg.samples, "identity-check configurations");
  app.add_flag("--observables", cfg.observables, "simulate: append S, min_gap (and R on the circle)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (simulate->parsed()) cfg.subcommand = Subcommand::Simulate;
  if (verify->parsed()) cfg.subcommand = Subcommand::VerifyBessel;
  if (scan->parsed()) cfg.subcommand = Subcommand::CollisionScan;
  if (identity->parsed()) cfg.subcommand = Subcommand::IdentityCheck;
  if (oracle->parsed()) cfg.subcommand = Subcommand::OracleCompare;

  if (!seed) throw UsageError("--seed: a seed is required (no wall-clock seeding)");
  cfg.seed = *seed;
  cfg.format = format == "json" ? Format::Json : Format::Csv;
  if (!out.empty()) cfg.out_path = out;
  cfg.scheme.gap_safety = alpha;
  cfg.scheme.taming_on = !no_taming;
  cfg.lambdas = lambdas;

  if (n < 3) invalid("n", "n must be >= 3");
  if (lambda && !(*lambda > 0.0)) invalid("lambda", "lambda must be > 0");
  for (double l : lambdas)
    if (!(l > 0.0)) invalid("lambdas", "lambda must be > 0");
  if (!(cfg.t_end > 0.0)) invalid("t-end", "t-end must be > 0");
  if (cfg.grid_step < 0.0) invalid("grid-step", "grid-step must be >= 0");
  if (cfg.paths < 1) invalid("paths", "paths must be >= 1");
  if (!(cfg.threshold > 0.0)) invalid("threshold", "threshold must be > 0");
  if (!(cfg.window_threshold > 0.0)) invalid("window-threshold", "window-threshold must be > 0");
  if (!(cfg.ks_alpha > 0.0 && cfg.ks_alpha < 1.0)) invalid("ks-alpha", "ks-alpha must lie in (0, 1)");
  if (cfg.samples < 1) invalid("samples", "samples must be >= 1");
  if (!(gap > 0.0)) invalid("gap", "gap must be > 0");

  switch (cfg.subcommand) {
    case Subcommand::Simulate:
    case Subcommand::VerifyBessel:
      if (!lambda) throw UsageError("--lambda: required for this subcommand");
      break;
    case Subcommand::CollisionScan:
      if (cfg.lambdas.empty()) {
        if (lambda)
          cfg.lambdas = {*lambda};
        else
          cfg.lambdas = {0.1, 0.25, 0.75, 1.0};
      }
      if (!lambda) lambda = cfg.lambdas.front();
      break;
    case Subcommand::OracleCompare:
      if (lambda && *lambda != 0.5) invalid("lambda", "oracle-compare requires lambda = 0.5");
      lambda = 0.5;
      if (geometry != "line") invalid("geometry", "oracle-compare requires the line geometry");
      break;
    case Subcommand::IdentityCheck:
      if (!lambda) lambda = 1.0;
      break;
  }

  cfg.spec.geometry = geometry == "circle" ? Geometry::Circle : Geometry::Line;
  cfg.spec.n_particles = n;
  cfg.spec.coupling = *lambda;
  cfg.spec.initial_positions = x0.empty() ? default_positions(cfg.spec.geometry, n, gap) : x0;
  try {
    cfg.spec.validate();
    cfg.scheme.validate();
  } catch (const ConfigError& e) {
    invalid(flag_for(e.what()), e.what());
  }
  return cfg;
}

void emit_trajectory_csv(const TrajectoryRecord& record, bool with_observables,
                         std::ostream& sink) {
  if (record.times.empty()) throw ConfigError("trajectory record is empty");
  const std::size_t n = record.positions.front().size();
  const bool circle = record.geometry == Geometry::Circle;
  std::string line = "t";
  for (std::size_t i = 1; i <= n; ++i) line += ",x" + std::to_string(i);
  if (with_observables) {
    line += ",S,min_gap";
    if (circle) line += ",R";
  }
  sink << line << '\n';
  for (std::size_t row = 0; row < record.times.size(); ++row) {
    line = fmt17(record.times[row]);
    for (double x : record.positions[row]) line += ',' + fmt17(x);
    if (with_observables) {
      const auto& pos = record.positions[row];
      line += ',' + fmt17(spread_total(pos));
      line += ',' + fmt17(min_gap(pos, record.geometry));
      if (circle) line += ',' + fmt17(spread_circle(pos));
    }
    sink << line << '\n';
  }
  if (!sink) throw std::ios_base::failure("failed writing trajectory CSV");
}

void emit_trajectory_json(const TrajectoryRecord& record, std::ostream& sink) {
  json j;
  j["geometry"] = to_string(record.geometry);
  j["times"] = record.times;
  j["positions"] = record.positions;
  j["s_total"] = record.observables.s_total;
  j["min_gap"] = record.observables.min_gap;
  if (record.observables.r_circ) j["r_circ"] = *record.observables.r_circ;
  j["steps"] = record.steps;
  sink << j.dump() << '\n';
  if (!sink) throw std::ios_base::failure("failed writing trajectory JSON");
}

namespace {

json to_json(const TestResult& t) {
  json j;
  j["name"] = t.name;
  j["statistic"] = t.statistic;
  if (t.p_value) j["p_value"] = *t.p_value;
  if (t.mean) j["mean"] = *t.mean;
  if (t.se) j["se"] = *t.se;
  if (t.frequency) j["frequency"] = *t.frequency;
  if (t.threshold) j["threshold"] = *t.threshold;
  return j;
}

json to_json(const McReport& r) {
  const auto& p = r.plan_echo;
  json echo;
  echo["geometry"] = p.geometry;
  echo["n"] = p.n;
  echo["lambda"] = p.lambda;
  echo["x0"] = p.x0;
  echo["t_end"] = p.t_end;
  echo["scheme"] = p.scheme;
  echo["dt_max"] = p.dt_max;
  echo["dt_min"] = p.dt_min;
  echo["alpha"] = p.alpha;
  echo["taming"] = p.taming;
  echo["grid_points"] = p.grid_points;
  if (p.dimension) echo["dimension"] = *p.dimension;
  if (p.y0) echo["y0"] = *p.y0;

  json j;
  j["plan_echo"] = echo;
  j["seeds"] = {{"master_seed", r.master_seed},
                {"first_stream", 0},
                {"last_stream", r.n_paths == 0 ? 0 : r.n_paths - 1}};
  j["n_paths"] = r.n_paths;
  j["failures"] = r.failures;
  j["tests"] = json::array();
  for (const auto& t : r.tests) j["tests"].push_back(to_json(t));
  return j;
}

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

McReport from_json(const json& j) {
  McReport r;
  const auto& e = j.at("plan_echo");
  auto& p = r.plan_echo;
  p.geometry = e.at("geometry").get<std::string>();
  p.n = e.at("n").get<int>();
  p.lambda = e.at("lambda").get<double>();
  p.x0 = e.at("x0").get<std::vector<double>>();
  p.t_end = e.at("t_end").get<double>();
  p.scheme = e.at("scheme").get<std::string>();
  p.dt_max = e.at("dt_max").get<double>();
  p.dt_min = e.at("dt_min").get<double>();
  p.alpha = e.at("alpha").get<double>();
  p.taming = e.at("taming").get<bool>();
  p.grid_points = e.at("grid_points").get<std::uint64_t>();
  p.dimension = opt<double>(e, "dimension");
  p.y0 = opt<double>(e, "y0");
  r.master_seed = j.at("seeds").at("master_seed").get<std::uint64_t>();
  r.n_paths = j.at("n_paths").get<std::uint64_t>();
  r.failures = j.at("failures").get<std::uint64_t>();
  for (const auto& t : j.at("tests")) {
    TestResult x;
    x.name = t.at("name").get<std::string>();
    x.statistic = t.at("statistic").get<double>();
    x.p_value = opt<double>(t, "p_value");
    x.mean = opt<double>(t, "mean");
    x.se = opt<double>(t, "se");
    x.frequency = opt<double>(t, "frequency");
    x.threshold = opt<double>(t, "threshold");
    r.tests.push_back(std::move(x));
  }
  return r;
}

void emit_tests_csv(const McReport& r, std::ostream& sink, const std::string& prefix_header = "",
                    const std::string& prefix = "") {
  auto cell = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  sink << prefix_header << "name,statistic,p_value,mean,se,frequency,threshold\n";
  for (const auto& t : r.tests) {
    sink << prefix << t.name << ',' << fmt17(t.statistic) << ',' << cell(t.p_value) << ','
         << cell(t.mean) << ',' << cell(t.se) << ',' << cell(t.frequency) << ','
         << cell(t.threshold) << '\n';
  }
}

}  // namespace

void emit_report_json(const McReport& report, std::ostream& sink) {
  sink << to_json(report).dump(2) << '\n';
  if (!sink) throw std::ios_base::failure("failed writing report JSON");
}

McReport parse_report_json(const std::string& text) { return from_json(json::parse(text)); }

IdentityCheckResult run_identity_check(std::uint64_t seed, int samples) {
  IdentityCheckResult res;
  res.samples = samples;
  NoiseStream noise({seed, 0});
  std::vector<double> x;
  for (int s = 0; s < samples; ++s) {
    const int n = 3 + static_cast<int>(noise.uniform() * 6.0) % 6;
    const double scale = std::pow(10.0, 4.0 * noise.uniform() - 2.0);
    x.assign(static_cast<std::size_t>(n), 0.0);
    do {
      for (double& v : x) v = scale * (2.0 * noise.uniform() - 1.0);
      std::sort(x.begin(), x.end());
    } while (min_gap(x, Geometry::Line) < 1e-3);
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    const double nd = n;
    const double qv = qv_identity_residual(x);
    const double dr = drift_identity_residual(x);
    res.max_qv_residual = std::max(res.max_qv_residual, qv);
    res.max_drift_residual = std::max(res.max_drift_residual, dr);
    res.max_qv_ratio = std::max(res.max_qv_ratio, qv / (nd * nd * max_abs * max_abs));
    res.max_drift_ratio = std::max(res.max_drift_ratio, dr / (nd * nd * nd));
  }
  return res;
}

namespace {

ExperimentPlan plan_from(const CliConfig& c) {
  ExperimentPlan plan;
  plan.spec = c.spec;
  plan.cfg = c.scheme;
  plan.t_end = c.t_end;
  plan.grid = uniform_grid(c.t_end, c.grid_step);
  plan.n_paths = c.paths;
  plan.master_seed = c.seed;
  return plan;
}

int run_simulate(const CliConfig& c, std::ostream& out) {
  const auto grid = uniform_grid(c.t_end, c.grid_step);
  const auto rec = simulate_path(c.spec, c.scheme, c.t_end, grid, {c.seed, c.stream});
  if (c.format == Format::Json)
    emit_trajectory_json(rec, out);
  else
    emit_trajectory_csv(rec, c.observables, out);
  return 0;
}

int run_verify_bessel(const CliConfig& c, std::ostream& out, std::ostream& log) {
  auto plan = plan_from(c);
  plan.tests = {{TestSpec::Kind::BesselMoments}, {TestSpec::Kind::BesselKS}};
  const auto report = run_ensemble(plan);
  const auto law = besq_mean_var({*report.plan_echo.dimension, *report.plan_echo.y0},
                                 plan.grid.back());
  const auto* mean = report.find("bessel_mean");
  const auto* var = report.find("bessel_variance");
  const auto* ks = report.find("bessel_ks");
  bool ok = true;
  if (c.mean_tol_rel)
    ok &= std::abs(*mean->mean - law.mean) <= *c.mean_tol_rel * law.mean;
  else
    ok &= std::abs(mean->statistic) <= c.mean_tol_se;
  ok &= std::abs(var->statistic) <= c.var_tol_rel;
  ok &= *ks->p_value > c.ks_alpha;
  log << "verify-bessel: dimension " << *report.plan_echo.dimension << ", mean "
      << *mean->mean << " (theory " << law.mean << "), KS p " << *ks->p_value
      << (ok ? " PASS" : " FAIL") << '\n';
  if (c.format == Format::Json)
    emit_report_json(report, out);
  else
    emit_tests_csv(report, out);
  return ok ? 0 : 1;
}

int run_collision_scan(const CliConfig& c, std::ostream& out, std::ostream& log) {
  std::vector<double> lambdas = c.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<McReport> reports;
  for (double l : lambdas) {
    auto plan = plan_from(c);
    plan.spec.coupling = l;
    plan.tests = {{TestSpec::Kind::CollisionScan, c.threshold},
                  {TestSpec::Kind::MultipleCollisionScan, c.window_threshold}};
    reports.push_back(run_ensemble(plan));
  }
  bool ok = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto* pair = reports[i].find("collision_scan");
    const auto* multi = reports[i].find("multiple_collision_scan");
    log << "lambda " << lambdas[i] << ": collision frequency " << *pair->frequency << " +- "
        << *pair->se << ", min r=3 window spread " << multi->statistic << '\n';
    ok &= multi->statistic > c.window_threshold;
    if (i > 0) {
      const auto* prev = reports[i - 1].find("collision_scan");
      const double se = std::hypot(*prev->se, *pair->se);
      ok &= *pair->frequency <= *prev->frequency + 2.0 * se;
    }
  }
  if (c.format == Format::Json) {
    out << "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) out << ",\n";
      emit_report_json(reports[i], out);
    }
    out << "]\n";
  } else {
    out << "lambda,frequency,se,window3_min\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto* pair = reports[i].find("collision_scan");
      const auto* multi = reports[i].find("multiple_collision_scan");
      out << fmt17(lambdas[i]) << ',' << fmt17(*pair->frequency) << ',' << fmt17(*pair->se)
          << ',' << fmt17(multi->statistic) << '\n';
    }
  }
  return ok ? 0 : 1;
}

int run_identity(const CliConfig& c, std::ostream& out, std::ostream& log) {
  const auto r = run_identity_check(c.seed, c.samples);
  const bool ok = r.max_qv_ratio <= 1e-10 && r.max_drift_ratio <= 1e-9;
  log << "identity-check: " << r.samples << " configurations, max qv ratio "
      << r.max_qv_ratio << ", max drift ratio " << r.max_drift_ratio << (ok ? " PASS" : " FAIL")
      << '\n';
  if (c.format == Format::Json) {
    json j{{"samples", r.samples},
           {"max_qv_residual", r.max_qv_residual},
           {"max_drift_residual", r.max_drift_residual},
           {"max_qv_ratio", r.max_qv_ratio},
           {"max_drift_ratio", r.max_drift_ratio}};
    out << j.dump(2) << '\n';
  } else {
    out << "samples,max_qv_residual,max_drift_residual,max_qv_ratio,max_drift_ratio\n"
        << r.samples << ',' << fmt17(r.max_qv_residual) << ',' << fmt17(r.max_drift_residual)
        << ',' << fmt17(r.max_qv_ratio) << ',' << fmt17(r.max_drift_ratio) << '\n';
  }
  return ok ? 0 : 1;
}

int run_oracle(const CliConfig& c, std::ostream& out, std::ostream& log) {
  auto plan = plan_from(c);
  plan.grid = {c.t_end};
  const int n = c.spec.n_particles;
  const BesqSpec law{spread_dimension(n, 0.5), spread_total(c.spec.initial_positions) / (2.0 * n)};
  auto cdf = [&](double y) { return besq_cdf(law, c.t_end, y); };

  std::vector<double> oracle(static_cast<std::size_t>(c.paths));
  const MatrixEnsembleSpec mspec{n, c.spec.initial_positions, c.t_end};
  const std::uint64_t oracle_seed = mix64(c.seed ^ 0x6f7261636c65ULL);
  parallel_for(oracle.size(), [&](std::size_t i) {
    NoiseStream noise({oracle_seed, i});
    oracle[i] = spread_total(sample_goe_eigenvalues(mspec, noise)) / (2.0 * n);
  });
  const auto paths = run_paths(plan);
  std::vector<double> integrated;
  for (const auto& p : paths)
    if (!p.failed) integrated.push_back(p.s_terminal / (2.0 * n));

  auto report = summarize(plan, paths);
  const auto two = ks_two_sample(oracle, integrated);
  const auto ko = ks_one_sample(oracle, cdf);
  const auto ki = ks_one_sample(integrated, cdf);
  auto ks_entry = [](const char* name, const KsResult& k) {
    TestResult t;
    t.name = name;
    t.statistic = k.statistic;
    t.p_value = k.p_value;
    return t;
  };
  report.tests = {ks_entry("oracle_vs_integrator_ks", two), ks_entry("oracle_bessel_ks", ko),
                  ks_entry("integrator_bessel_ks", ki)};
  const bool ok = two.p_value > c.ks_alpha && ko.p_value > c.ks_alpha && ki.p_value > c.ks_alpha;
  log << "oracle-compare: two-sample p " << two.p_value << ", oracle p " << ko.p_value
      << ", integrator p " << ki.p_value << (ok ? " PASS" : " FAIL") << '\n';
  if (c.format == Format::Json)
    emit_report_json(report, out);
  else
    emit_tests_csv(report, out);
  return ok ? 0 : 1;
}

}  // namespace

int run(const CliConfig& config, std::ostream& out, std::ostream& log) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (config.out_path) {
    file.open(*config.out_path, std::ios::binary);
    if (!file) throw std::ios_base::failure("cannot open " + *config.out_path);
    sink = &file;
  }
  switch (config.subcommand) {
    case Subcommand::Simulate: return run_simulate(config, *sink);
    case Subcommand::VerifyBessel: return run_verify_bessel(config, *sink, log);
    case Subcommand::CollisionScan: return run_collision_scan(config, *sink, log);
    case Subcommand::IdentityCheck: return run_identity(config, *sink, log);
    case Subcommand::OracleCompare: return run_oracle(config, *sink, log);
  }
  return 2;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  try {
    const auto config = parse_args(argc, argv);
    return run(config, out, log);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    log << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    log << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace repel::cli
