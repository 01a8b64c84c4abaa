#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repel/integrate.hpp"
#include "repel/mcstats.hpp"
#include "repel/model.hpp"

namespace repel::cli {

/// Malformed command line; exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Well-formed flags that violate a model constraint; exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

enum class Subcommand { Simulate, VerifyBessel, CollisionScan, IdentityCheck, OracleCompare };
enum class Format { Csv, Json };

struct CliConfig {
  Subcommand subcommand = Subcommand::Simulate;
  SystemSpec spec;
  SchemeConfig scheme;
  double t_end = 1.0;
  /// Output grid spacing; 0 records t_end only.
  double grid_step = 0.0;
  int paths = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> lambdas;        ///< collision-scan
  double threshold = 1e-3;            ///< pairwise collision threshold
  double window_threshold = 1e-5;     ///< r = 3 window spread threshold
  double ks_alpha = 1e-3;             ///< KS tests pass when p > ks_alpha
  double mean_tol_se = 3.0;           ///< verify-bessel mean tolerance in SEs
  std::optional<double> mean_tol_rel; ///< optional relative mean tolerance
  double var_tol_rel = 0.05;          ///< verify-bessel variance tolerance
  int samples = 10000;                ///< identity-check configurations
  bool observables = false;           ///< simulate: append S, min_gap[, R]
  Format format = Format::Csv;
  std::optional<std::string> out_path;
};

/// Parses and validates argv. Throws UsageError or ValidationError; both
/// messages name the offending flag.
CliConfig parse_args(int argc, const char* const* argv);

/// Header t,x1,...,xN[,S,min_gap[,R]] then one row per grid time, 17
/// significant digits.
void emit_trajectory_csv(const TrajectoryRecord& record, bool with_observables,
                         std::ostream& sink);

void emit_trajectory_json(const TrajectoryRecord& record, std::ostream& sink);

/// Single JSON object with sorted keys
/// {failures, n_paths, plan_echo, seeds, tests}.
void emit_report_json(const McReport& report, std::ostream& sink);

/// Inverse of emit_report_json.
McReport parse_report_json(const std::string& text);

struct IdentityCheckResult {
  int samples = 0;
  double max_qv_ratio = 0.0;     ///< max residual / (N^2 max|x|^2)
  double max_drift_ratio = 0.0;  ///< max residual / N^3
  double max_qv_residual = 0.0;
  double max_drift_residual = 0.0;
};

/// Fuzzes both identity residuals over seeded random configurations with
/// N in {3..8} and minimum gap >= 1e-3.
IdentityCheckResult run_identity_check(std::uint64_t seed, int samples);

/// Runs a parsed configuration. Returns the process exit code: 0 when all
/// checks pass, 1 when a check fails.
int run(const CliConfig& config, std::ostream& out, std::ostream& log);

/// Full entry point: parse, run, map errors to exit codes.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace repel::cli
