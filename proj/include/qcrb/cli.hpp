#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcrb/core.hpp"
#include "qcrb/io.hpp"
#include "qcrb/vantrees.hpp"

namespace qcrb::cli {

enum class Command {
  Bound,
  DualCheck,
  VanTrees,
  GaussianMinimax,
  QlanClt,
  RiskSim,
  CovariantCheck,
};

std::string command_name(Command command);
/// DomainError on an unknown command name.
Command parse_command(const std::string& name);

/// One batch job: a command, a model reference, command-specific string
/// parameters, and a seed.  The JSON form doubles as the config-file format.
struct JobSpec {
  Command command = Command::Bound;
  std::string model_ref;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::string output_path;

  io::json to_json() const;
  static JobSpec from_json(const io::json& j);
  /// SHA-1 of the canonical job JSON (output path excluded: it does not
  /// affect the numbers).
  std::string input_hash() const;
};

struct ResultEnvelope {
  io::json job;
  std::string input_hash;
  io::json payload;
  io::json diagnostics;
  double wall_seconds = 0.0;
  /// Tabular sibling written next to the JSON envelope (empty for scalar
  /// commands).
  io::CsvTable table;

  io::json to_json() const;
};

// ---- reference resolution ---------------------------------------------

/// "full_bloch" | "equatorial" | "bloch_line" | "pure_state(d)" |
/// "diagonal(mu1,mu2,...)" | path to a JSON affine family.
ParametricModel resolve_model(const std::string& model_ref);

/// Affine family rho(theta) = rho0 + sum_i theta_i G_i from
/// {"name", "rho0", "generators", "domain": {"kind","radius"|"lo","hi"}}.
ParametricModel model_from_json(const io::json& j);

/// "fidelity" | "identity" | "quadratic:<file>" (file holds {"g_tilde": [[..]]}).
vantrees::LossSpec resolve_loss(const ParametricModel& model,
                                const std::string& loss_ref);

/// "cos2_box:<lo>:<hi>" | "ball_bump:<dim>:<radius>" |
/// "uniform_ball:<dim>:<radius>" | path to a JSON prior spec.
vantrees::Prior resolve_prior(const std::string& prior_ref);

/// Comma-separated doubles ("0,0,0.5").
RealVector parse_real_list(const std::string& text);

/// "I" | "<c>I" | inline JSON rows | path to a JSON file holding rows.
RealMatrix parse_matrix_ref(const std::string& text, int dim);

// ---- execution ----------------------------------------------------------

/// Dispatch to the owning module, re-validate the payload, and, when
/// output_path is set, write the JSON envelope plus a CSV sibling for
/// tabular results.
ResultEnvelope run_job(const JobSpec& spec);

/// One row per value of `axis` substituted into the job parameters, in input
/// order.  Per-row failures land in the `error` column and the sweep
/// continues.  Columns: axis, sorted scalar payload keys, error.
io::CsvTable sweep(const JobSpec& spec, const std::string& axis,
                   const std::vector<double>& values);

/// Re-check an emitted payload against the producing module's invariants
/// (round-trip guard).  Throws NumericalError on violation.
void validate_payload(Command command, const io::json& payload);

/// 0 success, 2 validation/input errors, 3 solver or numerical failures.
int exit_code_for(const std::exception& error);

}  // namespace qcrb::cli
