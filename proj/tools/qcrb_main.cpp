// Command-line front end: builds a JobSpec from flags (or loads one from a
// JSON config) and prints the result envelope, optionally writing JSON + CSV
// artifacts for offline plotting.

#include <deque>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qcrb/cli.hpp"
#include "qcrb/errors.hpp"
#include "qcrb/io.hpp"

namespace {

struct CommonFlags {
  std::string model, theta, loss, prior, out, sweep_axis, values;
  std::string n, reps, seed;
  std::vector<std::string> params;
  std::map<std::string, std::string> extra;
};

std::string& slot(CommonFlags& f, const std::string& key) { return f.extra[key]; }

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--model", f.model, "Model reference (builtin name or JSON file)");
  cmd->add_option("--theta", f.theta, "Comma-separated parameter point");
  cmd->add_option("--loss", f.loss, "fidelity | identity | quadratic:<file>");
  cmd->add_option("--prior", f.prior, "Prior reference (builtin spec or JSON file)");
  cmd->add_option("--N", f.n, "Number of copies");
  cmd->add_option("--reps", f.reps, "Monte Carlo repetitions");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--out", f.out, "Output path for the JSON envelope (CSV sibling when tabular)");
  cmd->add_option("--param", f.params, "Extra key=value parameter (repeatable)");
  cmd->add_option("--sweep", f.sweep_axis, "Sweep this numeric parameter");
  cmd->add_option("--values", f.values, "Comma-separated sweep values");
}

qcrb::cli::JobSpec build_spec(qcrb::cli::Command command, const CommonFlags& f) {
  qcrb::cli::JobSpec spec;
  spec.command = command;
  spec.model_ref = f.model;
  spec.output_path = f.out;
  if (!f.seed.empty()) {
    spec.seed = static_cast<std::uint64_t>(std::stoull(f.seed));
  }
  if (!f.theta.empty()) spec.parameters["theta"] = f.theta;
  if (!f.loss.empty()) spec.parameters["loss"] = f.loss;
  if (!f.prior.empty()) spec.parameters["prior"] = f.prior;
  if (!f.n.empty()) spec.parameters["N"] = f.n;
  if (!f.reps.empty()) spec.parameters["reps"] = f.reps;
  for (const auto& [key, value] : f.extra) {
    if (!value.empty()) spec.parameters[key] = value;
  }
  for (const std::string& kv : f.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw qcrb::DomainError("--param expects key=value, got '" + kv + "'");
    }
    spec.parameters[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return spec;
}

int execute(const qcrb::cli::JobSpec& spec, const std::string& sweep_axis,
            const std::string& values_text) {
  if (!sweep_axis.empty()) {
    qcrb::RealVector parsed = qcrb::cli::parse_real_list(values_text);
    std::vector<double> values(parsed.data(), parsed.data() + parsed.size());
    qcrb::io::CsvTable table = qcrb::cli::sweep(spec, sweep_axis, values);
    if (!spec.output_path.empty()) {
      table.write_file(spec.output_path);
    } else {
      table.write(std::cout);
    }
    return 0;
  }
  qcrb::cli::ResultEnvelope env = qcrb::cli::run_job(spec);
  std::cout << env.to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum estimation bounds and Monte Carlo verification"};
  app.require_subcommand(1);

  std::deque<CommonFlags> flag_sets;
  std::vector<std::pair<CLI::App*, qcrb::cli::Command>> subs;
  auto add_command = [&](const std::string& name, const std::string& desc) -> std::pair<CLI::App*, CommonFlags*> {
    CLI::App* cmd = app.add_subcommand(name, desc);
    flag_sets.emplace_back();
    CommonFlags& f = flag_sets.back();
    add_common(cmd, f);
    subs.emplace_back(cmd, qcrb::cli::parse_command(name));
    return {cmd, &f};
  };

  {
    auto [cmd, f] = add_command("bound", "Variance lower bound at a parameter point");
    cmd->add_option("--r", slot(*f, "r"), "Radius along --direction (default: last axis)");
    cmd->add_option("--direction", slot(*f, "direction"), "Direction for --r");
  }
  {
    auto [cmd, f] = add_command("dual-check", "Dual information cap against random POVMs");
    cmd->add_option("--r", slot(*f, "r"), "Radius along --direction");
    cmd->add_option("--direction", slot(*f, "direction"), "Direction for --r");
    cmd->add_option("--n-povms", slot(*f, "n_povms"), "Number of random POVMs");
    cmd->add_option("--n-outcomes", slot(*f, "n_outcomes"), "Outcomes per random POVM");
  }
  {
    auto [cmd, f] = add_command("van-trees", "Bayesian lower bound on N x Bayes risk");
    cmd->add_option("--grid-level", slot(*f, "grid_level"), "Theta-grid CSV refinement (0-3)");
  }
  {
    auto [cmd, f] = add_command("gaussian-minimax", "Minimax risk of a Gaussian shift model");
    cmd->add_option("--modes", slot(*f, "modes"), "Number of bosonic modes");
    cmd->add_option("--classical", slot(*f, "classical"), "Number of classical lines");
    cmd->add_option("--V", slot(*f, "V"), "Covariance (cI shorthand, inline JSON, or file)");
    cmd->add_option("--G", slot(*f, "G"), "Loss weight (cI shorthand, inline JSON, or file)");
    cmd->add_option("--L", slot(*f, "L"), "Mean map (default identity)");
    cmd->add_option("--samples", slot(*f, "samples"), "Empirical-risk sample count");
  }
  {
    auto [cmd, f] = add_command("qlan-clt", "Collective-observable CLT check");
    cmd->add_option("--mu", slot(*f, "mu"), "Reference eigenvalues, decreasing");
    cmd->add_option("--shift", slot(*f, "h"), "Local parameter (u..., Re z, Im z, ...)");
  }
  {
    auto [cmd, f] = add_command("risk-sim", "Monte Carlo risk vs. matching lower bound");
    cmd->add_option("--scheme", slot(*f, "scheme"),
                    "random_basis | pauli6 | basis | spin:<x,y,z> | two_step:<fraction>");
    cmd->add_option("--estimator", slot(*f, "estimator"), "mle | bayes");
  }
  {
    auto [cmd, f] = add_command("covariant-check", "Random-basis average information check");
    cmd->add_option("--d", slot(*f, "d"), "Hilbert space dimension");
    cmd->add_option("--n-bases", slot(*f, "n_bases"), "Number of random bases");
  }

  std::string job_path, run_out;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute a JobSpec JSON config file");
  run_cmd->add_option("--job", job_path, "Path to the JobSpec JSON")->required();
  run_cmd->add_option("--out", run_out, "Override the spec's output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      qcrb::io::json j;
      try {
        j = qcrb::io::json::parse(qcrb::io::read_file(job_path));
      } catch (const qcrb::io::json::exception& e) {
        throw qcrb::DomainError(std::string("job file: invalid JSON: ") + e.what());
      }
      qcrb::cli::JobSpec spec = qcrb::cli::JobSpec::from_json(j);
      if (!run_out.empty()) spec.output_path = run_out;
      return execute(spec, "", "");
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i].first->parsed()) {
        const CommonFlags& f = flag_sets[i];
        return execute(build_spec(subs[i].second, f), f.sweep_axis, f.values);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return qcrb::cli::exit_code_for(e);
  }
  return 1;
}
