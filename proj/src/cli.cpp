#include "qcrb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcrb/errors.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/gaussian.hpp"
#include "qcrb/holevo.hpp"
#include "qcrb/linalg.hpp"
#include "qcrb/models.hpp"
#include "qcrb/qlan.hpp"
#include "qcrb/rng.hpp"
#include "qcrb/simulate.hpp"

namespace qcrb::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, delim)) parts.push_back(token);
  if (!s.empty() && s.back() == delim) parts.push_back("");
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(trim(text), &pos);
    if (pos != trim(text).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw DomainError(what + ": cannot parse '" + text + "' as a number");
  }
}

long parse_long(const std::string& text, const std::string& what) {
  double v = parse_double(text, what);
  if (std::floor(v) != v || std::abs(v) > 9e15) {
    throw DomainError(what + ": '" + text + "' is not an integer");
  }
  return static_cast<long>(v);
}

std::string param_or(const JobSpec& spec, const std::string& key,
                     const std::string& fallback) {
  auto it = spec.parameters.find(key);
  return it == spec.parameters.end() ? fallback : it->second;
}

std::string require_param(const JobSpec& spec, const std::string& key) {
  auto it = spec.parameters.find(key);
  if (it == spec.parameters.end()) {
    throw DomainError(command_name(spec.command) + ": missing required parameter '" +
                      key + "'");
  }
  return it->second;
}

bool has_param(const JobSpec& spec, const std::string& key) {
  return spec.parameters.count(key) > 0;
}

io::json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return io::json::parse(text);
  } catch (const io::json::exception& e) {
    throw DomainError(what + ": invalid JSON: " + e.what());
  }
}

io::json load_json_file(const std::string& path, const std::string& what) {
  return parse_json_text(io::read_file(path), what + " '" + path + "'");
}

/// theta from an explicit list, or r * direction (default: last axis).
RealVector theta_from_params(const JobSpec& spec, const ParametricModel& model) {
  const int p = model.param_dim();
  if (has_param(spec, "theta")) {
    RealVector theta = parse_real_list(require_param(spec, "theta"));
    if (theta.size() != p) {
      throw DimensionError("theta has " + std::to_string(theta.size()) +
                           " entries; model '" + model.name() + "' expects " +
                           std::to_string(p));
    }
    return theta;
  }
  if (has_param(spec, "r")) {
    double r = parse_double(require_param(spec, "r"), "r");
    RealVector dir;
    if (has_param(spec, "direction")) {
      dir = parse_real_list(require_param(spec, "direction"));
      if (dir.size() != p) throw DimensionError("direction size mismatch");
      if (dir.norm() <= 0) throw DomainError("direction must be nonzero");
      dir /= dir.norm();
    } else {
      dir = RealVector::Zero(p);
      dir[p - 1] = 1.0;
    }
    return r * dir;
  }
  throw DomainError(command_name(spec.command) +
                    ": need parameter 'theta' or 'r' [+ 'direction']");
}

RealVector domain_center(const Domain& domain) {
  RealVector lo, hi;
  domain.bounding_box(lo, hi);
  return 0.5 * (lo + hi);
}

io::json solver_diag_json(const SolverDiagnostics& d) {
  io::json j;
  j["iterations"] = d.iterations;
  j["stages_completed"] = d.stages_completed;
  j["constraint_violation"] = d.constraint_violation;
  j["final_objective_delta"] = d.final_objective_delta;
  j["converged"] = d.converged;
  return j;
}

std::string csv_cell(const io::json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

double symmetry_defect(const RealMatrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void check(bool ok, const std::string& message) {
  if (!ok) throw NumericalError("payload validation: " + message);
}

// ---- per-command execution ------------------------------------------------

void run_bound(const JobSpec& spec, ResultEnvelope& env) {
  ParametricModel model = resolve_model(spec.model_ref);
  RealVector theta = theta_from_params(spec, model);
  vantrees::LossSpec loss = resolve_loss(model, param_or(spec, "loss", "fidelity"));
  holevo::WeightMatrix weight(loss.g0(theta));
  holevo::HolevoSolution sol = holevo::holevo_bound(model, theta, weight);

  env.payload["model"] = model.name();
  env.payload["theta"] = io::to_json(theta);
  env.payload["theta_norm"] = theta.norm();
  env.payload["loss"] = loss.name;
  env.payload["weight"] = io::to_json(weight.matrix);
  env.payload["value"] = sol.value;
  env.payload["dual_value"] = sol.dual_value;
  env.payload["v_opt"] = io::to_json(sol.v_opt);
  env.payload["dual_k"] = io::to_json(sol.dual_k);
  env.payload["converged"] = sol.convergence.converged;
  env.diagnostics["solver"] = solver_diag_json(sol.convergence);
}

void run_dual_check(const JobSpec& spec, ResultEnvelope& env) {
  ParametricModel model = resolve_model(spec.model_ref);
  RealVector theta = theta_from_params(spec, model);
  vantrees::LossSpec loss = resolve_loss(model, param_or(spec, "loss", "fidelity"));
  long n_povms = parse_long(param_or(spec, "n_povms", "100"), "n_povms");
  long n_outcomes = parse_long(param_or(spec, "n_outcomes", "4"), "n_outcomes");
  if (n_povms < 1) throw DomainError("n_povms must be positive");

  holevo::WeightMatrix weight(loss.g0(theta));
  holevo::HolevoSolution sol = holevo::holevo_bound(model, theta, weight);
  auto [dual_k, cap] = holevo::dual_from_primal(sol, weight);

  const int d = model.state(theta).dim();
  Rng rng(spec.seed);
  std::vector<Povm> povms;
  povms.reserve(static_cast<std::size_t>(n_povms));
  for (long i = 0; i < n_povms; ++i) {
    povms.push_back(models::random_rank1_povm(d, static_cast<int>(n_outcomes), rng));
  }
  holevo::DualBoundReport report =
      holevo::verify_dual_bound(model, theta, dual_k.matrix, cap, povms);

  env.payload["model"] = model.name();
  env.payload["theta"] = io::to_json(theta);
  env.payload["loss"] = loss.name;
  env.payload["value"] = sol.value;
  env.payload["cap"] = report.cap;
  env.payload["max_value"] = report.max_value;
  env.payload["n_checked"] = static_cast<long>(report.n_checked);
  env.payload["tolerance"] = report.tolerance;
  env.payload["holds"] = report.holds;
  env.payload["dual_k"] = io::to_json(dual_k.matrix);
  env.diagnostics["solver"] = solver_diag_json(sol.convergence);
  env.diagnostics["argmax_povm"] = static_cast<long>(report.argmax);
}

void run_van_trees(const JobSpec& spec, ResultEnvelope& env) {
  ParametricModel model = resolve_model(spec.model_ref);
  vantrees::Prior prior = resolve_prior(require_param(spec, "prior"));
  vantrees::LossSpec loss = resolve_loss(model, param_or(spec, "loss", "fidelity"));
  long n_copies = parse_long(param_or(spec, "N", "10000"), "N");
  if (n_copies < 1) throw DomainError("N must be positive");

  vantrees::CField c_field = vantrees::optimal_c_field(model, loss);
  auto info_field = vantrees::dual_cap_info_field(model, loss);
  vantrees::VanTreesBreakdown breakdown =
      vantrees::van_trees_breakdown(model, prior, loss, c_field, n_copies, info_field);
  double asymptotic = vantrees::asymptotic_bound(model, prior, loss);

  env.payload["model"] = model.name();
  env.payload["prior"] = prior.name;
  env.payload["loss"] = loss.name;
  env.payload["n_copies"] = n_copies;
  env.payload["rhs"] = breakdown.rhs;
  env.payload["asymptotic"] = asymptotic;
  env.payload["numerator_mean"] = breakdown.numerator_mean;
  env.payload["info_mean"] = breakdown.info_mean;
  env.payload["j_value"] = breakdown.j_value;
  env.payload["nodes"] = breakdown.nodes;

  // theta-grid table: by default only for one-parameter supports (each row
  // costs a variance-bound solve); multi-parameter grids are opt-in.
  int level = -1;
  if (has_param(spec, "grid_level")) {
    level = static_cast<int>(parse_long(require_param(spec, "grid_level"), "grid_level"));
    if (level < 0 || level > 3) throw DomainError("grid_level must be in 0..3");
  } else if (prior.support.dim == 1) {
    level = 2;
  }
  if (level >= 0) {
    vantrees::QuadratureRule rule = vantrees::support_rule(prior.support, level);
    const int p = prior.support.dim;
    io::CsvTable table;
    table.header = {"node"};
    for (int i = 0; i < p; ++i) table.header.push_back("theta_" + std::to_string(i + 1));
    table.header.insert(table.header.end(),
                        {"weight", "c_g0", "prior_density", "running_mass",
                         "running_bound"});
    double running_mass = 0.0, running_bound = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const RealVector& node = rule.nodes[i];
      const double w = rule.weights[i];
      double density = prior.density(node);
      double c_g0 =
          holevo::holevo_bound(model, node, holevo::WeightMatrix(loss.g0(node))).value;
      running_mass += w * density;
      running_bound += w * density * c_g0;
      std::vector<std::string> row = {std::to_string(i)};
      for (int k = 0; k < p; ++k) row.push_back(io::format_double(node[k]));
      row.push_back(io::format_double(w));
      row.push_back(io::format_double(c_g0));
      row.push_back(io::format_double(density));
      row.push_back(io::format_double(running_mass));
      row.push_back(io::format_double(running_bound));
      table.rows.push_back(std::move(row));
    }
    env.table = std::move(table);
  }
}

void run_gaussian_minimax(const JobSpec& spec, ResultEnvelope& env) {
  long modes = parse_long(param_or(spec, "modes", "1"), "modes");
  long n_classical = parse_long(param_or(spec, "classical", "0"), "classical");
  if (modes < 0 || n_classical < 0 || modes + n_classical < 1) {
    throw DomainError("gaussian-minimax: need at least one mode or classical line");
  }
  const int m = static_cast<int>(2 * modes + n_classical);
  gaussian::SymplecticForm s =
      gaussian::SymplecticForm::standard(static_cast<int>(modes),
                                         static_cast<int>(n_classical));
  RealMatrix v = parse_matrix_ref(require_param(spec, "V"), m);
  gaussian::UncertaintyReport u = gaussian::uncertainty_check(v, s);
  if (!u.valid) {
    throw UncertaintyError("V violates the uncertainty relation (min eig " +
                           io::format_double(u.min_eigenvalue) + ")");
  }
  bool custom_l = has_param(spec, "L");
  RealMatrix l = custom_l
                     ? parse_matrix_ref(require_param(spec, "L"), 0)
                     : RealMatrix(RealMatrix::Identity(m, m));
  if (l.rows() != m) throw DimensionError("L must have one row per mode variable");
  const int k = static_cast<int>(l.cols());
  RealMatrix g = parse_matrix_ref(require_param(spec, "G"), k);

  gaussian::GaussianShift shift(s, v, l);
  double risk = 0.0;
  RealMatrix y_coeffs, aux;
  bool closed_form = false;
  if (modes == 1 && n_classical == 0 && !custom_l) {
    Eigen::Matrix2d g2 = g, v2 = v;
    gaussian::SingleModeResult res = gaussian::single_mode_minimax(g2, v2);
    risk = res.risk;
    y_coeffs = RealMatrix::Identity(2, 2);
    aux = res.y0;
    closed_form = true;
  } else {
    gaussian::MinimaxResult res = gaussian::multimode_minimax(shift, g);
    risk = res.risk;
    y_coeffs = res.measurement.y_coeffs;
    aux = res.measurement.aux_covariance;
    env.diagnostics["solver"] = solver_diag_json(res.convergence);
  }

  env.payload["modes"] = modes;
  env.payload["classical"] = n_classical;
  env.payload["G"] = io::to_json(g);
  env.payload["V"] = io::to_json(v);
  env.payload["risk"] = risk;
  env.payload["y_coeffs"] = io::to_json(y_coeffs);
  env.payload["aux_covariance"] = io::to_json(aux);
  env.payload["closed_form"] = closed_form;

  long n_samples = parse_long(param_or(spec, "samples", "0"), "samples");
  if (n_samples > 0) {
    gaussian::LinearMeasurement meas{y_coeffs, aux};
    Rng rng(spec.seed);
    RealVector h = RealVector::Zero(k);
    RealMatrix draws = gaussian::sample_covariant_measurement(
        shift, meas, h, static_cast<int>(n_samples), rng);
    double acc = 0.0;
    for (int i = 0; i < draws.rows(); ++i) {
      RealVector x = draws.row(i).transpose();
      acc += x.dot(g * x);
    }
    env.payload["empirical_risk"] = acc / static_cast<double>(draws.rows());
    env.payload["samples"] = n_samples;
  }
}

void run_qlan_clt(const JobSpec& spec, ResultEnvelope& env) {
  RealVector mu = parse_real_list(require_param(spec, "mu"));
  const int d = static_cast<int>(mu.size());
  if (d < 2) throw DomainError("qlan-clt: mu needs at least two eigenvalues");
  long n_copies = parse_long(param_or(spec, "N", "10000"), "N");
  int reps = static_cast<int>(parse_long(param_or(spec, "reps", "1000"), "reps"));

  qlan::LocalParams h = qlan::LocalParams::zero(d);
  if (has_param(spec, "h")) {
    RealVector packed = parse_real_list(require_param(spec, "h"));
    const int n_pairs = d * (d - 1) / 2;
    if (packed.size() != (d - 1) + 2 * n_pairs) {
      throw DimensionError("h must pack (u_1..u_{d-1}, Re z_1, Im z_1, ...): expected " +
                           std::to_string((d - 1) + 2 * n_pairs) + " entries");
    }
    for (int i = 0; i < d - 1; ++i) h.u[i] = packed[i];
    for (int j = 0; j < n_pairs; ++j) {
      h.zeta[j] = cxd(packed[d - 1 + 2 * j], packed[d - 1 + 2 * j + 1]);
    }
  }

  qlan::LocalModel local(mu, h, n_copies);
  std::vector<qlan::CltObservableReport> reports =
      qlan::clt_empirical_check(local, reps, spec.seed);

  env.payload["mu"] = io::to_json(mu);
  env.payload["n_copies"] = n_copies;
  env.payload["reps"] = reps;
  io::json observables = io::json::array();
  io::CsvTable table;
  table.header = {"observable",     "N",
                  "reps",           "predicted_mean",
                  "predicted_var",  "predicted_var_display",
                  "empirical_mean", "empirical_var",
                  "ks_distance",    "var_match"};
  for (const qlan::CltObservableReport& r : reports) {
    io::json o;
    o["label"] = r.label;
    o["predicted_mean"] = r.predicted_mean;
    o["predicted_var"] = r.predicted_var;
    o["predicted_var_display"] = r.predicted_var_display;
    o["empirical_mean"] = r.empirical_mean;
    o["empirical_var"] = r.empirical_var;
    o["ks_distance"] = r.ks_distance;
    o["var_match"] = r.var_match;
    observables.push_back(std::move(o));
    table.rows.push_back({r.label, std::to_string(n_copies), std::to_string(reps),
                          io::format_double(r.predicted_mean),
                          io::format_double(r.predicted_var),
                          io::format_double(r.predicted_var_display),
                          io::format_double(r.empirical_mean),
                          io::format_double(r.empirical_var),
                          io::format_double(r.ks_distance), r.var_match});
  }
  env.payload["observables"] = std::move(observables);
  env.table = std::move(table);
}

void run_risk_sim(const JobSpec& spec, ResultEnvelope& env) {
  ParametricModel model = resolve_model(spec.model_ref);
  vantrees::LossSpec loss = resolve_loss(model, param_or(spec, "loss", "fidelity"));
  long n_copies = parse_long(param_or(spec, "N", "1000"), "N");
  int reps = static_cast<int>(parse_long(param_or(spec, "reps", "200"), "reps"));

  const bool has_prior = has_param(spec, "prior");
  const bool has_theta = has_param(spec, "theta") || has_param(spec, "r");
  if (has_prior == has_theta) {
    throw DomainError("risk-sim: give exactly one of 'theta'/'r' or 'prior'");
  }

  simulate::ThetaOrPrior target = RealVector();
  RealVector probe;
  vantrees::Prior prior;
  if (has_prior) {
    prior = resolve_prior(require_param(spec, "prior"));
    if (prior.support.dim != model.param_dim()) {
      throw DimensionError("prior support dimension does not match the model");
    }
    target = prior;
    probe = domain_center(prior.support);
  } else {
    RealVector theta = theta_from_params(spec, model);
    target = theta;
    probe = theta;
  }
  const int d = model.state(probe).dim();

  std::string scheme_ref = param_or(spec, "scheme", "random_basis");
  simulate::MeasurementScheme scheme;
  if (scheme_ref == "random_basis") {
    scheme = simulate::MeasurementScheme::random_basis();
  } else if (scheme_ref == "pauli6") {
    if (d != 2) throw DimensionError("pauli6 scheme is qubit-only");
    scheme = simulate::MeasurementScheme::per_copy_fixed(models::pauli6_povm());
  } else if (scheme_ref == "basis") {
    scheme = simulate::MeasurementScheme::per_copy_fixed(models::basis_povm(d));
  } else if (scheme_ref.rfind("spin:", 0) == 0) {
    if (d != 2) throw DimensionError("spin scheme is qubit-only");
    RealVector axis = parse_real_list(scheme_ref.substr(5));
    if (axis.size() != 3 || axis.norm() <= 0) {
      throw DomainError("spin:<x,y,z> needs a nonzero 3-vector");
    }
    Eigen::Vector3d a = axis / axis.norm();
    scheme = simulate::MeasurementScheme::per_copy_fixed(models::spin_axis_povm(a));
  } else if (scheme_ref.rfind("two_step:", 0) == 0) {
    double fraction = parse_double(scheme_ref.substr(9), "two_step fraction");
    if (fraction <= 0.0 || fraction >= 1.0) {
      throw DomainError("two_step fraction must lie in (0, 1)");
    }
    scheme = simulate::two_step_scheme(model, loss, fraction);
  } else {
    throw DomainError("unknown scheme '" + scheme_ref + "'");
  }

  std::string est_ref = param_or(spec, "estimator", "mle");
  simulate::Estimator estimator;
  if (est_ref == "mle") {
    estimator = simulate::Estimator::mle();
  } else if (est_ref == "bayes") {
    if (!has_prior) throw DomainError("bayes estimator needs a 'prior' parameter");
    estimator = simulate::Estimator::bayes_mean(prior);
  } else {
    throw DomainError("unknown estimator '" + est_ref + "'");
  }

  simulate::RiskReport report = simulate::risk_experiment(
      model, target, scheme, estimator, loss, n_copies, reps, spec.seed);

  env.payload["model"] = model.name();
  env.payload["n_copies"] = report.n_copies;
  env.payload["reps"] = report.reps;
  env.payload["empirical_risk"] = report.empirical_risk;
  env.payload["std_error"] = report.std_error;
  env.payload["mean_loss"] = report.mean_loss;
  env.payload["bound"] = report.bound;
  env.payload["bound_kind"] = report.bound_kind;
  env.payload["bound_violation"] = report.bound_violation;
  env.payload["loss"] = report.loss_kind;
  env.payload["scheme"] = report.scheme;
  env.payload["estimator"] = report.estimator;
}

void run_covariant_check(const JobSpec& spec, ResultEnvelope& env) {
  int d = static_cast<int>(parse_long(param_or(spec, "d", "2"), "d"));
  int n_bases = static_cast<int>(parse_long(param_or(spec, "n_bases", "1000"), "n_bases"));
  simulate::CovariantInfoReport report =
      simulate::covariant_info_check(d, n_bases, spec.seed);
  env.payload["d"] = d;
  env.payload["n_bases"] = report.n_bases;
  env.payload["average_info"] = io::to_json(report.average_info);
  env.payload["helstrom"] = io::to_json(report.helstrom);
  env.payload["ratio"] = io::to_json(report.ratio);
  env.payload["trace_h_inv_info"] = report.trace_h_inv_info;
  env.payload["max_single_trace"] = report.max_single_trace;
}

}  // namespace

std::string command_name(Command command) {
  switch (command) {
    case Command::Bound: return "bound";
    case Command::DualCheck: return "dual-check";
    case Command::VanTrees: return "van-trees";
    case Command::GaussianMinimax: return "gaussian-minimax";
    case Command::QlanClt: return "qlan-clt";
    case Command::RiskSim: return "risk-sim";
    case Command::CovariantCheck: return "covariant-check";
  }
  throw DomainError("unreachable command enum");
}

Command parse_command(const std::string& name) {
  static const std::map<std::string, Command> table = {
      {"bound", Command::Bound},
      {"dual-check", Command::DualCheck},
      {"van-trees", Command::VanTrees},
      {"gaussian-minimax", Command::GaussianMinimax},
      {"qlan-clt", Command::QlanClt},
      {"risk-sim", Command::RiskSim},
      {"covariant-check", Command::CovariantCheck},
  };
  auto it = table.find(name);
  if (it == table.end()) throw DomainError("unknown command '" + name + "'");
  return it->second;
}

io::json JobSpec::to_json() const {
  io::json j;
  j["command"] = command_name(command);
  j["model"] = model_ref;
  io::json params = io::json::object();
  for (const auto& [key, value] : parameters) params[key] = value;
  j["parameters"] = std::move(params);
  j["seed"] = seed;
  if (!output_path.empty()) j["output_path"] = output_path;
  return j;
}

JobSpec JobSpec::from_json(const io::json& j) {
  JobSpec spec;
  if (!j.contains("command")) throw DomainError("job spec: missing 'command'");
  spec.command = parse_command(j.at("command").get<std::string>());
  spec.model_ref = j.value("model", std::string());
  if (j.contains("parameters")) {
    const io::json& params = j.at("parameters");
    if (!params.is_object()) throw DomainError("job spec: 'parameters' must be an object");
    for (const auto& [key, value] : params.items()) {
      spec.parameters[key] =
          value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  if (j.contains("seed")) {
    const io::json& seed = j.at("seed");
    spec.seed = seed.is_string()
                    ? static_cast<std::uint64_t>(
                          parse_long(seed.get<std::string>(), "seed"))
                    : seed.get<std::uint64_t>();
  }
  spec.output_path = j.value("output_path", std::string());
  return spec;
}

std::string JobSpec::input_hash() const {
  io::json j = to_json();
  j.erase("output_path");
  return io::sha1_hex(j.dump());
}

io::json ResultEnvelope::to_json() const {
  io::json j;
  j["job"] = job;
  j["input_hash"] = input_hash;
  j["payload"] = payload;
  j["diagnostics"] = diagnostics;
  j["wall_seconds"] = wall_seconds;
  return j;
}

ParametricModel resolve_model(const std::string& model_ref) {
  const std::string ref = trim(model_ref);
  if (ref.empty()) throw DomainError("empty model reference");
  if (ref == "full_bloch") return models::full_bloch();
  if (ref == "equatorial") return models::equatorial();
  if (ref == "bloch_line") return models::bloch_line();
  if (ref.rfind("pure_state(", 0) == 0 && ref.back() == ')') {
    long d = parse_long(ref.substr(11, ref.size() - 12), "pure_state dimension");
    if (d < 2) throw DomainError("pure_state(d) needs d >= 2");
    return models::pure_state(static_cast<int>(d));
  }
  if (ref.rfind("diagonal(", 0) == 0 && ref.back() == ')') {
    RealVector mu = parse_real_list(ref.substr(9, ref.size() - 10));
    return models::diagonal(mu);
  }
  return model_from_json(load_json_file(ref, "model"));
}

ParametricModel model_from_json(const io::json& j) {
  if (!j.contains("rho0") || !j.contains("generators")) {
    throw DomainError("custom model: need 'rho0' and 'generators'");
  }
  Matrix rho0 = io::complex_matrix_from_json(j.at("rho0"));
  if (rho0.rows() != rho0.cols()) throw DimensionError("rho0 must be square");
  const int d = static_cast<int>(rho0.rows());
  std::vector<Matrix> generators;
  for (const io::json& g : j.at("generators")) {
    Matrix gm = io::complex_matrix_from_json(g);
    if (gm.rows() != d || gm.cols() != d) {
      throw DimensionError("generator shape does not match rho0");
    }
    generators.push_back(std::move(gm));
  }
  const int p = static_cast<int>(generators.size());
  if (p < 1) throw DomainError("custom model: need at least one generator");

  Domain domain = Domain::all(p);
  if (j.contains("domain")) {
    const io::json& dj = j.at("domain");
    std::string kind = dj.value("kind", "all");
    if (kind == "ball") {
      domain = Domain::ball(p, dj.at("radius").get<double>());
    } else if (kind == "box") {
      domain = Domain::box(io::real_vector_from_json(dj.at("lo")),
                           io::real_vector_from_json(dj.at("hi")));
      if (domain.dim != p) throw DimensionError("domain box dimension mismatch");
    } else if (kind != "all") {
      throw DomainError("custom model: unknown domain kind '" + kind + "'");
    }
  }
  std::string name = j.value("name", "custom");

  auto state_fn = [rho0, generators](const RealVector& theta) {
    Matrix m = rho0;
    for (int i = 0; i < theta.size(); ++i) m += theta[i] * generators[i];
    return m;
  };
  auto deriv_fn = [generators](const RealVector&) { return generators; };
  return ParametricModel(p, domain, state_fn, deriv_fn, name);
}

vantrees::LossSpec resolve_loss(const ParametricModel& model,
                                const std::string& loss_ref) {
  const std::string ref = trim(loss_ref);
  if (ref.empty() || ref == "fidelity") return models::fidelity_loss(model);
  if (ref == "identity") return vantrees::identity_loss(model.param_dim());
  if (ref.rfind("quadratic:", 0) == 0) {
    io::json j = load_json_file(ref.substr(10), "quadratic loss");
    RealMatrix g = io::real_matrix_from_json(j.at("g_tilde"));
    const int p = model.param_dim();
    if (g.rows() != p || g.cols() != p) {
      throw DimensionError("g_tilde must be " + std::to_string(p) + "x" +
                           std::to_string(p));
    }
    if (symmetry_defect(g) > 1e-8) throw DomainError("g_tilde must be symmetric");
    if (linalg::min_eigenvalue(g.cast<cxd>()) <= 0) {
      throw DomainError("g_tilde must be positive definite");
    }
    vantrees::LossSpec loss = vantrees::identity_loss(p);
    loss.g_tilde = [g](const RealVector&) { return g; };
    loss.name = "quadratic";
    return loss;
  }
  throw DomainError("unknown loss '" + ref + "' (expect fidelity | identity | quadratic:<file>)");
}

vantrees::Prior resolve_prior(const std::string& prior_ref) {
  const std::string ref = trim(prior_ref);
  if (ref.empty()) throw PriorError("empty prior reference");
  std::vector<std::string> parts = split(ref, ':');
  if (parts[0] == "cos2_box" && parts.size() == 3) {
    return vantrees::cos2_box_prior(parse_real_list(parts[1]), parse_real_list(parts[2]));
  }
  if (parts[0] == "ball_bump" && parts.size() == 3) {
    return vantrees::ball_bump_prior(
        static_cast<int>(parse_long(parts[1], "prior dim")),
        parse_double(parts[2], "prior radius"));
  }
  if (parts[0] == "uniform_ball" && parts.size() == 3) {
    return vantrees::uniform_ball_prior(
        static_cast<int>(parse_long(parts[1], "prior dim")),
        parse_double(parts[2], "prior radius"));
  }
  if (parts.size() > 1 && (parts[0] == "cos2_box" || parts[0] == "ball_bump" ||
                           parts[0] == "uniform_ball")) {
    throw PriorError("malformed builtin prior '" + ref + "'");
  }
  io::json j = load_json_file(ref, "prior");
  std::string kind = j.value("kind", "");
  if (kind == "cos2_box") {
    return vantrees::cos2_box_prior(io::real_vector_from_json(j.at("lo")),
                                    io::real_vector_from_json(j.at("hi")));
  }
  if (kind == "ball_bump") {
    return vantrees::ball_bump_prior(j.at("dim").get<int>(), j.at("radius").get<double>());
  }
  if (kind == "uniform_ball") {
    return vantrees::uniform_ball_prior(j.at("dim").get<int>(),
                                        j.at("radius").get<double>());
  }
  throw PriorError("prior file: unknown kind '" + kind + "'");
}

RealVector parse_real_list(const std::string& text) {
  std::vector<std::string> parts = split(trim(text), ',');
  if (parts.size() == 1 && trim(parts[0]).empty()) parts.clear();
  RealVector v(static_cast<int>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<int>(i)] = parse_double(parts[i], "list entry " + std::to_string(i));
  }
  return v;
}

RealMatrix parse_matrix_ref(const std::string& text, int dim) {
  const std::string t = trim(text);
  if (t.empty()) throw DomainError("empty matrix reference");
  if (t.back() == 'I' && t.find('[') == std::string::npos &&
      t.find('/') == std::string::npos) {
    if (dim <= 0) throw DomainError("identity shorthand needs a known dimension");
    std::string prefix = trim(t.substr(0, t.size() - 1));
    if (!prefix.empty() && prefix.back() == '*') {
      prefix = trim(prefix.substr(0, prefix.size() - 1));
    }
    double c = prefix.empty() ? 1.0 : parse_double(prefix, "identity coefficient");
    return c * RealMatrix::Identity(dim, dim);
  }
  io::json j = (t.front() == '[') ? parse_json_text(t, "matrix")
                                  : load_json_file(t, "matrix");
  RealMatrix m = io::real_matrix_from_json(j);
  if (m.rows() != m.cols()) throw DimensionError("matrix must be square");
  if (dim > 0 && m.rows() != dim) {
    throw DimensionError("matrix must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
  return m;
}

ResultEnvelope run_job(const JobSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultEnvelope env;
  env.job = spec.to_json();
  env.input_hash = spec.input_hash();
  env.payload = io::json::object();
  env.diagnostics = io::json::object();

  switch (spec.command) {
    case Command::Bound: run_bound(spec, env); break;
    case Command::DualCheck: run_dual_check(spec, env); break;
    case Command::VanTrees: run_van_trees(spec, env); break;
    case Command::GaussianMinimax: run_gaussian_minimax(spec, env); break;
    case Command::QlanClt: run_qlan_clt(spec, env); break;
    case Command::RiskSim: run_risk_sim(spec, env); break;
    case Command::CovariantCheck: run_covariant_check(spec, env); break;
  }
  env.payload["command"] = command_name(spec.command);
  validate_payload(spec.command, env.payload);

  env.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!spec.output_path.empty()) {
    io::write_file(spec.output_path, env.to_json().dump(2) + "\n");
    if (!env.table.header.empty()) {
      std::string csv_path = spec.output_path;
      if (csv_path.size() > 5 && csv_path.substr(csv_path.size() - 5) == ".json") {
        csv_path = csv_path.substr(0, csv_path.size() - 5) + ".csv";
      } else {
        csv_path += ".csv";
      }
      env.table.write_file(csv_path);
    }
  }
  return env;
}

io::CsvTable sweep(const JobSpec& spec, const std::string& axis,
                   const std::vector<double>& values) {
  std::vector<io::json> payloads(values.size());
  std::vector<std::string> errors(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    JobSpec row_spec = spec;
    row_spec.parameters[axis] = io::format_double(values[i]);
    row_spec.output_path.clear();
    try {
      payloads[i] = run_job(row_spec).payload;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  std::set<std::string> keys;
  for (const io::json& payload : payloads) {
    if (!payload.is_object()) continue;
    for (const auto& [key, value] : payload.items()) {
      if (value.is_number() || value.is_boolean() || value.is_string()) {
        keys.insert(key);
      }
    }
  }

  io::CsvTable table;
  table.header.push_back(axis);
  for (const std::string& key : keys) table.header.push_back(key);
  table.header.push_back("error");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(io::format_double(values[i]));
    for (const std::string& key : keys) {
      if (payloads[i].is_object() && payloads[i].contains(key)) {
        row.push_back(csv_cell(payloads[i].at(key)));
      } else {
        row.push_back("");
      }
    }
    row.push_back(errors[i]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void validate_payload(Command command, const io::json& payload) {
  try {
    switch (command) {
      case Command::Bound: {
        const double value = payload.at("value").get<double>();
        const double dual = payload.at("dual_value").get<double>();
        check(value >= 0.0, "bound value must be nonnegative");
        check(std::abs(dual - value) <= 1e-6 * std::max(1.0, std::abs(value)),
              "dual value must match the primal value");
        RealMatrix v_opt = io::real_matrix_from_json(payload.at("v_opt"));
        RealMatrix dual_k = io::real_matrix_from_json(payload.at("dual_k"));
        check(symmetry_defect(v_opt) <= 1e-7, "v_opt must be symmetric");
        check(symmetry_defect(dual_k) <= 1e-7, "dual_k must be symmetric");
        check(linalg::min_eigenvalue(v_opt.cast<cxd>()) >= -1e-8, "v_opt must be PSD");
        break;
      }
      case Command::DualCheck: {
        const double cap = payload.at("cap").get<double>();
        const double max_value = payload.at("max_value").get<double>();
        const double tol = payload.at("tolerance").get<double>();
        const bool holds = payload.at("holds").get<bool>();
        check(payload.at("n_checked").get<long>() >= 1, "no POVMs checked");
        check(holds == (max_value <= cap + tol), "holds flag is inconsistent");
        break;
      }
      case Command::VanTrees: {
        const double rhs = payload.at("rhs").get<double>();
        const double asym = payload.at("asymptotic").get<double>();
        check(rhs >= 0.0, "bound must be nonnegative");
        check(payload.at("j_value").get<double>() >= 0.0, "prior information must be nonnegative");
        check(rhs <= asym * (1.0 + 1e-6) + 1e-12,
              "finite-N bound must not exceed the asymptotic bound");
        break;
      }
      case Command::GaussianMinimax: {
        const double risk = payload.at("risk").get<double>();
        RealMatrix g = io::real_matrix_from_json(payload.at("G"));
        RealMatrix v = io::real_matrix_from_json(payload.at("V"));
        RealMatrix y = io::real_matrix_from_json(payload.at("y_coeffs"));
        RealMatrix aux = io::real_matrix_from_json(payload.at("aux_covariance"));
        check(std::isfinite(risk) && risk >= 0.0, "risk must be finite and nonnegative");
        const double attained = (g * (y * v * y.transpose() + aux)).trace();
        check(std::abs(risk - attained) <= 1e-6 * std::max(1.0, std::abs(risk)),
              "returned measurement must attain the risk");
        break;
      }
      case Command::QlanClt: {
        for (const io::json& o : payload.at("observables")) {
          check(o.at("predicted_var").get<double>() > 0.0, "predicted variance must be positive");
          check(o.at("empirical_var").get<double>() >= 0.0, "empirical variance must be nonnegative");
          const double ks = o.at("ks_distance").get<double>();
          check(ks >= 0.0 && ks <= 1.0, "KS distance must lie in [0, 1]");
        }
        break;
      }
      case Command::RiskSim: {
        const double risk = payload.at("empirical_risk").get<double>();
        const double mean_loss = payload.at("mean_loss").get<double>();
        const double n = static_cast<double>(payload.at("n_copies").get<long>());
        const double se = payload.at("std_error").get<double>();
        const double bound = payload.at("bound").get<double>();
        check(se >= 0.0, "standard error must be nonnegative");
        check(bound >= 0.0, "bound must be nonnegative");
        check(std::abs(risk - n * mean_loss) <= 1e-9 * std::max(1.0, std::abs(risk)),
              "empirical risk must equal N x mean loss");
        check(payload.at("bound_violation").get<bool>() == (risk < bound - 3.0 * se),
              "bound_violation flag is inconsistent");
        break;
      }
      case Command::CovariantCheck: {
        RealMatrix avg = io::real_matrix_from_json(payload.at("average_info"));
        const double trace = payload.at("trace_h_inv_info").get<double>();
        const double max_single = payload.at("max_single_trace").get<double>();
        const double d = static_cast<double>(payload.at("d").get<long>());
        check(symmetry_defect(avg) <= 1e-7, "average information must be symmetric");
        check(trace <= max_single + 1e-9, "average trace cannot exceed the max single trace");
        check(max_single <= d - 1.0 + 1e-6, "single-basis trace must respect the d-1 cap");
        break;
      }
    }
  } catch (const io::json::exception& e) {
    throw NumericalError(std::string("payload validation: malformed payload: ") + e.what());
  }
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const DimensionError*>(&error) != nullptr ||
      dynamic_cast<const DomainError*>(&error) != nullptr ||
      dynamic_cast<const PriorError*>(&error) != nullptr ||
      dynamic_cast<const DegeneracyError*>(&error) != nullptr ||
      dynamic_cast<const UncertaintyError*>(&error) != nullptr) {
    return 2;
  }
  if (dynamic_cast<const io::json::exception*>(&error) != nullptr ||
      dynamic_cast<const std::invalid_argument*>(&error) != nullptr) {
    return 2;
  }
  return 3;
}

}  // namespace qcrb::cli
