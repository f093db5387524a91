#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "oracles.hpp"
#include "qcrb/cli.hpp"
#include "qcrb/errors.hpp"
#include "qcrb/fisher.hpp"
#include "qcrb/holevo.hpp"
#include "qcrb/io.hpp"
#include "qcrb/models.hpp"

using namespace qcrb;

namespace {

cli::JobSpec bound_job(const std::string& theta) {
  cli::JobSpec spec;
  spec.command = cli::Command::Bound;
  spec.model_ref = "full_bloch";
  spec.parameters["theta"] = theta;
  spec.parameters["loss"] = "fidelity";
  spec.seed = 1;
  return spec;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("job specs round-trip through json and hash canonically") {
  cli::JobSpec spec = bound_job("0,0,0.5");
  spec.output_path = "/tmp/somewhere.json";
  const io::json j = spec.to_json();
  const cli::JobSpec back = cli::JobSpec::from_json(j);
  CHECK(back.command == spec.command);
  CHECK(back.model_ref == spec.model_ref);
  CHECK(back.parameters.at("theta") == "0,0,0.5");
  CHECK(back.seed == spec.seed);
  CHECK(back.output_path == spec.output_path);

  // The hash ignores the output path but not the inputs.
  cli::JobSpec moved = spec;
  moved.output_path = "/tmp/elsewhere.json";
  CHECK(moved.input_hash() == spec.input_hash());
  cli::JobSpec changed = spec;
  changed.parameters["theta"] = "0,0,0.6";
  CHECK(changed.input_hash() != spec.input_hash());
}

TEST_CASE("command names round-trip and unknown names are rejected") {
  for (cli::Command c :
       {cli::Command::Bound, cli::Command::DualCheck, cli::Command::VanTrees,
        cli::Command::GaussianMinimax, cli::Command::QlanClt, cli::Command::RiskSim,
        cli::Command::CovariantCheck}) {
    CHECK(cli::parse_command(cli::command_name(c)) == c);
  }
  CHECK_THROWS_AS(cli::parse_command("frobnicate"), DomainError);
}

TEST_CASE("model references resolve to builtins and files") {
  CHECK(cli::resolve_model("full_bloch").param_dim() == 3);
  CHECK(cli::resolve_model("equatorial").param_dim() == 2);
  CHECK(cli::resolve_model("bloch_line").param_dim() == 1);
  CHECK(cli::resolve_model("pure_state(3)").param_dim() == 4);
  CHECK(cli::resolve_model("diagonal(0.5,0.3,0.2)").param_dim() == 2);
  CHECK_THROWS_AS(cli::resolve_model("no_such_model"), DomainError);

  // Custom affine family equivalent to the z line.
  const std::string path = write_temp("qcrb_model.json", R"({
    "name": "z_line",
    "rho0": [[0.5, 0.0], [0.0, 0.5]],
    "generators": [[[0.5, 0.0], [0.0, -0.5]]],
    "domain": {"kind": "ball", "radius": 1.0}
  })");
  const ParametricModel custom = cli::resolve_model(path);
  CHECK(custom.param_dim() == 1);
  RealVector t(1);
  t << 0.4;
  CHECK(std::abs(custom.state(t).matrix()(0, 0).real() - 0.7) < 1e-12);
  const double h = fisher::helstrom_info(custom, t).matrix(0, 0);
  CHECK(h == doctest::Approx(1.0 / (1.0 - 0.16)).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("loss and prior references resolve") {
  const ParametricModel model = cli::resolve_model("bloch_line");
  CHECK(cli::resolve_loss(model, "fidelity").q == 2);
  CHECK(cli::resolve_loss(model, "identity").q == 1);
  CHECK_THROWS_AS(cli::resolve_loss(model, "bogus"), DomainError);

  const auto prior = cli::resolve_prior("cos2_box:-0.5:0.5");
  CHECK(prior.support.contains(RealVector::Zero(1)));
  CHECK(cli::resolve_prior("ball_bump:3:0.8").support.contains(RealVector::Zero(3)));
  CHECK_THROWS_AS(cli::resolve_prior("nope:1:2"), DomainError);
}

TEST_CASE("real lists and matrix references parse") {
  const RealVector v = cli::parse_real_list("0.1, -2, 3e-1");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == -2.0);
  CHECK_THROWS_AS(cli::parse_real_list("1,,2"), DomainError);

  CHECK((cli::parse_matrix_ref("I", 3) - RealMatrix::Identity(3, 3)).norm() == 0.0);
  CHECK(cli::parse_matrix_ref("0.5I", 2)(0, 0) == 0.5);
  const RealMatrix inline_m = cli::parse_matrix_ref("[[1,2],[3,4]]", 2);
  CHECK(inline_m(1, 0) == 3.0);
  CHECK_THROWS_AS(cli::parse_matrix_ref("[[1,2]]", 2), DimensionError);
}

TEST_CASE("bound jobs reproduce the known value and validate their payload") {
  const auto envelope = cli::run_job(bound_job("0,0,0.5"));
  CHECK(std::abs(envelope.payload.at("value").get<double>() - 1.0) < 1e-3);
  CHECK(envelope.payload.at("converged").get<bool>());
  CHECK(envelope.wall_seconds >= 0.0);
  CHECK(envelope.input_hash.size() == 40);
  // Re-validation of the emitted payload has already run inside run_job;
  // run it once more on the round-tripped JSON.
  const io::json copy = io::json::parse(envelope.payload.dump());
  cli::validate_payload(cli::Command::Bound, copy);
}

TEST_CASE("bound jobs fail cleanly outside the model domain") {
  try {
    cli::run_job(bound_job("0,0,1.5"));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(cli::exit_code_for(e) == 2);
  }
}

TEST_CASE("unknown models and malformed parameters map to exit code 2") {
  cli::JobSpec spec = bound_job("0,0,0.5");
  spec.model_ref = "no_such";
  try {
    cli::run_job(spec);
    FAIL("expected a domain error");
  } catch (const std::exception& e) {
    CHECK(cli::exit_code_for(e) == 2);
  }
  CHECK(cli::exit_code_for(DimensionError("x")) == 2);
  CHECK(cli::exit_code_for(UncertaintyError("x")) == 2);
  CHECK(cli::exit_code_for(ConvergenceError("x")) == 3);
  CHECK(cli::exit_code_for(NumericalError("x")) == 3);
}

TEST_CASE("gaussian jobs reproduce the closed-form risk") {
  cli::JobSpec spec;
  spec.command = cli::Command::GaussianMinimax;
  spec.parameters["modes"] = "1";
  spec.parameters["V"] = "0.5I";
  spec.parameters["G"] = "I";
  const auto envelope = cli::run_job(spec);
  CHECK(envelope.payload.at("risk").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(envelope.payload.at("closed_form").get<bool>());
}

TEST_CASE("run_job writes the envelope, plus a csv sibling for tabular jobs") {
  cli::JobSpec spec = bound_job("0,0,0.3");
  spec.output_path = "/tmp/qcrb_cli_out.json";
  const auto envelope = cli::run_job(spec);
  (void)envelope;
  const std::string written = io::read_file("/tmp/qcrb_cli_out.json");
  const io::json parsed = io::json::parse(written);
  CHECK(parsed.at("payload").at("value").get<double>() ==
        doctest::Approx(0.9).epsilon(1e-3));
  CHECK(parsed.at("input_hash").get<std::string>().size() == 40);
  // Scalar commands have no table, so no sibling appears.
  CHECK_THROWS(io::read_file("/tmp/qcrb_cli_out.csv"));
  std::remove("/tmp/qcrb_cli_out.json");

  cli::JobSpec clt;
  clt.command = cli::Command::QlanClt;
  clt.parameters["mu"] = "0.7,0.3";
  clt.parameters["N"] = "200";
  clt.parameters["reps"] = "1000";
  clt.seed = 11;
  clt.output_path = "/tmp/qcrb_cli_clt.json";
  cli::run_job(clt);
  const std::string csv = io::read_file("/tmp/qcrb_cli_clt.csv");
  CHECK(csv.rfind("observable,", 0) == 0);
  CHECK(csv.find("C1") != std::string::npos);
  std::remove("/tmp/qcrb_cli_clt.json");
  std::remove("/tmp/qcrb_cli_clt.csv");
}

TEST_CASE("sweeps substitute the axis and keep scalar payload columns") {
  cli::JobSpec spec;
  spec.command = cli::Command::Bound;
  spec.model_ref = "full_bloch";
  spec.parameters["loss"] = "fidelity";
  spec.parameters["r"] = "0.5";
  const std::vector<double> values = {0.1, 0.3, 0.5, 0.7, 0.9};
  const io::CsvTable table = cli::sweep(spec, "r", values);
  REQUIRE(table.rows.size() == 5);
  int value_col = -1, axis_col = -1, error_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "value") value_col = static_cast<int>(c);
    if (table.header[c] == "r") axis_col = static_cast<int>(c);
    if (table.header[c] == "error") error_col = static_cast<int>(c);
  }
  REQUIRE(value_col >= 0);
  REQUIRE(axis_col == 0);
  REQUIRE(error_col >= 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(std::stod(table.rows[i][axis_col]) == values[i]);
    CHECK(table.rows[i][error_col].empty());
    const double expect = (3.0 + 2.0 * values[i]) / 4.0;
    CHECK(std::abs(std::stod(table.rows[i][value_col]) - expect) < 1e-3);
  }
}

TEST_CASE("failed sweep rows carry errors while the sweep continues") {
  cli::JobSpec spec;
  spec.command = cli::Command::Bound;
  spec.model_ref = "full_bloch";
  spec.parameters["loss"] = "fidelity";
  const io::CsvTable table = cli::sweep(spec, "r", {0.5, 1.5, 0.7});
  REQUIRE(table.rows.size() == 3);
  const std::size_t error_col = table.header.size() - 1;
  CHECK(table.rows[0][error_col].empty());
  CHECK(!table.rows[1][error_col].empty());
  CHECK(table.rows[2][error_col].empty());
}

TEST_CASE("an empty sweep produces a header-only table") {
  cli::JobSpec spec;
  spec.command = cli::Command::Bound;
  spec.model_ref = "full_bloch";
  spec.parameters["loss"] = "fidelity";
  const io::CsvTable table = cli::sweep(spec, "r", {});
  CHECK(table.rows.empty());
  REQUIRE(!table.header.empty());
  CHECK(table.header.front() == "r");
  CHECK(table.header.back() == "error");
}

TEST_CASE("identical jobs render byte-identical csv tables") {
  cli::JobSpec spec;
  spec.command = cli::Command::Bound;
  spec.model_ref = "full_bloch";
  spec.parameters["loss"] = "fidelity";
  const auto a = cli::sweep(spec, "r", {0.1, 0.5, 0.9});
  const auto b = cli::sweep(spec, "r", {0.1, 0.5, 0.9});
  CHECK(a.to_string() == b.to_string());
}

TEST_CASE("risk sweeps show the gap to the limit closing with N") {
  cli::JobSpec spec;
  spec.command = cli::Command::RiskSim;
  spec.model_ref = "pure_state(2)";
  spec.parameters["theta"] = "0.15,-0.1";
  spec.parameters["scheme"] = "random_basis";
  spec.parameters["estimator"] = "mle";
  spec.parameters["loss"] = "fidelity";
  spec.parameters["reps"] = "400";
  spec.seed = 5;
  const io::CsvTable table = cli::sweep(spec, "N", {100, 1000, 10000});
  REQUIRE(table.rows.size() == 3);
  int risk_col = -1, se_col = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "empirical_risk") risk_col = static_cast<int>(c);
    if (table.header[c] == "std_error") se_col = static_cast<int>(c);
  }
  REQUIRE(risk_col >= 0);
  REQUIRE(se_col >= 0);
  double previous_gap = 1e9;
  for (std::size_t i = 0; i < 3; ++i) {
    const double risk = std::stod(table.rows[i][risk_col]);
    const double se = std::stod(table.rows[i][se_col]);
    const double gap = std::abs(risk - 1.0);
    CHECK(gap < previous_gap + 3.0 * se);
    previous_gap = gap;
  }
  CHECK(previous_gap < 0.2);
}

TEST_CASE("config files run through the same dispatcher") {
  const std::string path = write_temp("qcrb_job.json", R"({
    "command": "bound",
    "model": "equatorial",
    "parameters": {"theta": "0.2,0.3", "loss": "fidelity"},
    "seed": 3
  })");
  const io::json j = io::json::parse(io::read_file(path));
  const cli::JobSpec spec = cli::JobSpec::from_json(j);
  const auto envelope = cli::run_job(spec);
  CHECK(std::abs(envelope.payload.at("value").get<double>() - 0.5) < 1e-3);
  std::remove(path.c_str());
}

#ifdef QCRB_CLI_PATH
TEST_CASE("the command-line binary honors the exit-code contract") {
  const std::string exe = QCRB_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = exe + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("bound --model full_bloch --theta 0,0,0.5 --loss fidelity") == 0);
  CHECK(run("bound --model full_bloch --theta 0,0,1.5 --loss fidelity") == 2);
  CHECK(run("bound --model nonsense --theta 0.1 --loss fidelity") == 2);
  CHECK(run("gaussian-minimax --modes 1 --param V=0.5I --param G=I") == 0);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);
}
#endif
