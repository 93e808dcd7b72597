#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef ONEBIT_CLI_PATH
#define ONEBIT_CLI_PATH "onebit"
#endif
#ifndef ONEBIT_GOLDEN_DIR
#define ONEBIT_GOLDEN_DIR "golden"
#endif

namespace {

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run_cli(const std::string &args) {
  const std::string out_path = "cli_test_stdout.tmp";
  const std::string cmd =
      std::string(ONEBIT_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::remove(out_path.c_str());
  int code = -1;
#ifdef WEXITSTATUS
  if (status >= 0) code = WEXITSTATUS(status);
#else
  code = status;
#endif
  return {code, buf.str()};
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("sweep --help").exit_code == 0);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("sweep --no-such-flag").exit_code == 2);
  CHECK(run_cli("sweep --t-steps 0").exit_code == 2);
  CHECK(run_cli("sweep --lambda 1.5 --t-steps 3").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("numeric quality failures exit with code 3") {
  const CommandResult r =
      run_cli("meanfield --smax 4 --lmax 4 --time 50 --stop-tol 0");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("numeric error") != std::string::npos);
}

TEST_CASE("analytic sweep matches the golden file byte for byte") {
  const std::string out = "cli_golden_check.csv";
  const CommandResult r = run_cli(
      "sweep --dist exp --advice exact --lambda 0.8,0.9 --t-min 0.5 --t-max 2.5 "
      "--t-steps 5 --preempt both -o " +
      out);
  CHECK(r.exit_code == 0);
  CHECK(slurp(out) == slurp(std::string(ONEBIT_GOLDEN_DIR) + "/sweep_small.csv"));
  std::remove(out.c_str());
}

TEST_CASE("seeded simulation output is byte-stable") {
  const std::string args =
      "sweep --dist exp --advice exact --lambda 0.8 --t-min 1 --t-max 2 "
      "--t-steps 2 --preempt off --source sim --reps 3 --seed 555 -o ";
  CHECK(run_cli(args + "cli_rep_a.csv").exit_code == 0);
  CHECK(run_cli(args + "cli_rep_b.csv").exit_code == 0);
  const std::string a = slurp("cli_rep_a.csv");
  CHECK(!a.empty());
  CHECK(a == slurp("cli_rep_b.csv"));
  std::remove("cli_rep_a.csv");
  std::remove("cli_rep_b.csv");
}

TEST_CASE("json output is valid-ish and carries the same rows") {
  const CommandResult r = run_cli(
      "opt-threshold --lambda 0.9 --format json -o cli_opt.json");
  CHECK(r.exit_code == 0);
  const std::string body = slurp("cli_opt.json");
  CHECK(body.find("\"scenario\": \"opt-threshold\"") != std::string::npos);
  CHECK(body.find("\"mean_sojourn\"") != std::string::npos);
  std::remove("cli_opt.json");
}

TEST_CASE("config file supplies defaults and flags override it") {
  {
    std::ofstream cfg("cli_test.ini");
    cfg << "[sweep]\n"
        << "dist=exp\n"
        << "lambda=0.8\n"
        << "t-min=1\n"
        << "t-max=1\n"
        << "t-steps=1\n"
        << "preempt=off\n";
  }
  const CommandResult from_file = run_cli("sweep --config cli_test.ini");
  CHECK(from_file.exit_code == 0);
  CHECK(from_file.output.find("sweep,0.8,1,threshold,analytic") != std::string::npos);

  const CommandResult overridden =
      run_cli("sweep --config cli_test.ini --lambda 0.9");
  CHECK(overridden.exit_code == 0);
  CHECK(overridden.output.find("sweep,0.9,1,threshold,analytic") != std::string::npos);
  CHECK(overridden.output.find("sweep,0.8,") == std::string::npos);
  std::remove("cli_test.ini");
}

TEST_CASE("meanfield subcommand exports the fixed-point state") {
  const CommandResult r = run_cli(
      "meanfield --q1 0 --q2 0 --smax 20 --lmax 20 --stop-tol 1e-6 "
      "--export-state cli_state.csv");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("mean_sojourn") != std::string::npos);
  const std::string state = slurp("cli_state.csv");
  CHECK(state.rfind("s,l,c,x\n0,0,0,", 0) == 0);
  CHECK(state.find("\n20,20,2,") != std::string::npos);
  std::remove("cli_state.csv");
}

TEST_CASE("sim-cluster subcommand reports aggregate statistics") {
  const CommandResult r = run_cli(
      "sim-cluster --n 20 --horizon 1500 --warmup 150 --reps 2 --seed 42 "
      "--policy shorter-of-two");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("mean_sojourn") != std::string::npos);
  CHECK(r.output.find("rep_range") != std::string::npos);
}
