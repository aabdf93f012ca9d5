#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef CARNOT_CLI_PATH
#error "CARNOT_CLI_PATH must point at the built CLI"
#endif

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  std::string base = "/tmp/carnot_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  std::string cmd = std::string(CARNOT_CLI_PATH) + " " + args + " >" + base + ".out 2>" + base + ".err";
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  std::remove((base + ".out").c_str());
  std::remove((base + ".err").c_str());
  return r;
}

} // namespace

TEST_CASE("cli: group-info and law") {
  CliResult r = run_cli("group-info heisenberg");
  CHECK(r.code == 0);
  CHECK(r.out.find("n = 3") != std::string::npos);
  CHECK(r.out.find("Q = 4") != std::string::npos);
  CHECK(r.out.find("weights = 1 1 2") != std::string::npos);

  r = run_cli("law heisenberg");
  CHECK(r.code == 0);
  CHECK(r.out.find("1/2*x1*y2 - 1/2*x2*y1") != std::string::npos);

  r = run_cli(std::string("group-info ") + CARNOT_DATA_DIR + "/engel.group");
  CHECK(r.code == 0);
  CHECK(r.out.find("n = 4") != std::string::npos);
  CHECK(r.out.find("Q = 7") != std::string::npos);
}

TEST_CASE("cli: pansu subcommands") {
  CliResult r = run_cli("pansu-check heisenberg contact_shear");
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict: filtration preserving") != std::string::npos);

  r = run_cli("pansu-check heisenberg coord_swap");
  CHECK(r.code == 0);
  CHECK(r.out.find("NOT filtration preserving") != std::string::npos);

  r = run_cli("pansu-probe heisenberg heis_to_abelian_identity --dst 'abelian(1,1,2)'");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("eps,coord_1,coord_2,coord_3,error\n", 0) == 0);
  CHECK(r.out.find("diverged=1") != std::string::npos);
  CHECK(r.out.find("eps^-1.0") != std::string::npos);

  r = run_cli("pansu-probe heisenberg contact_shear --eps 2^-1..2^-8");
  CHECK(r.code == 0);
  CHECK(r.out.find("converged=1") != std::string::npos);
}

TEST_CASE("cli: refusal exits with code 3") {
  CliResult r = run_cli("invariance --map coord_swap --x-res 5 --z-res 9 --eps 0.25 --bank 1");
  CHECK(r.code == 3);
  CHECK(r.err.find("refused") != std::string::npos);

  r = run_cli("invariance --map heis_to_abelian_identity --dst 'abelian(1,1,2)' "
              "--x-res 5 --z-res 9 --eps 0.25 --bank 1");
  CHECK(r.code == 3);
  CHECK(r.err.find("refused") != std::string::npos);
}

TEST_CASE("cli: quantize repeats byte for byte") {
  const char* args = "quantize --x-res 5 --z-res 9 --eps 0.25 --f bank:2";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("\"l2_out\"") != std::string::npos);
  CHECK(a.out.rfind("i1,i2,i3,value\n", 0) == 0);
}

TEST_CASE("cli: gate failure keeps the csv and exits 4") {
  CliResult r = run_cli("invariance --x-res 5 --z-res 9 --eps 0.25,0.125 --bank 1 --slope-min 99");
  CHECK(r.code == 4);
  CHECK(r.out.rfind("eps,error_f1,max_error\n", 0) == 0);
  CHECK(r.out.find("verdict=fail") != std::string::npos);
}

TEST_CASE("cli: config files and overrides") {
  std::string path = "/tmp/carnot_cli_cfg_" + std::to_string(::getpid()) + ".cfg";
  {
    std::ofstream cfg(path);
    cfg << "# tiny run\n"
        << "x_res = 5\n"
        << "z_res = 9\n"
        << "eps = 0.25, 0.125\n"
        << "bank = 1\n";
  }
  CliResult r = run_cli("invariance --config " + path);
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict=pass") != std::string::npos);

  // flags land after the file, so they win
  r = run_cli("invariance --config " + path + " --slope-min 99");
  CHECK(r.code == 4);
  std::remove(path.c_str());

  r = run_cli("quantize --set nosuchkey=1");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown config key") != std::string::npos);

  r = run_cli("group-info nosuch");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown builtin group") != std::string::npos);
}

TEST_CASE("cli: parse errors are not mistaken for products") {
  CHECK(run_cli("nosuchcommand").code != 0);
  CHECK(run_cli("").code != 0);
  CHECK(run_cli("group-info").code != 0);
}
