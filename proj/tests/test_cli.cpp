#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string capture = "opkm_cli_capture.txt";
  const std::string cmd =
      std::string(OPKM_CLI_PATH) + " " + args + " > " + capture + " 2> opkm_cli_err.txt";
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

// drops the wall-clock line, the only run-to-run variation
std::string without_timing(const std::string& json) {
  std::istringstream in(json);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("wall_time_ms") == std::string::npos) out += line + "\n";
  return out;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("cluster emits the full JSON schema") {
  CliResult r = run_cli(
      "cluster --generate rings:200 --kernel poly:2 --method one-pass --rank 2 "
      "--oversample 6 --clusters 2 --seed 5");
  REQUIRE(r.code == 0);
  for (const char* key : {"\"method\"", "\"r\"", "\"l\"", "\"seed\"", "\"approx_error\"",
                          "\"accuracy\"", "\"objective\"", "\"wall_time_ms\"",
                          "\"peak_block_memory_bytes\""})
    CHECK(r.out.find(key) != std::string::npos);
  CHECK(r.out.find("\"one-pass\"") != std::string::npos);
}

TEST_CASE("identical invocations differ only in timing") {
  const std::string args =
      "cluster --generate rings:300 --kernel poly:2 --method one-pass --rank 2 "
      "--oversample 8 --clusters 2 --seed 11";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(without_timing(a.out) == without_timing(b.out));
}

TEST_CASE("results are independent of the thread count") {
  const std::string base =
      "cluster --generate rings:300 --kernel rbf:1.0 --method nystrom --rank 3 "
      "--samples 20 --clusters 2 --seed 4";
  CliResult a = run_cli(base + " --threads 1");
  CliResult b = run_cli(base + " --threads 4");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(without_timing(a.out) == without_timing(b.out));
}

TEST_CASE("invalid flags exit with code 1") {
  CHECK(run_cli("cluster --generate rings:50 --method bogus --clusters 2").code == 1);
  CHECK(run_cli("cluster --no-such-flag").code == 1);
  CHECK(run_cli("cluster --method one-pass").code == 1);  // no dataset
  CHECK(run_cli("frobnicate").code == 1);                 // no such subcommand
  CHECK(run_cli("cluster --generate rings:50 --kernel poly:x --method exact").code == 1);
}

TEST_CASE("oversized sketch exits with code 1") {
  CliResult r = run_cli(
      "cluster --generate rings:4 --kernel poly:2 --method one-pass --rank 4 "
      "--oversample 10 --clusters 2");
  CHECK(r.code == 1);
}

TEST_CASE("missing data file exits with code 2") {
  CliResult r = run_cli("cluster --data no_such_file.csv --method exact --clusters 2");
  CHECK(r.code == 2);
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("cluster --help").code == 0);
}

TEST_CASE("compare emits one row per cell and trial plus means") {
  CliResult r = run_cli(
      "compare --generate rings:120 --kernel poly:2 --method one-pass,nystrom "
      "--rank 2 --oversample 5 --samples 10,20 --clusters 2 --trials 3 --seed 2");
  REQUIRE(r.code == 0);
  // header + 3 cells x (3 trials + 1 mean)
  CHECK(count_lines(r.out) == 13);
  CHECK(r.out.rfind("method,samples,trial,approx_error,accuracy\n", 0) == 0);
  CHECK(r.out.find("one-pass,7,mean,") != std::string::npos);
  CHECK(r.out.find("nystrom,10,0,") != std::string::npos);
  CHECK(r.out.find("nystrom,20,mean,") != std::string::npos);
}

TEST_CASE("compare writes to a file when asked") {
  const std::string path = "opkm_compare_out.csv";
  CliResult r = run_cli(
      "compare --generate rings:80 --kernel poly:2 --method raw-kmeans --clusters 2 "
      "--trials 2 --out " + path);
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("raw-kmeans,0,mean,nan,") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("bound-check passes on small random instances") {
  CliResult r = run_cli("bound-check --trials 6 --points 6 --rank 2 --oversample 2 --seed 3");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("violations=0") != std::string::npos);
  CHECK(r.out.find("eq9=PASS") != std::string::npos);
}

TEST_CASE("bound-check with the exact method reports the trace bound") {
  CliResult r = run_cli(
      "bound-check --trials 4 --points 6 --rank 3 --method exact --seed 1");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("eq10=PASS") != std::string::npos);
}

TEST_CASE("bound-check validates the oracle limits") {
  CHECK(run_cli("bound-check --trials 2 --points 40").code == 1);
  CHECK(run_cli("bound-check --trials 2 --points 6 --clusters 5").code == 1);
}
