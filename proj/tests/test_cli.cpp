#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

std::string temp_path(const char* tag) {
  static int counter = 0;
  return std::string("/tmp/gcmp_cli_test_") + tag + "_" +
         std::to_string(++counter) + ".json";
}

// Runs the tool with the given arguments, capturing the report file.
RunResult run(const std::string& args, const std::string& out_path) {
  std::string cmd = std::string(GCMP_BIN) + " " + args;
  if (!out_path.empty()) cmd += " --output " + out_path;
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (!out_path.empty()) {
    std::ifstream in(out_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
  }
  return r;
}

std::string fixture(const char* name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

// Drops the timing line so byte-stable reports can be compared directly.
std::string without_wall_clock(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("wall_clock_ms") != std::string::npos) continue;
    if (line.find("\"output\":") != std::string::npos) continue;  // config echo
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("certify a catalog scenario succeeds and reports verdicts") {
  const std::string out = temp_path("certify");
  const RunResult r = run("certify --scenario m1_ignorable", out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"tool_version\": \"0.1.0\"") != std::string::npos);
  CHECK(r.output.find("\"condition\": \"CAR(GCMP)\"") != std::string::npos);
  CHECK(r.output.find("\"verdict\": \"holds\"") != std::string::npos);
  CHECK(r.output.find("\"predictable\": false") != std::string::npos);
  CHECK(r.output.find("\"per_r\"") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("certify a model file flags the anticipating mechanism") {
  const std::string out = temp_path("certify_file");
  const RunResult r =
      run("certify --input " + fixture("m1_anticipating.json"), out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verdict\": \"fails\"") != std::string::npos);
  CHECK(r.output.find("\"witness\"") != std::string::npos);
  CHECK(r.output.find("\"verdict\": \"precondition-failed\"") !=
        std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("reports are byte-stable apart from the timing line") {
  const std::string out_a = temp_path("stable_a");
  const std::string out_b = temp_path("stable_b");
  const RunResult a = run("certify --scenario m1_anticipating", out_a);
  const RunResult b = run("certify --scenario m1_anticipating", out_b);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(without_wall_clock(a.output) == without_wall_clock(b.output));
  std::remove(out_a.c_str());
  std::remove(out_b.c_str());
}

TEST_CASE("parse failures exit with code 2") {
  CHECK(run("certify --input " + fixture("malformed.json"), "").exit_code == 2);
  CHECK(run("certify", "").exit_code == 2);  // neither --input nor --scenario
  CHECK(run("certify --scenario no_such_thing", "").exit_code == 2);
  CHECK(run("bogus-subcommand", "").exit_code == 2);
  CHECK(run("estimate --input " + fixture("m1_ignorable.json"), "").exit_code ==
        2);  // no study block
}

TEST_CASE("path cap exits with code 3, via flag and via environment") {
  CHECK(run("certify --scenario m1_ignorable --cap 4", "").exit_code == 3);
  const std::string cmd = std::string("GCMP_PATH_CAP=4 ") + GCMP_BIN +
                          " certify --scenario m1_ignorable >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 3);
}

TEST_CASE("estimate runs the study from the file with overrides") {
  const std::string out = temp_path("estimate");
  const RunResult r = run("estimate --input " + fixture("study_ignorable.json") +
                              " --n 200 --replicates 3",
                          out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"population\"") != std::string::npos);
  CHECK(r.output.find("\"ignoring\"") != std::string::npos);
  CHECK(r.output.find("\"correct\"") != std::string::npos);
  CHECK(r.output.find("\"n\": 200") != std::string::npos);
  CHECK(r.output.find("\"replicates\": 3") != std::string::npos);
  CHECK(r.output.find("\"estimates\"") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("estimate with replicates 0 reports the population targets only") {
  const std::string out = temp_path("estimate_pop");
  const RunResult r = run("estimate --input " + fixture("study_ignorable.json") +
                              " --replicates 0",
                          out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"population\"") != std::string::npos);
  CHECK(r.output.find("\"sample\": {}") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("battery reports zero violations on the default generator") {
  const std::string out = temp_path("battery");
  const RunResult r = run("battery --n 25 --seed 7", out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"requested\": 25") != std::string::npos);
  CHECK(r.output.find("\"violations\": []") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("list-scenarios covers the catalog") {
  const std::string out = temp_path("list");
  const RunResult r = run("list-scenarios", out);
  CHECK(r.exit_code == 0);
  for (const char* name : {"m1_ignorable", "m1_anticipating",
                           "right_censor_independent", "detection_limit",
                           "randomized_type2"})
    CHECK(r.output.find(std::string("\"name\": \"") + name + "\"") !=
          std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("verify-example re-checks the catalog expectations") {
  const std::string out = temp_path("verify");
  const RunResult all = run("verify-example", out);
  CHECK(all.exit_code == 0);
  CHECK(all.output.find("\"mismatches\": []") != std::string::npos);
  const RunResult one = run("verify-example --scenario m1_anticipating", out);
  CHECK(one.exit_code == 0);
  CHECK(run("verify-example --scenario nope", "").exit_code == 2);
  std::remove(out.c_str());
}
