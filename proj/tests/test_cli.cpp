#include <doctest.h>

#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "test_support.hpp"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the installed binary through the shell; `env_prefix` may carry
// VAR=value assignments.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix;
  if (!cmd.empty()) cmd += ' ';
  cmd += std::string(EUCHUNK_BIN) + " " + args + " 2>&1";
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe))
    result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

bool file_exists(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (f) std::fclose(f);
  return f != nullptr;
}

}  // namespace

TEST_CASE("help exits cleanly and names the subcommands") {
  const CliResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("normalize") != std::string::npos);
  CHECK(r.output.find("run-all") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").exit_code != 0);
  CHECK(run_cli("--no-such-flag").exit_code == 2);
  CHECK(run_cli("normalize").exit_code == 2);  // missing required input
  const CliResult missing = run_cli("normalize /does/not/exist.json");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("error") != std::string::npos);
}

TEST_CASE("parameter overrides are range-checked") {
  const std::string input = euc_test::fixture_path("gt_track.json");
  const CliResult bad =
      run_cli("normalize " + input + " --format gt --set tau=1.5 --output " +
              euc_test::scratch_dir("settau").string() + "/out.json");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("tau") != std::string::npos);
  CHECK(run_cli("normalize " + input + " --format gt --set nonsense").exit_code ==
        2);
}

TEST_CASE("config files load from EU_CONFIG and yield to explicit flags") {
  const std::string dir = euc_test::scratch_dir("cli_cfg");
  const std::string input = euc_test::fixture_path("gt_track.json");

  euc_test::write_file(dir + "/bad.json", R"({"no_such_key": 1})");
  const CliResult bad = run_cli("export-graph --output " + dir + "/g.cypher",
                                "EU_CONFIG=" + dir + "/bad.json");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("no_such_key") != std::string::npos);

  // Normalize once so eval has an elements file to work from.
  euc_test::write_file(dir + "/fair.json", R"({"protocol": "fair"})");
  REQUIRE(run_cli("normalize " + input + " --format gt --output " + dir +
                  "/elements.json")
              .exit_code == 0);

  const CliResult fair =
      run_cli("eval " + dir + "/elements.json --output-dir " + dir + "/fair",
              "EU_CONFIG=" + dir + "/fair.json");
  REQUIRE(fair.exit_code == 0);
  const auto fair_qas = nlohmann::json::parse(
      euc_test::slurp(dir + "/fair/qas.json"));
  REQUIRE(!fair_qas.empty());
  CHECK(fair_qas.at(0).at("protocol_scope") == 4);

  const CliResult strict = run_cli(
      "eval " + dir + "/elements.json --protocol strict --output-dir " + dir +
          "/strict",
      "EU_CONFIG=" + dir + "/fair.json");
  REQUIRE(strict.exit_code == 0);
  const auto strict_qas = nlohmann::json::parse(
      euc_test::slurp(dir + "/strict/qas.json"));
  REQUIRE(!strict_qas.empty());
  CHECK(strict_qas.at(0).at("protocol_scope") == 3);
}

TEST_CASE("strict invariants turn corrected violations into exit 3") {
  const std::string dir = euc_test::scratch_dir("strict_inv");
  // A page holding one lone table: its EU has no caption-or-label anchor
  // and nothing to repair from, so validation demotes it.
  euc_test::write_file(dir + "/elements.json", R"([{
    "page_id": "p1", "width_px": 100, "height_px": 100,
    "already_normalized": true,
    "elements": [{
      "id": "t1", "label": "table", "bbox": [0.1, 0.1, 0.9, 0.5],
      "order": 0, "text": "1 2 3", "canon_role": "table", "excluded": false
    }]
  }])");

  const CliResult plain =
      run_cli("build " + dir + "/elements.json --validate --output " + dir +
              "/eus.json");
  CHECK(plain.exit_code == 0);
  CHECK(plain.output.find("violations corrected: 1") != std::string::npos);

  const CliResult strict = run_cli(
      "build " + dir +
      "/elements.json --validate --strict-invariants --output " + dir +
      "/eus2.json");
  CHECK(strict.exit_code == 3);
}

TEST_CASE("the full pipeline runs both golden tracks end to end") {
  const std::string dir = euc_test::scratch_dir("run_all");
  const std::string gt = euc_test::fixture_path("gt_track.json");
  const std::string mineru = euc_test::fixture_path("mineru_track.json");
  const std::string args = "run-all --track gt=gt:" + gt +
                           " --track mineru=mineru:" + mineru +
                           " --output-dir ";

  const CliResult r = run_cli(args + dir);
  REQUIRE(r.exit_code == 0);
  for (const char* name :
       {"normalized_gt.json", "eus_gt.json", "normalized_mineru.json",
        "eus_mineru.json", "convergence.json", "convergence.csv",
        "rules.cypher", "qas.json", "eval_element.json", "eval_element.csv",
        "eval_eu.json", "eval_eu.csv"}) {
    CAPTURE(name);
    CHECK(file_exists(dir + "/" + name));
  }
  CHECK(r.output.find("gt vs mineru") != std::string::npos);
  CHECK(r.output.find("Recall@") != std::string::npos);

  // Identical inputs must produce identical artifacts on a second run.
  const std::string dir2 = euc_test::scratch_dir("run_all2");
  REQUIRE(run_cli(args + dir2).exit_code == 0);
  for (const char* name : {"eus_gt.json", "qas.json", "rules.cypher",
                           "convergence.csv"}) {
    CAPTURE(name);
    CHECK(euc_test::slurp(dir + "/" + name) ==
          euc_test::slurp(dir2 + "/" + name));
  }
}

TEST_CASE("exported graphs honor the rules file flag") {
  const std::string dir = euc_test::scratch_dir("cli_graph");
  const CliResult ok = run_cli("export-graph --output " + dir + "/g.cypher");
  CHECK(ok.exit_code == 0);
  const std::string cypher = euc_test::slurp(dir + "/g.cypher");
  CHECK(cypher.find("EU_Decision_Layer") != std::string::npos);
  CHECK(cypher.find("D1_010") != std::string::npos);

  euc_test::write_file(dir + "/rules.json", "{ not json");
  CHECK(run_cli("export-graph --rules " + dir + "/rules.json --output " + dir +
                "/g2.cypher")
            .exit_code == 2);
}
