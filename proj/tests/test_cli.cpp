#include "helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef ISOSPEC_CLI_PATH
#error "ISOSPEC_CLI_PATH must name the command line binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = std::string(ISOSPEC_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("spectrum of a tetrahedron") {
    const fs::path dir = testing::temp_dir("cli_spectrum");
    const fs::path mesh = dir / "tet.off";
    REQUIRE(run("make-shape tetra --out " + mesh.string(), dir).code == 0);
    const Run r = run("spectrum " + mesh.string() + " -k 4", dir);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const auto ev = j.at("eigenvalues").get<std::vector<double>>();
    REQUIRE(ev.size() == 4);
    CHECK(std::abs(ev[0]) < 1e-12);
    for (int i = 1; i < 4; ++i) CHECK(ev[i] == doctest::Approx(ev[1]).epsilon(1e-10));
  }

  TEST_CASE("unknown flags are usage errors") {
    const fs::path dir = testing::temp_dir("cli_usage");
    CHECK(run("spectrum nothing.off --no-such-flag", dir).code == 1);
    CHECK(run("no-such-command", dir).code == 1);
  }

  TEST_CASE("config keys are checked") {
    const fs::path dir = testing::temp_dir("cli_config");
    REQUIRE(run("make-shape square --out " + (dir / "sq.off").string(), dir).code == 0);
    testing::write_text(dir / "bad.json", R"({"not_a_key": 3})");
    const Run r = run("recover2d --target-mesh " + (dir / "sq.off").string() + " --config " +
                          (dir / "bad.json").string() + " --out " + (dir / "run").string(),
                      dir);
    CHECK(r.code == 1);
  }

  TEST_CASE("eval-iou of a mesh with itself") {
    const fs::path dir = testing::temp_dir("cli_iou");
    REQUIRE(run("make-shape star --out " + (dir / "star.off").string(), dir).code == 0);
    const Run r = run("eval-iou " + (dir / "star.off").string() + " " + (dir / "star.off").string(), dir);
    REQUIRE(r.code == 0);
    CHECK(std::stod(r.out) >= 0.995);
  }

  TEST_CASE("recovery writes its run directory") {
    const fs::path dir = testing::temp_dir("cli_recover");
    REQUIRE(run("make-shape disk -n 150 --out " + (dir / "disk.off").string(), dir).code == 0);
    const fs::path out = dir / "run";
    const Run r = run("recover2d --target-mesh " + (dir / "disk.off").string() +
                          " -k 8 --steps 20 -n 150 --checkpoint-every 10 --out " + out.string(),
                      dir);
    REQUIRE(r.code == 0);
    for (const char* name : {"config.json", "initial.off", "result.off", "trace.csv", "report.json"}) {
      CHECK(fs::exists(out / name));
    }
    CHECK(fs::exists(out / "checkpoints" / "step_000010.off"));
    std::ifstream report(out / "report.json");
    const auto j = nlohmann::json::parse(report);
    CHECK(j.contains("data_term_initial"));
    CHECK(j.contains("data_term_final"));
    std::ifstream cfg(out / "config.json");
    CHECK(nlohmann::json::parse(cfg).at("k").get<int>() == 8);
  }

  TEST_CASE("numerical failures exit with code 2") {
    const fs::path dir = testing::temp_dir("cli_degenerate");
    testing::write_text(dir / "flat.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n");
    CHECK(run("spectrum " + (dir / "flat.off").string() + " -k 2", dir).code == 2);
  }

  TEST_CASE("validate prints a report") {
    const fs::path dir = testing::temp_dir("cli_validate");
    REQUIRE(run("make-shape annulus --out " + (dir / "ring.off").string(), dir).code == 0);
    const Run r = run("validate " + (dir / "ring.off").string(), dir);
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out).at("boundary_loop_count").get<int>() == 2);
  }
}
