// Exercises the installed CLI end to end: exit codes, output grammar, and
// byte-stability of seeded outputs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path tmpdir = SUBFINSLER_TEST_TMPDIR;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  fs::create_directories(tmpdir);
  fs::path out_file = tmpdir / "stdout.txt";
  std::string cmd = env + (env.empty() ? "" : " ") + std::string(SUBFINSLER_CLI_PATH) + " " +
                    args + " > " + out_file.string() + " 2> " +
                    (tmpdir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  return RunResult{WEXITSTATUS(rc), buf.str()};
}

fs::path write_spec(const std::string& name, const std::string& text) {
  fs::create_directories(tmpdir);
  fs::path p = tmpdir / name;
  std::ofstream(p) << text;
  return p;
}

double parse_kv(const std::string& text, const std::string& key) {
  auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("distance command prints the Heisenberg length") {
  auto spec = write_spec("heis.json", oracle::heisenberg_json());
  RunResult r = run_cli("distance --spec " + spec.string() + " --from 0,0,0 --to 0,0,0.25");
  CHECK(r.exit_code == 0);
  double length = parse_kv(r.stdout_text, "length");
  CHECK(std::abs(length - oracle::heisenberg_z_distance(0.25)) <= 1e-4);
  CHECK(r.stdout_text.find("status=Reached") != std::string::npos);
}

TEST_CASE("check-bracket prints the growth line") {
  auto spec = write_spec("heis.json", oracle::heisenberg_json());
  RunResult r = run_cli("check-bracket --spec " + spec.string() + " --at 0,0,0 --depth 3");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "generating=true growth=[2,3]\n");

  RunResult r2 = run_cli("check-bracket --spec " + spec.string() + " --at 0,0,0 --depth 2");
  CHECK(r2.stdout_text == "generating=true growth=[2,3]\n");
}

TEST_CASE("malformed spec files exit with code 2") {
  auto bad = write_spec("bad.json", "{ this is not json");
  RunResult r = run_cli("geodesic --spec " + bad.string() + " --from 0,0 --p0 1,0 --T 1");
  CHECK(r.exit_code == 2);

  auto invalid = write_spec("invalid.json", R"({"dim": 3,
    "frames": [["1","0","0"],["0","1","0"],["0","0","1"],["1","1","1"]],
    "norm": {"type":"euclidean"}})");
  RunResult r2 = run_cli("distance --spec " + invalid.string() + " --from 0,0,0 --to 1,0,0");
  CHECK(r2.exit_code == 2);

  RunResult r3 = run_cli("nonsense-command --spec " + bad.string());
  CHECK(r3.exit_code == 2);
}

TEST_CASE("mathematical failures exit with code 1 under --require-reached") {
  auto spec = write_spec("invol.json", oracle::involutive_json());
  RunResult r = run_cli("distance --spec " + spec.string() +
                        " --from 0,0,0 --to 0,0,1 --starts 4 --max-iters 6 --require-reached");
  CHECK(r.exit_code == 1);
  CHECK(r.stdout_text.find("status=Unreached") != std::string::npos);
}

TEST_CASE("exp command evaluates both exponential maps") {
  auto parse_point = [](const std::string& text) {
    Eigen::Vector2d v;
    REQUIRE(std::sscanf(text.c_str(), "[%lf,%lf]", &v[0], &v[1]) == 2);
    return v;
  };
  auto spec = write_spec("plane.json", oracle::euclidean_plane_json());
  RunResult star = run_cli("exp --spec " + spec.string() + " --from 0,0 --p0 3,4");
  CHECK(star.exit_code == 0);
  CHECK((parse_point(star.stdout_text) - Eigen::Vector2d(3, 4)).norm() <= 1e-10);

  RunResult vmap = run_cli("exp --spec " + spec.string() + " --from 1,1 --v0 0.5,-0.25");
  CHECK(vmap.exit_code == 0);
  CHECK((parse_point(vmap.stdout_text) - Eigen::Vector2d(1.5, 0.75)).norm() <= 1e-10);

  // escape from a boxed chart is a mathematical failure for exp
  auto boxed = write_spec("boxed.json", oracle::boxed_plane_json());
  RunResult esc = run_cli("exp --spec " + boxed.string() + " --from 0.9,0 --p0 1,0");
  CHECK(esc.exit_code == 1);
}

TEST_CASE("geodesic emits one JSON object per sample with conserved H") {
  auto spec = write_spec("heis.json", oracle::heisenberg_json());
  RunResult r = run_cli("geodesic --spec " + spec.string() +
                        " --from 0,0,0 --p0 1,0.5,2 --T 1 --samples 17");
  CHECK(r.exit_code == 0);
  std::istringstream lines(r.stdout_text);
  std::string line;
  int count = 0;
  double H0 = 0;
  while (std::getline(lines, line)) {
    CHECK(line.front() == '{');
    CHECK(line.find("\"t\":") != std::string::npos);
    CHECK(line.find("\"x\":") != std::string::npos);
    CHECK(line.find("\"p\":") != std::string::npos);
    auto hpos = line.find("\"H\":");
    REQUIRE(hpos != std::string::npos);
    double H = std::stod(line.substr(hpos + 4));
    if (count == 0) H0 = H;
    CHECK(std::abs(H - H0) <= 1e-9 * (1.0 + H0));
    ++count;
  }
  CHECK(count == 17);
}

TEST_CASE("probe commands run and report summaries") {
  auto boxed = write_spec("boxed.json", oracle::boxed_plane_json());
  RunResult r = run_cli("probe-completeness --spec " + boxed.string() +
                        " --at 0,0 --dirs 8 --Tmax 100");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("extendable=0/8") != std::string::npos);

  auto plane = write_spec("plane.json", oracle::euclidean_plane_json());
  RunResult hr = run_cli("probe-hopf-rinow --spec " + plane.string() +
                         " --region -1,-1:1,1 --pairs 3");
  CHECK(hr.exit_code == 0);
  CHECK(hr.stdout_text.find("success_fraction=1") != std::string::npos);
  CHECK(hr.stdout_text.find("triangle_violations=0") != std::string::npos);
}

TEST_CASE("results do not depend on the thread cap") {
  auto spec = write_spec("heis.json", oracle::heisenberg_json());
  std::string cmd = "probe-hopf-rinow --spec " + spec.string() +
                    " --region -0.5,-0.5,-0.5:0.5,0.5,0.5 --pairs 2 --seed 3";
  RunResult serial = run_cli(cmd, "SUBFINSLER_THREADS=1");
  RunResult threaded = run_cli(cmd, "SUBFINSLER_THREADS=2");
  CHECK(serial.exit_code == 0);
  CHECK(serial.stdout_text == threaded.stdout_text);
  CHECK(serial.stdout_text.find("success_fraction=1") != std::string::npos);
}

TEST_CASE("seeded outputs are byte-stable and --output mirrors stdout") {
  auto spec = write_spec("heis.json", oracle::heisenberg_json());
  fs::path out1 = tmpdir / "sphere1.jsonl";
  fs::path out2 = tmpdir / "sphere2.jsonl";
  RunResult a = run_cli("sphere --spec " + spec.string() +
                        " --at 0,0,0 --r 1 --n 6 --seed 5 --output " + out1.string());
  RunResult b = run_cli("sphere --spec " + spec.string() +
                        " --at 0,0,0 --r 1 --n 6 --seed 5 --output " + out2.string());
  CHECK(a.exit_code == 0);
  CHECK(a.stdout_text == b.stdout_text);
  std::ifstream f1(out1), f2(out2);
  std::ostringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(s1.str() == a.stdout_text);
}
