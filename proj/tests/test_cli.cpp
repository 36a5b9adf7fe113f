#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = NCHEAT_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& dir, const std::string& env = "") {
  std::string log = dir + "/run.log";
  std::string cmd = "cd " + dir + " && " + env + " " + kCli + " " + args + " > " + log +
                    " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("ncheat_cli_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("check-nd emits a passing gram record for word length on F2") {
  TempDir dir("nd");
  auto r = run("check-nd --group free:2 --length word --ball 2 --out nd.json", dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/nd.json"));
  CHECK(out.at("pass").get<bool>());
  CHECK(out.at("lambda_max").get<double>() <= 1e-9);
  CHECK(out.at("sample_size").get<int>() == 17);
  // manifest written alongside
  json man = json::parse(slurp(dir.str() + "/nd.json.manifest.json"));
  CHECK(man.at("status") == "ok");
  CHECK(man.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("poincare brackets the log-length exponent on z") {
  TempDir dir("poincare");
  auto r = run("poincare --group z:1 --length log --rmax 3000 --out p.json", dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/p.json"));
  CHECK(out.at("lower").get<double>() - 0.05 <= 1.0);
  CHECK(1.0 <= out.at("upper").get<double>() + 0.05);
  CHECK_FALSE(out.at("infinite").get<bool>());
}

TEST_CASE("heat-evolve writes the damped coefficient file") {
  TempDir dir("evolve");
  {
    std::ofstream x0(dir.path / "x0.json");
    x0 << R"({"terms":[{"normal_form":[1,0],"re":1.0,"im":0.0},)"
       << R"({"normal_form":[0,2],"re":-2.0,"im":0.5}]})";
  }
  auto r = run("heat-evolve --group zn:2 --theta 0,pi/3,0 --length l2sq --t 0.5 "
               "--x0 x0.json --out u.json",
               dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/u.json"));
  REQUIRE(out.at("terms").size() == 2);
  for (const auto& term : out.at("terms")) {
    auto nf = term.at("normal_form").get<std::vector<int>>();
    double m2 = double(nf[0] * nf[0] + nf[1] * nf[1]);
    double damp = std::exp(-0.5 * m2);
    if (nf[0] == 1) {
      CHECK(term.at("re").get<double>() == doctest::Approx(damp).epsilon(1e-15));
    } else {
      CHECK(term.at("re").get<double>() == doctest::Approx(-2.0 * damp).epsilon(1e-15));
      CHECK(term.at("im").get<double>() == doctest::Approx(0.5 * damp).epsilon(1e-15));
    }
  }
}

TEST_CASE("list prints the full catalog") {
  TempDir dir("list");
  auto r = run("list", dir.str());
  REQUIRE(r.exit_code == 0);
  json cat = json::parse(r.out);
  const std::vector<std::string> expected = {
      "check-nd",    "schoenberg",    "poincare", "dominance", "norm",    "tail",
      "heat-evolve", "heat-residual", "content",  "kappa",     "hgrowth", "sphere-bound"};
  for (auto& name : expected) CHECK(cat.at("subcommands").contains(name));
  CHECK(cat.at("subcommands").size() == expected.size() + 1);  // + list itself
}

TEST_CASE("unknown subcommands suggest the nearest match and exit 2") {
  TempDir dir("typo");
  auto r = run("shoenberg --group z:1", dir.str());
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("schoenberg") != std::string::npos);
}

TEST_CASE("stochastic subcommands without a seed fail validation") {
  TempDir dir("seed");
  auto r = run("content --group z:1 --set interval:0:3 --out c.json", dir.str());
  CHECK(r.exit_code == 2);
  // the manifest is still written on the failure path
  json man = json::parse(slurp(dir.str() + "/c.json.manifest.json"));
  CHECK(man.at("status") == "validation-error");
}

TEST_CASE("invalid configuration values exit 2 with a manifest") {
  TempDir dir("badlen");
  auto r = run("check-nd --group free:2 --length l1 --ball 2 --out x.json", dir.str());
  CHECK(r.exit_code == 2);
  json man = json::parse(slurp(dir.str() + "/x.json.manifest.json"));
  CHECK(man.at("status") == "validation-error");
}

TEST_CASE("config file fields are used and flags override them") {
  TempDir dir("config");
  {
    std::ofstream cfg(dir.path / "cfg.json");
    cfg << R"({"group":"z:1","length":"log","rmax":1000,"out":"from_config.json"})";
  }
  auto r = run("poincare --config cfg.json --rmax 2000 --out p.json", dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/p.json"));
  CHECK(out.at("kind") == "log");          // from config
  CHECK(out.at("rmax").get<int>() == 2000);  // flag wins
}

TEST_CASE("free products come from config factor tables") {
  TempDir dir("fpf");
  {
    std::ofstream cfg(dir.path / "cfg.json");
    cfg << R"({"factors":[{"order":2,"identity":0,"table":[0,1,1,0]},)"
        << R"({"order":3,"identity":0,"table":[0,1,2,1,2,0,2,0,1]}]})";
  }
  auto r = run("check-nd --config cfg.json --group fpf --length block --ball 2 --out b.json",
               dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/b.json"));
  CHECK(out.at("pass").get<bool>());
  CHECK(out.at("sample_size").get<int>() == 8);  // |B_2| of z2 * z3
}

TEST_CASE("theta accepts omitted trailing zeros and config-object groups work") {
  TempDir dir("forms");
  {
    std::ofstream x0(dir.path / "x0.json");
    x0 << R"({"terms":[{"normal_form":[1,0],"re":1.0,"im":0.0}]})";
  }
  auto r1 = run("heat-evolve --group zn:2 --theta 0,pi/3 --length l2sq --t 0.5 "
                "--x0 x0.json --out a.json",
                dir.str());
  auto r2 = run("heat-evolve --group zn:2 --theta 0,pi/3,0 --length l2sq --t 0.5 "
                "--x0 x0.json --out b.json",
                dir.str());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir.str() + "/a.json") == slurp(dir.str() + "/b.json"));
  {
    std::ofstream cfg(dir.path / "cfg.json");
    cfg << R"({"group":{"family":"free","rank":2}})";
  }
  auto r3 = run("check-nd --config cfg.json --length word --ball 2 --out c.json", dir.str());
  REQUIRE(r3.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/c.json"));
  CHECK(out.at("sample_size").get<int>() == 17);
  CHECK(out.at("pass").get<bool>());
}

TEST_CASE("reruns with the same seed are byte identical") {
  TempDir dir("repro");
  std::string norm_args =
      "norm --group free:2 --x0-kind gensum --radius 6 --seed 31 --tol 1e-8 --out ";
  REQUIRE(run(norm_args + "n1.json", dir.str()).exit_code == 0);
  REQUIRE(run(norm_args + "n2.json", dir.str()).exit_code == 0);
  CHECK(slurp(dir.str() + "/n1.json") == slurp(dir.str() + "/n2.json"));

  std::string tail_args =
      "tail --group free:2 --length word --t 0.2 --x0-kind equal-mass:4 --norm-radius 4 "
      "--seed 77 --out ";
  REQUIRE(run(tail_args + "t1.csv", dir.str()).exit_code == 0);
  REQUIRE(run(tail_args + "t2.csv", dir.str()).exit_code == 0);
  CHECK(slurp(dir.str() + "/t1.csv") == slurp(dir.str() + "/t2.csv"));
}

TEST_CASE("ball cache reuse leaves results unchanged") {
  TempDir dir("cache");
  std::string env = "NCHEAT_CACHE_DIR=" + dir.str() + "/cache";
  std::string args = "norm --group free:2 --x0-kind gensum --radius 8 --seed 1 --tol 1e-6 ";
  auto r1 = run(args + "--out a.json", dir.str(), env);
  REQUIRE(r1.exit_code == 0);
  bool have_cache_file = false;
  for (auto& p : fs::directory_iterator(dir.path / "cache"))
    have_cache_file = have_cache_file || p.path().extension() == ".bin";
  CHECK(have_cache_file);
  auto r2 = run(args + "--out b.json", dir.str(), env);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir.str() + "/a.json") == slurp(dir.str() + "/b.json"));
  // and against the uncached run
  auto r3 = run(args + "--out c.json", dir.str());
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(dir.str() + "/a.json") == slurp(dir.str() + "/c.json"));
}

TEST_CASE("schoenberg subcommand reports per-t PSD rows") {
  TempDir dir("schoen");
  auto r = run("schoenberg --group zn:2 --length l2sq --ball 3 --t-grid 0.1,1,10 "
               "--out s.json",
               dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/s.json"));
  REQUIRE(out.at("rows").size() == 3);
  for (const auto& row : out.at("rows")) {
    CHECK(row.at("pass").get<bool>());
    CHECK(row.at("lambda_min").get<double>() >= -1e-9);
  }
}

TEST_CASE("dominance subcommand fits one length against another") {
  TempDir dir("dom");
  auto r = run("dominance --group z:1 --length log --length2 l1 --ball 200 --out d.json",
               dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/d.json"));
  CHECK(out.contains("a"));
  CHECK(out.contains("b"));
  CHECK(out.contains("residual"));
  // identical lengths dominate themselves exactly
  auto r2 = run("dominance --group z:1 --length l1 --length2 l1 --ball 50 --out e.json",
                dir.str());
  REQUIRE(r2.exit_code == 0);
  json self = json::parse(slurp(dir.str() + "/e.json"));
  CHECK(self.at("a").get<double>() == doctest::Approx(1.0));
  CHECK(self.at("line_dominates").get<bool>());
}

TEST_CASE("kappa subcommand reports the running maximum ratio") {
  TempDir dir("kappa");
  auto r = run("kappa --group free:2 --length word --kappa onepluspow:2 --support-radius 3 "
               "--samples 2 --radius 4 --seed 9 --tol 1e-6 --out k.json",
               dir.str());
  REQUIRE(r.exit_code == 0);
  json out = json::parse(slurp(dir.str() + "/k.json"));
  double maxr = out.at("max_ratio").get<double>();
  CHECK(maxr > 0.0);
  CHECK(maxr <= 2.0);
  double running = 0.0;
  for (const auto& s : out.at("samples"))
    running = std::max(running, s.at("ratio").get<double>());
  CHECK(running == doctest::Approx(maxr));
}

TEST_CASE("hgrowth subcommand writes the profile CSV and a fit summary") {
  TempDir dir("hg");
  auto r = run("hgrowth --group z:1 --length word --rmax 4 --margin 12 --restarts 4 "
               "--seed 8 --tol 1e-6 --out hg.csv",
               dir.str());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(dir.str() + "/hg.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "r,ball_size,c_lower,c_upper,poly_fit_exponent,exp_fit_rate");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 5);
  json summary = json::parse(slurp(dir.str() + "/hg.csv.summary.json"));
  CHECK(summary.at("label") == "polynomial-consistent");
  CHECK(summary.at("poly_exponent").get<double>() == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("heat-residual CSV carries second-order ratios") {
  TempDir dir("resid");
  {
    std::ofstream x0(dir.path / "x0.json");
    x0 << R"({"terms":[{"normal_form":[1],"re":1.0,"im":0.0},)"
       << R"({"normal_form":[-1],"re":1.0,"im":0.0}]})";
  }
  auto r = run("heat-residual --group z:1 --length l2sq --t 1.0 --x0 x0.json --out r.csv",
               dir.str());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(dir.str() + "/r.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "h,residual,ratio");
  double h, resid, ratio;
  char c;
  int rows = 0;
  while (in >> h >> c >> resid >> c >> ratio) {
    ++rows;
    if (ratio != 0.0) {
      CHECK(ratio >= 3.6);
      CHECK(ratio <= 4.4);
    }
  }
  CHECK(rows == 4);
}

TEST_CASE("sphere-bound writes per-radius pass flags") {
  TempDir dir("sb");
  auto r = run("sphere-bound --group free:2 --t 0.2 --rmax 4 --norm-radius 3 "
               "--x0-kind equal-mass:4 --seed 5 --tol 1e-6 --out sb.csv",
               dir.str());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(dir.str() + "/sb.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "r,measured,bound,pass,converged");
  int rows = 0, passes = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",1,") != std::string::npos) ++passes;
  }
  CHECK(rows == 5);
  CHECK(passes == rows);
}
