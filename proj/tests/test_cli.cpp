#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "csm/cli.hpp"
#include "csm/errors.hpp"

using namespace csm;
using namespace csm::cli;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory below the test's working directory.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) out.insert(fs::relative(e.path(), dir).string());
  return out;
}

const char* kToy = "y1,y2\n0.1,0.3\n-1.2,0.5\n2.0,40\n";

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "seed = 7   # trailing comment\n"
      "\n"
      "[sampler]\n"
      "n_iter = 500\n"
      "model = PCS\n"
      "[]\n"
      "robustness.omega_grid = 1e2, 1e3,1e4\n"
      "flag = yes\n");
  const Config cfg = Config::parse(in);
  CHECK(cfg.get_long("seed", 1) == 7);
  CHECK(cfg.get_long("sampler.n_iter", 1) == 500);
  CHECK(cfg.get_string("sampler.model", "csm") == "PCS");
  CHECK(cfg.get_doubles("robustness.omega_grid", {}) == std::vector<double>{1e2, 1e3, 1e4});
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_double("missing", 2.5) == 2.5);

  std::ostringstream echo;
  cfg.echo(echo);
  CHECK(echo.str().find("missing = 2.5") != std::string::npos);
  CHECK(echo.str().find("sampler.n_iter = 500") != std::string::npos);
  CHECK(cfg.unused_keys().empty());
}

TEST_CASE("config errors carry line numbers") {
  auto fails_at = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      Config::parse(in);
    } catch (const InputError& e) {
      return e.line() == line;
    }
    return false;
  };
  CHECK(fails_at("a = 1\nnot a pair\n", 2));
  CHECK(fails_at("a = 1\na = 2\n", 2));
  CHECK(fails_at("[open\n", 1));
  CHECK(fails_at("bad key = 1\n", 1));

  std::istringstream in("n = abc\nx = 1.5\n");
  const Config cfg = Config::parse(in);
  CHECK_THROWS_AS(cfg.get_long("n", 0), InputError);
  CHECK_THROWS_AS(cfg.get_long("x", 0), InputError);
  CHECK_THROWS_AS(cfg.get_bool("x", false), InputError);
  CHECK_THROWS_AS(Config::load("does/not/exist.ini"), InputError);
}

TEST_CASE("typed sections") {
  std::istringstream in(
      "seed = 4\nsampler.n_iter = 30\nsampler.burn_in = 10\nsampler.model = gaussian\n"
      "prior.gamma = 2\nprior.nu0 = 6\nscenario.type = regression\nscenario.q = 7\n");
  const Config cfg = Config::parse(in);
  const auto s = sampler_from(cfg);
  CHECK(s.seed == 4);
  CHECK(s.model_kind == ModelKind::Gaussian);
  const auto p = prior_from(cfg, 3, 2);
  CHECK(p.gamma == 2.0);
  CHECK(p.nu0 == 6.0);
  CHECK(p.B0(1, 1) == 100.0);
  const auto sc = scenario_from(cfg);
  CHECK_FALSE(sc.graphical());
  CHECK(std::get<RegressionScenario>(sc.kind).q == 7);
  CHECK(sc.seed == 4);

  std::istringstream bad("sampler.n_iter = 10\nsampler.burn_in = 10\n");
  CHECK_THROWS_AS(sampler_from(Config::parse(bad)), DomainError);
  std::istringstream bad_type("scenario.type = spatial\n");
  CHECK_THROWS_AS(scenario_from(Config::parse(bad_type)), InputError);
}

TEST_CASE("csv round trip") {
  const fs::path dir = scratch("csv");
  const std::vector<double> values{0.1, 1.0 / 3.0, -2.5e-300, 1e300, 123456789.123456789};
  std::vector<std::vector<std::string>> rows;
  for (double v : values) rows.push_back({format_number(v), "label"});
  write_csv(dir / "t.csv", {"x", "name"}, rows);
  const auto table = read_csv(dir / "t.csv");
  REQUIRE(table.rows.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(parse_number(table.rows[i][0], 0) == values[i]);
  CHECK(table.column("name") == 1);
  CHECK(table.column("nope") == -1);

  write_file(dir / "ragged.csv", "a,b\n1,2\n3\n");
  try {
    read_csv(dir / "ragged.csv");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(e.line() == 3);
  }
  write_file(dir / "empty.csv", "");
  CHECK_THROWS_AS(read_csv(dir / "empty.csv"), InputError);
}

TEST_CASE("observation and design files") {
  const fs::path dir = scratch("data");
  write_file(dir / "y.csv", kToy);
  const auto y = read_observations(dir / "y.csv");
  CHECK(y.rows() == 3);
  CHECK(y(2, 1) == 40.0);

  write_file(dir / "nohdr.csv", "0.1,0.3\n1,2\n");
  CHECK_THROWS_AS(read_observations(dir / "nohdr.csv"), InputError);
  write_file(dir / "nan.csv", "y1\nnan\n");
  CHECK_THROWS_AS(read_observations(dir / "nan.csv"), InputError);

  write_file(dir / "x.csv", "i,row_k,col_j,value\n1,1,1,1.5\n3,2,2,-1\n");
  const auto x = read_designs(dir / "x.csv", 3, 2);
  REQUIRE(x.size() == 3);
  CHECK(x[0](0, 0) == 1.5);
  CHECK(x[2](1, 1) == -1.0);
  CHECK(x[1].isZero());
  write_file(dir / "xbad.csv", "i,row_k,col_j,value\n4,1,1,1\n");
  CHECK_THROWS_AS(read_designs(dir / "xbad.csv", 3, 2), InputError);
  write_file(dir / "xhdr.csv", "a,b,c,d\n1,1,1,1\n");
  CHECK_THROWS_AS(read_designs(dir / "xhdr.csv", 3, 2), InputError);
}

TEST_CASE("fit command") {
  const fs::path dir = scratch("fit");
  write_file(dir / "y.csv", kToy);
  write_file(dir / "fit.ini", "seed = 3\nsampler.n_iter = 2\nsampler.burn_in = 0\noutput.dir = " +
                                  (dir / "out").string() + "\n");
  const auto before = listing(dir);
  CHECK(cmd_fit(dir / "fit.ini", dir / "y.csv", std::nullopt) == Exit::ok);
  for (const char* f : {"draws.csv", "summary.csv", "zprob.csv", "config_used.txt", "diagnostics.csv"})
    CHECK(fs::exists(dir / "out" / f));
  // Nothing written outside the output directory.
  auto after = listing(dir);
  for (auto it = after.begin(); it != after.end();)
    it = it->rfind("out", 0) == 0 ? after.erase(it) : std::next(it);
  CHECK(after == before);

  const auto draws = read_csv(dir / "out" / "draws.csv");
  CHECK(draws.header == std::vector<std::string>{"sigma1_1", "sigma1_2", "sigma2_2", "phi"});
  CHECK(draws.rows.size() == 2);
  const auto summary = read_csv(dir / "out" / "summary.csv");
  CHECK(summary.header == std::vector<std::string>{"parameter", "mean", "sd", "q025", "q975"});
  CHECK(read_csv(dir / "out" / "zprob.csv").rows.size() == 3);

  // Byte-identical output for the same seed.
  const std::string first = slurp(dir / "out" / "draws.csv");
  CHECK(cmd_fit(dir / "fit.ini", dir / "y.csv", std::nullopt) == Exit::ok);
  CHECK(slurp(dir / "out" / "draws.csv") == first);

  write_file(dir / "nohdr.csv", "0.1,0.3\n1,2\n");
  CHECK(cmd_fit(dir / "fit.ini", dir / "nohdr.csv", std::nullopt) == Exit::input_error);
  write_file(dir / "bad.ini", "sampler.n_iter = -4\noutput.dir = " + (dir / "out2").string() + "\n");
  CHECK(cmd_fit(dir / "bad.ini", dir / "y.csv", std::nullopt) == Exit::input_error);
}

TEST_CASE("fit with designs") {
  const fs::path dir = scratch("fit_design");
  write_file(dir / "y.csv", "y1,y2\n1,2\n0.5,-1\n3,1\n-2,0\n");
  write_file(dir / "x.csv",
             "i,row_k,col_j,value\n1,1,1,1\n1,2,1,1\n2,1,1,1\n2,2,1,1\n3,1,1,1\n3,2,1,1\n4,1,1,1\n4,2,1,1\n");
  write_file(dir / "fit.ini", "sampler.n_iter = 20\nsampler.burn_in = 5\nsampler.model = classicalt\noutput.dir = " +
                                  (dir / "out").string() + "\n");
  CHECK(cmd_fit(dir / "fit.ini", dir / "y.csv", dir / "x.csv") == Exit::ok);
  const auto draws = read_csv(dir / "out" / "draws.csv");
  CHECK(draws.header.front() == "beta1");
  CHECK(draws.header.back() == "nu");
  CHECK_FALSE(fs::exists(dir / "out" / "zprob.csv"));
}

TEST_CASE("simulate command") {
  const fs::path dir = scratch("simulate");
  write_file(dir / "sim.ini", "output.dir = " + (dir / "out").string() +
                                  "\nsampler.n_iter = 50\nsampler.burn_in = 10\nscenario.n = 40\nscenario.p = 3\n"
                                  "scenario.phi_star = 0.2\nsimulate.methods = csm, classicalt\n");
  CHECK(cmd_simulate(dir / "sim.ini") == Exit::ok);
  const auto m = read_csv(dir / "out" / "metrics.csv");
  CHECK(m.header == std::vector<std::string>{"replication", "method", "target", "mse", "cp", "al", "is"});
  CHECK(m.rows.size() == 4);
  CHECK(m.rows.back()[0] == "mean");
  for (const auto& r : m.rows) CHECK(parse_number(r[3], 0) >= 0.0);

  write_file(dir / "bad.ini", "output.dir = " + (dir / "out2").string() + "\nsimulate.methods = csm, robust\n");
  CHECK(cmd_simulate(dir / "bad.ini") == Exit::input_error);
}

TEST_CASE("robustness command") {
  const fs::path dir = scratch("robustness");
  write_file(dir / "rob.ini", "output.dir = " + (dir / "out").string() +
                                  "\nrobustness.families = symmetric, one_sided, scaled_variance\n");
  CHECK(cmd_robustness(dir / "rob.ini") == Exit::ok);
  const auto limits = read_csv(dir / "out" / "limits.csv");
  CHECK(limits.header == std::vector<std::string>{"family", "omega", "value", "reference", "rel_err"});
  bool symmetric_tail = false;
  for (std::size_t i = 0; i < limits.rows.size(); ++i) {
    const auto& r = limits.rows[i];
    if (r[0] == "symmetric" && r[1] == "inf") symmetric_tail = parse_number(r[4], 0) < 0.05;
  }
  CHECK(symmetric_tail);
  const auto dep = read_csv(dir / "out" / "t2_dependence.csv");
  REQUIRE(dep.rows.size() == 1);
  CHECK(dep.rows[0][3] == "true");

  write_file(dir / "literal.ini", "output.dir = " + (dir / "out3").string() +
                                      "\nrobustness.families = symmetric\nrobustness.convergence_rule = literal\n");
  CHECK(cmd_robustness(dir / "literal.ini") == Exit::claim_failed);

  write_file(dir / "empty.ini", "output.dir = " + (dir / "out2").string() + "\nrobustness.omega_grid =\n");
  CHECK(cmd_robustness(dir / "empty.ini") == Exit::input_error);
  write_file(dir / "order.ini", "output.dir = " + (dir / "out2").string() + "\nrobustness.omega_grid = 1e3, 1e2\n");
  CHECK(cmd_robustness(dir / "order.ini") == Exit::input_error);
}
