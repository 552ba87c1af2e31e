#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "amctl/cli.hpp"

using namespace amctl;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / ("amctl_unit_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string err;
  std::filesystem::path dir;
};

Run run(const std::string& command, const Config& config, const std::string& name) {
  RunContext ctx;
  ctx.out_dir = scratch(name);
  ctx.quiet = true;
  std::ostringstream err;
  const int code = run_command(command, config, ctx, err);
  return {code, err.str(), ctx.out_dir};
}

const char* kLinear = R"(# identity control, no nonlinearity
[model]
modes = 3
horizon = 1
kernel = "exponential"
kernel_amplitude = 1.0
kernel_decay = 1.0
control = "identity"
f = "zero"
g = "zero"
zeta = "zero"

[grid]
steps = 200

[experiment]
mu = [1.0, 0.1]
paths = 2
target_mean = [0.0, 0.0, 0.0]
target_loading = 0.0
)";

}  // namespace

TEST_CASE("config round trip") {
  const Config a = Config::parse(kLinear, "linear.toml");
  const Config b = Config::parse(a.serialize());
  CHECK(a == b);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.get_real("model", "horizon", 0.0) == 1.0);
  CHECK(a.get_int("model", "modes", 0) == 3);
  CHECK(a.get_list("experiment", "mu", {}) == std::vector<double>{1.0, 0.1});
  CHECK(a.where("model", "modes") == "linear.toml:3");
}

TEST_CASE("config errors name the line and key") {
  try {
    Config::parse("[model]\nmodes = 2\nbogus = 1\n", "x.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x.toml:3") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[model]\nmodes = \"three\"\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[model]\nmodes = 2\nmodes = 3\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[model]\nmodes = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[experiment]\nmu = [1.0, x]\n"), ConfigError);

  Config c = Config::parse(kLinear);
  CHECK_THROWS_AS(c.set("model", "modes", std::string("x")), ConfigError);
  CHECK_THROWS_AS(c.set("model", "nothing", std::int64_t{1}), ConfigError);
}

TEST_CASE("invalid parameter exits with a config error") {
  Config c = Config::parse(kLinear, "linear.toml");
  c.set("model", "kernel_decay", -1.0);
  const Run r = run("resolvent", c, "bad_decay");
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("model.kernel_decay") != std::string::npos);
  CHECK(run("nothing", c, "bad_command").code == kExitConfig);
}

TEST_CASE("resolvent command") {
  Config c = Config::parse(kLinear);
  c.set("model", "kernel", std::string("zero"));
  const Run r = run("resolvent", c, "zero_kernel");
  CHECK(r.code == kExitOk);
  CHECK(std::filesystem::exists(r.dir / "resolvent.csv"));
  CHECK(std::filesystem::exists(r.dir / "manifest.json"));
  CHECK(slurp(r.dir / "config.txt") == c.serialize());

  const Config golden = Config::load(AMCTL_GOLDEN_DIR "/resolvent_exponential.toml");
  const Run g = run("resolvent", golden, "golden");
  CHECK(g.code == kExitOk);
  std::istringstream got(slurp(g.dir / "axioms.csv"));
  std::istringstream want(slurp(AMCTL_GOLDEN_DIR "/axioms_exponential.csv"));
  std::string a, b;
  int lines = 0;
  while (std::getline(want, b)) {
    REQUIRE(std::getline(got, a));
    CHECK(a.substr(0, a.find(',')) == b.substr(0, b.find(',')));
    ++lines;
  }
  CHECK(lines > 1);
}

TEST_CASE("gramian command") {
  const Run identity = run("gramian", Config::parse(kLinear), "gramian_identity");
  CHECK(identity.code == kExitOk);
  CHECK(slurp(identity.dir / "gramian.csv").rfind("mode,1,2,3\n", 0) == 0);
  const Run example = run("gramian", Config::load(AMCTL_CONFIG_DIR "/example.toml"), "gramian_example");
  CHECK(example.code == kExitOk);
}

TEST_CASE("sweep command on the trivial model") {
  const Run r = run("sweep", Config::load(AMCTL_CONFIG_DIR "/trivial.toml"), "trivial");
  CHECK(r.code == kExitOk);
  CHECK(slurp(r.dir / "sweep.csv").rfind("mu,mean_err,stderr,mean_u2,failures\n", 0) == 0);
}

TEST_CASE("feasibility command") {
  Config c = Config::load(AMCTL_CONFIG_DIR "/feasibility.toml");
  const Run ok = run("feasibility", c, "feasible");
  CHECK(ok.code == kExitOk);
  c.set("experiment", "radius", 1e-6);
  const Run no = run("feasibility", c, "infeasible");
  CHECK(no.code == kExitAcceptance);
  CHECK(slurp(no.dir / "feasibility.csv").rfind("r,mu,M,Ku,lhs,feasible\n", 0) == 0);
}

TEST_CASE("manifest records the run") {
  const Run r = run("resolvent", Config::parse(kLinear, "linear.toml"), "manifest");
  const std::string m = slurp(r.dir / "manifest.json");
  CHECK(m.find("\"subcommand\": \"resolvent\"") != std::string::npos);
  CHECK(m.find("\"config_hash\": \"" + Config::parse(kLinear).hash() + "\"") != std::string::npos);
  CHECK(m.find("\"exit_code\": 0") != std::string::npos);
  CHECK(m.find("resolvent.csv") != std::string::npos);
}
