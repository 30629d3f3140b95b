#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

const std::string exe = XPHASE_CLI_PATH;
const std::string configs = XPHASE_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  Result r;
  FILE* pipe = popen((exe + " " + args + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("xphase_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* subcommands[] = {"simulate", "sweep-uncertainty", "sweep-hbar", "dwell",
                             "ellipse-check", "spectrum", "compare", "ensemble",
                             "identity-check"};

TEST(Cli, HelpListsEveryFlag) {
  for (const char* sc : subcommands) {
    const auto r = run(std::string(sc) + " --help");
    EXPECT_EQ(r.code, 0) << sc;
    for (const char* flag : {"--config", "--out", "--seed", "--set", "--levels", "--quiet"})
      EXPECT_NE(r.output.find(flag), std::string::npos) << sc << " " << flag;
  }
  const auto top = run("--help");
  for (const char* sc : subcommands) EXPECT_NE(top.output.find(sc), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("codes");
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("spectrum --bogus").code, 2);
  const auto unknown = run("spectrum --quiet --out " + out.string() + " --set spectrum.nlevels=3");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.output.find("spectrum.nlevels"), std::string::npos);
  EXPECT_EQ(run("spectrum --config /nonexistent.json").code, 2);
  // Wrong flavor for the operation is a usage error.
  EXPECT_EQ(run("sweep-uncertainty --quiet --out " + out.string() + " --set flavor=mfqm").code, 2);
  // Level above the barrier does not fit in a soft-walled box: domain error.
  const auto dom = run("spectrum --quiet --out " + out.string() +
                       " --set spectrum.grid.x_min=-1.2 --set spectrum.grid.x_max=1.2 --levels 40");
  EXPECT_EQ(dom.code, 1) << dom.output;
  EXPECT_NE(dom.output.find("domain error"), std::string::npos);
  EXPECT_EQ(run("ensemble --quiet --out " + out.string() + " --set ensemble.sigma_x=0").code, 2);
  const auto ok = run("spectrum --config " + configs + "/dw.json --levels 4 --out " + out.string());
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.output.find("spectrum: 4 levels"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "spectrum.json"));
  EXPECT_EQ(run("spectrum --quiet --config " + configs + "/dw.json --out " + out.string()).output, "");
}

TEST(Cli, DeclaredOutputs) {
  const auto out = scratch("outputs");
  ASSERT_EQ(run("simulate --quiet --config " + configs + "/sho.json --out " + out.string()).code, 0);
  EXPECT_EQ(slurp(out / "trajectory.csv").rfind("t,x,y,p,q,generator,constraint\n", 0), 0u);
  EXPECT_NE(slurp(out / "events.json").find("\"termination\": \"completed\""), std::string::npos);
  ASSERT_EQ(run("ensemble --quiet --seed 5 --set ensemble.samples=10 --out " + out.string()).code, 0);
  EXPECT_EQ(slurp(out / "ensemble.csv").rfind("x,p,weight\n", 0), 0u);
  EXPECT_NE(slurp(out / "config.json").find("\"seed\": 5"), std::string::npos);
}

TEST(Cli, ConfigEchoReproducesRun) {
  const auto a = scratch("echo_a"), b = scratch("echo_b");
  ASSERT_EQ(run("identity-check --quiet --config " + configs + "/sho.json --set identity.points=50 --out " + a.string()).code, 0);
  ASSERT_EQ(run("identity-check --quiet --config " + (a / "config.json").string() + " --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "config.json"), slurp(b / "config.json"));
  EXPECT_EQ(slurp(a / "identity.json"), slurp(b / "identity.json"));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b})
    ASSERT_EQ(run("ensemble --quiet --seed 11 --set ensemble.samples=500 --set ensemble.t=1 --out " + dir.string()).code, 0);
  for (const char* f : {"ensemble.csv", "ensemble.json", "config.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto c = scratch("det_c");
  ASSERT_EQ(run("ensemble --quiet --seed 12 --set ensemble.samples=500 --set ensemble.t=1 --out " + c.string()).code, 0);
  EXPECT_NE(slurp(a / "ensemble.csv"), slurp(c / "ensemble.csv"));
}

}  // namespace
