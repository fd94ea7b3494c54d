#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "kshear/cli.hpp"

using namespace kshear;
using namespace kshear::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kshear_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path writeFile(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int runCli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "kshear");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::stringstream out, e;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, e);
  if (err) *err = e.str();
  return code;
}

std::string configError(const std::string& yaml) {
  try {
    parseSimulate(loadConfigString(yaml));
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

const char* kMinimal = R"(grid: {L1: 2*pi, L2: 2*pi, Nx: 32, Ny: 32}
nu: 0.1
profile: {kind: constant, value: 0}
seed: 1
time: {dt: 0.01, t_end: 1, sample_every: 0.5}
init: {kind: random, amplitude: 0.1, max_k: 4, max_j: 4}
ledger: {record_every: 5}
)";

std::size_t csvRows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += (!line.empty() && line[0] != '#') ? 1 : 0;
  return n - 1;  // header
}

}  // namespace

TEST_CASE("quantities with pi") {
  CHECK(parseQuantity("4*pi") == doctest::Approx(4 * std::numbers::pi));
  CHECK(parseQuantity("pi") == doctest::Approx(std::numbers::pi));
  CHECK(parseQuantity("pi/2") == doctest::Approx(std::numbers::pi / 2));
  CHECK(parseQuantity("3*pi/4") == doctest::Approx(0.75 * std::numbers::pi));
  CHECK(parseQuantity("1.0e-3") == 1e-3);
  CHECK_THROWS_AS(parseQuantity("abc"), InvalidInput);
  CHECK_THROWS_AS(parseQuantity("1.0x"), InvalidInput);
}

TEST_CASE("simulate config validation names the offending key") {
  CHECK(configError(kMinimal).empty());
  std::string noNu = kMinimal;
  noNu.replace(noNu.find("nu: 0.1"), 7, "");
  CHECK(configError(noNu) == "nu");
  std::string bigDt = kMinimal;
  bigDt.replace(bigDt.find("dt: 0.01"), 8, "dt: 5");
  CHECK(configError(bigDt) == "dt");
  CHECK(configError(std::string(kMinimal) + "colour: red\n") == "colour");
  std::string oddNx = kMinimal;
  oddNx.replace(oddNx.find("Nx: 32"), 6, "Nx: 31");
  CHECK(configError(oddNx) == "grid");
  std::string badProfile = kMinimal;
  badProfile.replace(badProfile.find("kind: constant"), 14, "kind: triangle");
  CHECK(configError(badProfile) == "profile.kind");
  CHECK(configError(std::string(kMinimal) + "audit: {J: abc}\n") == "audit.J");
}

TEST_CASE("environment overrides and automatic dt") {
  ::setenv("KSHEAR_CFG_NU", "0.25", 1);
  ::setenv("KSHEAR_CFG_GRID__NX", "16", 1);
  const auto spec = parseSimulate(loadConfigString(kMinimal));
  ::unsetenv("KSHEAR_CFG_NU");
  ::unsetenv("KSHEAR_CFG_GRID__NX");
  CHECK(spec.solver.nu == 0.25);
  CHECK(spec.solver.grid.Nx == 16);

  std::string autoDt = kMinimal;
  autoDt.replace(autoDt.find("dt: 0.01"), 8, "dt: auto");
  const auto a = parseSimulate(loadConfigString(autoDt), 99);
  CHECK(a.solver.dt <= stabilityCap(a.solver));
  CHECK(1.0 / a.solver.dt == doctest::Approx(std::round(1.0 / a.solver.dt)).epsilon(1e-14));
  CHECK(a.solver.seed == 99);
  CHECK(a.solver.sampleTimes == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("simulate writes a manifest covering every output and reruns byte-identically") {
  const auto dir = scratch("simulate");
  const auto cfg = writeFile(dir / "min.yaml", kMinimal);
  REQUIRE(runCli({"simulate", "--config", cfg.string(), "--out-dir", (dir / "a").string(), "--jobs", "1"}) == kOk);
  REQUIRE(runCli({"simulate", "--config", cfg.string(), "--out-dir", (dir / "b").string(), "--jobs", "3"}) == kOk);
  CHECK(csvRows(dir / "a" / "ledger.csv") >= 10);
  const auto man = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(man["subcommand"] == "simulate");
  CHECK(man["seed"] == 1);
  std::set<std::string> listed;
  for (const auto& o : man["outputs"]) {
    const std::string rel = o["path"];
    CHECK(listed.insert(rel).second);
    CHECK(o["sha256"] == sha256Hex(dir / "a" / rel));
    CHECK(slurp(dir / "a" / rel) == slurp(dir / "b" / rel));
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a"))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") ++files;
  CHECK(files == listed.size());
  CHECK(listed.count("checkpoints/phi_0002.bin") == 1);
  std::ifstream in(dir / "a" / "ledger.csv");
  CHECK_NOTHROW(readLedgerCsv(in));
}

TEST_CASE("simulate exit codes") {
  const auto dir = scratch("exit");
  std::string err;
  std::string big = kMinimal;
  big.replace(big.find("dt: 0.01"), 8, "dt: 5");
  CHECK(runCli({"simulate", "--config", writeFile(dir / "dt.yaml", big).string(), "--out-dir", (dir / "o").string()},
               &err) == kConfigError);
  CHECK(err.find("[dt]") != std::string::npos);

  const char* blow = R"(grid: {L1: 32*pi, L2: 32*pi, Nx: 16, Ny: 16}
nu: 1
profile: {kind: constant, value: 0}
time: {dt: 0.2, t_end: 10000}
init: {kind: modes, modes: [{k: 1, j: 1, re: 10000}]}
checkpoints: false
)";
  CHECK(runCli({"simulate", "--config", writeFile(dir / "blow.yaml", blow).string(), "--out-dir", (dir / "b").string()}) ==
        kBlowUp);
  CHECK(fs::exists(dir / "b" / "ledger.csv"));
  CHECK(runCli({"frobnicate"}) == kConfigError);
  CHECK(runCli({"simulate"}) == kConfigError);
  CHECK(runCli({"simulate", "--config", (dir / "missing.yaml").string()}) == kConfigError);
}

TEST_CASE("psi-sweep rows, variants, row-level errors and thread independence") {
  const auto dir = scratch("sweep");
  const char* yaml = R"(L2: 2*pi
Ny: 64
profiles:
  - {kind: constant, value: 0}
  - {kind: sin_power, m: 2}
  - {kind: sin_power, m: 9}
nu: [1.0e-2, 1.0e-3]
kappa: [1, 2]
variants: [full, hypoelliptic]
J: 8
doubling_check: true
measure_rate: false
fits:
  - {quantity: psi, variable: nu, min_decades: 1}
)";
  const auto cfg = writeFile(dir / "s.yaml", yaml);
  REQUIRE(runCli({"psi-sweep", "--config", cfg.string(), "--out-dir", (dir / "a").string(), "--jobs", "1"}) == kOk);
  REQUIRE(runCli({"psi-sweep", "--config", cfg.string(), "--out-dir", (dir / "b").string(), "--jobs", "4"}) == kOk);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  CHECK(slurp(dir / "a" / "fits.csv") == slurp(dir / "b" / "fits.csv"));
  std::ifstream in(dir / "a" / "sweep.csv");
  const auto rows = readSweepCsv(in);
  REQUIRE(rows.size() == 24);
  int hypo = 0, errors = 0;
  for (const auto& r : rows) {
    if (r.m.variant == "hypoelliptic") ++hypo;
    if (!r.error.empty()) {
      ++errors;
      CHECK(r.m.profile == "sin^9");
      CHECK(r.error.find("unresolved") != std::string::npos);
      continue;
    }
    if (r.m.profile == "const(0)" && r.m.variant == "full") {
      CHECK(r.m.psi == doctest::Approx(r.m.nu * std::pow(r.m.kappa, 4)).epsilon(1e-8));
    }
  }
  CHECK(hypo == 12);
  CHECK(errors == 8);
}

TEST_CASE("decay-fit reads sweep CSVs and rejects bad schemas") {
  const auto dir = scratch("fit");
  std::vector<SweepRow> rows;
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    SweepRow r;
    r.m.profile = "sin^2";
    r.m.variant = "full";
    r.m.mEff = 2;
    r.m.nu = 1e-4;
    r.m.kappa = k;
    r.m.psi = 0.3 * std::pow(k, 2.0 / 3.0);
    r.m.measuredRate = 0.2 * std::pow(k, 2.0 / 3.0);
    rows.push_back(r);
  }
  {
    std::ofstream os(dir / "sweep.csv");
    writeSweepCsv(os, rows, "manifest.json");
  }
  writeFile(dir / "fit.yaml", "input: sweep.csv\nfits:\n  - {quantity: psi, variable: kappa, min_decades: 0.9}\n"
                              "  - {quantity: measured_rate, variable: kappa, min_decades: 0.9}\n");
  REQUIRE(runCli({"decay-fit", "--config", (dir / "fit.yaml").string(), "--out-dir", (dir / "o").string()}) == kOk);
  const std::string fits = slurp(dir / "o" / "fits.csv");
  CHECK(fits.find("sin^2,full,psi,kappa") != std::string::npos);
  CHECK(fits.find("0.66666666666") != std::string::npos);

  writeFile(dir / "bad.csv", "# manifest: x\nfoo,bar\n");
  writeFile(dir / "bad.yaml", "input: bad.csv\nfits:\n  - {quantity: psi, variable: nu}\n");
  CHECK(runCli({"decay-fit", "--config", (dir / "bad.yaml").string(), "--out-dir", (dir / "p").string()}) == kConfigError);

  const auto fr = computeFits(rows, {FitSpec{FitQuantity::Psi, FitVariable::Kappa, 0.9}});
  REQUIRE(fr.size() == 1);
  CHECK(fr[0].exponent == doctest::Approx(2.0 / 3.0));
  CHECK(fr[0].predictedExponent == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("assumption-check") {
  const auto dir = scratch("assume");
  writeFile(dir / "sin.yaml", "L2: 2*pi\nNy: 64\nN: 8\nprofiles:\n  - {kind: sin_power, m: 1}\n  - {kind: sin_power, m: 3}\n");
  CHECK(runCli({"assumption-check", "--config", (dir / "sin.yaml").string(), "--out-dir", (dir / "a").string()}) == kOk);
  writeFile(dir / "zero.yaml", "L2: 2*pi\nNy: 64\nprofiles:\n  - {kind: constant, value: 0}\n");
  CHECK(runCli({"assumption-check", "--config", (dir / "zero.yaml").string(), "--out-dir", (dir / "b").string()}) ==
        kAuditFailure);

  // user CSV profile: sin^2 sampled on 128 points
  {
    std::ofstream os(dir / "u.csv");
    os << "y,u\n";
    os.precision(17);
    for (int i = 0; i < 128; ++i) {
      const double y = 2 * std::numbers::pi * i / 128;
      os << y << "," << std::sin(y) * std::sin(y) << "\n";
    }
  }
  writeFile(dir / "csv.yaml", "L2: 2*pi\nNy: 64\nprofiles:\n  - {kind: csv, path: u.csv, order: 2}\n");
  CHECK(runCli({"assumption-check", "--config", (dir / "csv.yaml").string(), "--out-dir", (dir / "c").string()}) == kOk);
  const auto j = nlohmann::json::parse(slurp(dir / "c" / "assumption.json"));
  CHECK(j["pass"] == true);
  CHECK(!j["profiles"][0]["audit"]["cells"].empty());
  CHECK(j["profiles"][0]["audit"]["cells"][0].contains("centers"));
}

TEST_CASE("report joins sweeps and runs") {
  const auto dir = scratch("report");
  CHECK(runCli({"report", "--out-dir", (dir / "empty").string()}) == kOk);
  CHECK(csvRows(dir / "empty" / "summary.csv") == 0);

  writeFile(dir / "min.yaml", kMinimal);
  REQUIRE(runCli({"simulate", "--config", (dir / "min.yaml").string(), "--out-dir", (dir / "run").string()}) == kOk);
  writeFile(dir / "s.yaml", "L2: 2*pi\nNy: 32\nprofiles:\n  - {kind: constant, value: 0}\nnu: [0.1]\nkappa: [1]\nJ: 8\n");
  REQUIRE(runCli({"psi-sweep", "--config", (dir / "s.yaml").string(), "--out-dir", (dir / "sweep").string()}) == kOk);
  REQUIRE(runCli({"report", "--out-dir", (dir / "r").string(), (dir / "sweep" / "manifest.json").string(),
                  (dir / "run" / "manifest.json").string()}) == kOk);
  CHECK(csvRows(dir / "r" / "summary.csv") == 1);
  const std::string summary = slurp(dir / "r" / "summary.csv");
  CHECK(summary.find("const(0),0.10000000000000001,1,0.0999999") != std::string::npos);

  CHECK(runCli({"report", "--out-dir", (dir / "m").string(), (dir / "nope" / "manifest.json").string()}) == kConfigError);
  const auto man = nlohmann::json::parse(slurp(dir / "m" / "manifest.json"));
  CHECK(man["missing"].size() == 1);
}
