#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "kshear/diagnostics.hpp"
#include "kshear/errors.hpp"
#include "kshear/mode_operator.hpp"
#include "kshear/profiles.hpp"
#include "kshear/solver.hpp"

namespace kshear::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kBlowUp = 3, kAuditFailure = 4 };

/// Invalid configuration; key() names the offending entry ("grid.Nx", "dt", ...).
class ConfigError : public InvalidInput {
public:
  ConfigError(const std::string& key, const std::string& what)
      : InvalidInput(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

inline constexpr const char* kEnvPrefix = "KSHEAR_CFG_";

/// Parses a YAML file and applies environment overrides: KSHEAR_CFG_A__B=v
/// sets key a.b (lower-cased) to the scalar v.
YAML::Node loadConfig(const std::filesystem::path& path, const std::string& envPrefix = kEnvPrefix);
YAML::Node loadConfigString(const std::string& text, const std::string& envPrefix = kEnvPrefix);

/// Numbers, or multiples of pi written as "pi", "4*pi", "pi/2", "3*pi/4".
double parseQuantity(const std::string& text);

struct SimulateSpec {
  SolverConfig solver;
  RunAuditOptions audit;
  bool checkpoints = true;
  bool failOnAudit = false;
  nlohmann::json echo;
};

struct ProfileSpec {
  ShearProfile profile;
  int exponent = 2;  ///< audit exponent (defaults to the declared order)
};

struct FitSpec {
  FitQuantity quantity = FitQuantity::Psi;
  FitVariable variable = FitVariable::Nu;
  double minDecades = 2.0;
};

struct PsiSweepSpec {
  std::vector<ShearProfile> profiles;
  std::vector<double> nus;
  std::vector<double> kappas;
  std::vector<Variant> variants;
  int J = 128;
  MeasureOptions measure;
  std::vector<FitSpec> fits;
  nlohmann::json echo;
};

struct DecayFitSpec {
  std::filesystem::path input;
  std::vector<FitSpec> fits;
  nlohmann::json echo;
};

struct AssumptionSpec {
  std::vector<ProfileSpec> profiles;
  int N = 8;
  double delta0 = -1.0;  ///< <= 0: default L2/6
  int deltaCount = 16;
  int lambdaPoints = 400;
  AuditOptions options;
  bool includeCenters = true;
  nlohmann::json echo;
};

SimulateSpec parseSimulate(const YAML::Node& root, std::optional<std::uint64_t> seedOverride = {});
PsiSweepSpec parsePsiSweep(const YAML::Node& root);
DecayFitSpec parseDecayFit(const YAML::Node& root, const std::filesystem::path& configDir);
AssumptionSpec parseAssumption(const YAML::Node& root, const std::filesystem::path& configDir);

struct CommonOptions {
  std::filesystem::path config;
  std::filesystem::path outDir = "out";
  int jobs = 0;  ///< 0: hardware concurrency
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;  ///< report: manifest paths
};

int simulate(const CommonOptions& opts, std::ostream& log);
int psiSweep(const CommonOptions& opts, std::ostream& log);
int decayFit(const CommonOptions& opts, std::ostream& log);
int assumptionCheck(const CommonOptions& opts, std::ostream& log);
int report(const CommonOptions& opts, std::ostream& log);

/// Parses argv and runs a subcommand; maps exceptions to exit codes.
int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

// -- shared plumbing (exposed for tests) ---------------------------------------

std::string sha256Hex(const std::filesystem::path& file);

/// Runs f(i) for i in [0, n) on `jobs` workers; results must be written by index.
void parallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

struct SweepRow {
  DecayMeasurement m;
  std::string error;
};

void writeSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows, const std::string& manifestRef);
std::vector<SweepRow> readSweepCsv(std::istream& is);

struct FitRow {
  std::string profile;
  std::string variant;
  std::string quantity;
  std::string variable;
  double fixedValue = 0.0;
  int mEff = 0;
  int points = 0;
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;
  double predictedExponent = 0.0;
  std::string error;
};

std::vector<FitRow> computeFits(const std::vector<SweepRow>& rows, const std::vector<FitSpec>& fits);
void writeFitCsv(std::ostream& os, const std::vector<FitRow>& rows, const std::string& manifestRef);

}  // namespace kshear::cli
