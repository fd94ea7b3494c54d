#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "kshear/cli.hpp"
#include "kshear/field_io.hpp"

#ifndef KSHEAR_VERSION
#define KSHEAR_VERSION "unknown"
#endif

namespace kshear::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.json";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double toDouble(const std::string& s, const char* what) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidInput(std::string("CSV: bad ") + what + " '" + s + "'");
}

// Manifest under construction: output files are hashed when the manifest is written.
class Manifest {
public:
  Manifest(std::string subcommand, fs::path outDir) : outDir_(std::move(outDir)) {
    j_["subcommand"] = std::move(subcommand);
    j_["tool_version"] = KSHEAR_VERSION;
    start_ = std::chrono::steady_clock::now();
  }
  nlohmann::json& json() { return j_; }
  fs::path path(const std::string& rel) const { return outDir_ / rel; }
  void add(const std::string& rel) { outputs_.push_back(rel); }
  void write() {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& rel : outputs_) {
      outs.push_back({{"path", rel}, {"sha256", sha256Hex(outDir_ / rel)}, {"bytes", fs::file_size(outDir_ / rel)}});
    }
    j_["outputs"] = outs;
    j_["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream os(outDir_ / kManifestName);
    os << j_.dump(2) << "\n";
  }

private:
  fs::path outDir_;
  nlohmann::json j_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

std::ofstream openOut(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

int resolveJobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

const char* quantityName(FitQuantity q) { return q == FitQuantity::Psi ? "psi" : "measured_rate"; }
const char* variableName(FitVariable v) { return v == FitVariable::Nu ? "nu" : "kappa"; }

// log-log slope of ||phi_neq|| over the second half of the ledger
double trajectoryRate(const BootstrapLedger& l) {
  const std::size_t n = l.size();
  double st = 0, sl = 0, stt = 0, stl = 0;
  int cnt = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    if (!(l.normPhiNeq[i] > 0.0)) continue;
    const double t = l.times[i], y = std::log(l.normPhiNeq[i]);
    st += t;
    sl += y;
    stt += t * t;
    stl += t * y;
    ++cnt;
  }
  if (cnt < 2) return std::nan("");
  const double den = cnt * stt - st * st;
  return den > 0 ? -(cnt * stl - st * sl) / den : std::nan("");
}

}  // namespace

std::string sha256Hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void parallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const int workers = std::max(1, std::min<int>(resolveJobs(jobs), static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// -- sweep CSV ------------------------------------------------------------------

namespace {
constexpr const char* kSweepHeader =
    "profile,variant,m_eff,nu,kappa,J,psi,argmin_lambda,rate_threshold,measured_rate,gp_margin,j_converged,"
    "j_relative_change,rate_failed,error";
constexpr const char* kFitHeader =
    "profile,variant,quantity,variable,fixed_value,m_eff,points,exponent,prefactor,residual,predicted_exponent,error";
}  // namespace

void writeSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows, const std::string& manifestRef) {
  os << "# manifest: " << manifestRef << "\n" << kSweepHeader << "\n";
  for (const auto& r : rows) {
    const auto& m = r.m;
    os << clean(m.profile) << ',' << m.variant << ',' << m.mEff << ',' << fmt(m.nu) << ',' << fmt(m.kappa) << ','
       << m.J << ',' << fmt(m.psi) << ',' << fmt(m.argminLambda) << ',' << fmt(m.rateThreshold) << ','
       << fmt(m.measuredRate) << ',' << fmt(m.gpMargin) << ',' << (m.jConverged ? 1 : 0) << ','
       << fmt(m.jRelativeChange) << ',' << (m.rateFailed ? 1 : 0) << ',' << clean(r.error) << "\n";
  }
}

std::vector<SweepRow> readSweepCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# manifest: ", 0) != 0) throw InvalidInput("sweep CSV: missing manifest line");
  if (!std::getline(is, line) || line != kSweepHeader) throw InvalidInput("sweep CSV: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = splitCsv(line);
    if (c.size() != 15) throw InvalidInput("sweep CSV: expected 15 columns");
    SweepRow r;
    r.m.profile = c[0];
    r.m.variant = c[1];
    r.m.mEff = static_cast<int>(toDouble(c[2], "m_eff"));
    r.m.nu = toDouble(c[3], "nu");
    r.m.kappa = toDouble(c[4], "kappa");
    r.m.J = static_cast<int>(toDouble(c[5], "J"));
    r.m.psi = toDouble(c[6], "psi");
    r.m.argminLambda = toDouble(c[7], "argmin_lambda");
    r.m.rateThreshold = toDouble(c[8], "rate_threshold");
    r.m.measuredRate = toDouble(c[9], "measured_rate");
    r.m.gpMargin = toDouble(c[10], "gp_margin");
    r.m.jConverged = c[11] == "1";
    r.m.jRelativeChange = toDouble(c[12], "j_relative_change");
    r.m.rateFailed = c[13] == "1";
    r.error = c[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<FitRow> computeFits(const std::vector<SweepRow>& rows, const std::vector<FitSpec>& fits) {
  std::vector<FitRow> out;
  for (const auto& spec : fits) {
    // groups keyed by (profile, variant, fixed variable), in first-appearance order
    std::vector<std::tuple<std::string, std::string, double>> keys;
    std::map<std::tuple<std::string, std::string, double>, std::vector<DecayMeasurement>> groups;
    for (const auto& r : rows) {
      if (!r.error.empty()) continue;
      const double fixed = spec.variable == FitVariable::Nu ? r.m.kappa : r.m.nu;
      auto key = std::make_tuple(r.m.profile, r.m.variant, fixed);
      if (!groups.count(key)) keys.push_back(key);
      groups[key].push_back(r.m);
    }
    for (const auto& key : keys) {
      const auto& data = groups[key];
      FitRow f;
      f.profile = std::get<0>(key);
      f.variant = std::get<1>(key);
      f.fixedValue = std::get<2>(key);
      f.quantity = quantityName(spec.quantity);
      f.variable = variableName(spec.variable);
      f.mEff = data.front().mEff;
      f.points = static_cast<int>(data.size());
      const double me = f.mEff;
      f.predictedExponent = spec.variable == FitVariable::Nu ? me / (me + 4.0) : 4.0 / (me + 4.0);
      try {
        const auto fit = fitScaling(data, spec.quantity, spec.variable, spec.minDecades);
        f.exponent = fit.exponent;
        f.prefactor = fit.prefactor;
        f.residual = fit.residual;
      } catch (const std::exception& e) {
        f.exponent = f.prefactor = f.residual = std::nan("");
        f.error = e.what();
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

void writeFitCsv(std::ostream& os, const std::vector<FitRow>& rows, const std::string& manifestRef) {
  os << "# manifest: " << manifestRef << "\n" << kFitHeader << "\n";
  for (const auto& f : rows) {
    os << clean(f.profile) << ',' << f.variant << ',' << f.quantity << ',' << f.variable << ',' << fmt(f.fixedValue)
       << ',' << f.mEff << ',' << f.points << ',' << fmt(f.exponent) << ',' << fmt(f.prefactor) << ','
       << fmt(f.residual) << ',' << fmt(f.predictedExponent) << ',' << clean(f.error) << "\n";
  }
}

// -- subcommands ------------------------------------------------------------------

int simulate(const CommonOptions& opts, std::ostream& log) {
  const SimulateSpec spec = parseSimulate(loadConfig(opts.config), opts.seed);
  SolverConfig cfg = spec.solver;
  if (cfg.init.kind == InitSpec::Kind::File && fs::path(cfg.init.path).is_relative()) {
    cfg.init.path = (opts.config.parent_path() / cfg.init.path).string();
  }
  fs::create_directories(opts.outDir);
  Manifest man("simulate", opts.outDir);
  man.json()["config"] = spec.echo;
  man.json()["seed"] = cfg.seed;

  const RunAudit audit = auditRun(cfg, spec.audit);

  {
    auto os = openOut(man.path("ledger.csv"));
    writeLedgerCsv(os, audit.ledger, kManifestName);
  }
  man.add("ledger.csv");
  {
    auto os = openOut(man.path("energy.csv"));
    os << "# manifest: " << kManifestName << "\nt,norm_phi_sq,lap_sq,grad_sq,cubic\n";
    const auto& l = audit.ledger;
    for (std::size_t i = 0; i < l.size(); ++i) {
      os << fmt(l.times[i]) << ',' << fmt(l.normPhiSq[i]) << ',' << fmt(l.lapSq[i]) << ',' << fmt(l.gradSq[i]) << ','
         << fmt(l.cubic[i]) << "\n";
    }
  }
  man.add("energy.csv");
  nlohmann::json aj = toJson(audit);
  aj["trajectory_rate"] = num(trajectoryRate(audit.ledger));
  aj["kappa"] = 2.0 * std::numbers::pi / cfg.grid.L1;
  aj["profile"] = cfg.profile.label;
  {
    auto os = openOut(man.path("audit.json"));
    os << aj.dump(2) << "\n";
  }
  man.add("audit.json");
  nlohmann::json sampleList = nlohmann::json::array();
  if (spec.checkpoints) {
    fs::create_directories(man.path("checkpoints"));
    for (std::size_t i = 0; i < audit.samples.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoints/phi_%04zu.bin", i);
      writeCheckpoint(man.path(name), FieldCheckpoint{audit.samples[i].phi, audit.samples[i].t, audit.samples[i].step});
      man.add(name);
      sampleList.push_back({{"t", audit.samples[i].t}, {"step", audit.samples[i].step}, {"file", name}});
    }
  }
  man.json()["samples"] = sampleList;
  man.json()["steps"] = audit.ledger.size() ? static_cast<std::uint64_t>(std::llround(audit.ledger.times.back() / cfg.dt)) : 0;
  man.json()["blew_up"] = audit.blewUp;
  man.write();

  log << "simulate: " << audit.ledger.size() << " ledger rows, lambda = " << audit.lambda
      << ", bootstrap audits " << (audit.bootstrapPass() ? "pass" : "fail") << "\n";
  if (audit.blewUp) {
    log << "simulate: blow-up at t = " << audit.blowUpTime << "\n";
    return kBlowUp;
  }
  if (spec.failOnAudit && !audit.bootstrapPass()) return kAuditFailure;
  return kOk;
}

int psiSweep(const CommonOptions& opts, std::ostream& log) {
  const PsiSweepSpec spec = parsePsiSweep(loadConfig(opts.config));
  struct Task {
    std::size_t profile;
    Variant variant;
    double nu, kappa;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < spec.profiles.size(); ++p)
    for (Variant v : spec.variants)
      for (double nu : spec.nus)
        for (double kappa : spec.kappas) tasks.push_back({p, v, nu, kappa});

  std::vector<SweepRow> rows(tasks.size());
  parallelFor(tasks.size(), opts.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    SweepRow& r = rows[i];
    try {
      r.m = measure(t.nu, t.kappa, spec.profiles[t.profile], spec.J, t.variant, spec.measure);
    } catch (const UnresolvedProfile& e) {
      r.error = std::string("unresolved: ") + e.what() + " (needs J >= " + std::to_string(e.requiredModes()) + ")";
    } catch (const InvalidInput& e) {
      r.error = e.what();
    }
    if (!r.error.empty()) {
      r.m.profile = spec.profiles[t.profile].label;
      r.m.variant = toString(t.variant);
      r.m.nu = t.nu;
      r.m.kappa = t.kappa;
      r.m.J = spec.J;
      r.m.psi = r.m.argminLambda = r.m.measuredRate = r.m.gpMargin = r.m.jRelativeChange = std::nan("");
    }
  });

  fs::create_directories(opts.outDir);
  Manifest man("psi-sweep", opts.outDir);
  man.json()["config"] = spec.echo;
  man.json()["jobs"] = resolveJobs(opts.jobs);
  {
    auto os = openOut(man.path("sweep.csv"));
    writeSweepCsv(os, rows, kManifestName);
  }
  man.add("sweep.csv");
  if (!spec.fits.empty()) {
    auto os = openOut(man.path("fits.csv"));
    writeFitCsv(os, computeFits(rows, spec.fits), kManifestName);
    man.add("fits.csv");
  }
  man.json()["rows"] = rows.size();
  man.write();
  std::size_t errors = 0;
  for (const auto& r : rows) errors += r.error.empty() ? 0 : 1;
  log << "psi-sweep: " << rows.size() << " rows, " << errors << " row errors\n";
  return kOk;
}

int decayFit(const CommonOptions& opts, std::ostream& log) {
  const DecayFitSpec spec = parseDecayFit(loadConfig(opts.config), opts.config.parent_path());
  std::ifstream in(spec.input);
  if (!in) throw ConfigError("input", "cannot open " + spec.input.string());
  std::vector<SweepRow> rows;
  try {
    rows = readSweepCsv(in);
  } catch (const InvalidInput& e) {
    throw ConfigError("input", e.what());
  }
  const auto fits = computeFits(rows, spec.fits);
  fs::create_directories(opts.outDir);
  Manifest man("decay-fit", opts.outDir);
  man.json()["config"] = spec.echo;
  man.json()["input_sha256"] = sha256Hex(spec.input);
  {
    auto os = openOut(man.path("fits.csv"));
    writeFitCsv(os, fits, kManifestName);
  }
  man.add("fits.csv");
  man.write();
  log << "decay-fit: " << fits.size() << " fits\n";
  return kOk;
}

int assumptionCheck(const CommonOptions& opts, std::ostream& log) {
  const AssumptionSpec spec = parseAssumption(loadConfig(opts.config), opts.config.parent_path());
  std::vector<nlohmann::json> results(spec.profiles.size());
  std::vector<char> passes(spec.profiles.size(), 0);
  parallelFor(spec.profiles.size(), opts.jobs, [&](std::size_t i) {
    const auto& ps = spec.profiles[i];
    const double d0 = spec.delta0 > 0 ? spec.delta0 : defaultDelta0(ps.profile.L2());
    const auto a = auditAssumption(ps.profile, ps.exponent, spec.N, d0, defaultLambdaGrid(ps.profile, spec.lambdaPoints),
                                   defaultDeltaGrid(d0, spec.deltaCount), spec.options);
    results[i] = {{"profile", ps.profile.label}, {"audit", toJson(a, spec.includeCenters)}};
    passes[i] = a.pass ? 1 : 0;
  });
  bool all = true;
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    arr.push_back(results[i]);
    all = all && passes[i];
    log << "assumption-check: " << spec.profiles[i].profile.label << " exponent " << spec.profiles[i].exponent << ": "
        << (passes[i] ? "pass" : "fail") << "\n";
  }
  fs::create_directories(opts.outDir);
  Manifest man("assumption-check", opts.outDir);
  man.json()["config"] = spec.echo;
  {
    auto os = openOut(man.path("assumption.json"));
    os << nlohmann::json{{"pass", all}, {"profiles", arr}}.dump(2) << "\n";
  }
  man.add("assumption.json");
  man.write();
  return all ? kOk : kAuditFailure;
}

int report(const CommonOptions& opts, std::ostream& log) {
  std::vector<std::string> missing;
  std::vector<SweepRow> sweep;
  struct Run {
    std::string profile;
    double nu, kappa, lambda, trajectoryRate;
    bool bootstrapPass;
    std::string manifest;
  };
  std::vector<Run> runs;
  for (const auto& m : opts.inputs) {
    std::ifstream in(m);
    if (!in) {
      missing.push_back(m.string());
      continue;
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception&) {
      missing.push_back(m.string() + " (unreadable manifest)");
      continue;
    }
    const fs::path dir = m.parent_path();
    const std::string sub = j.value("subcommand", "");
    auto open = [&](const std::string& rel, std::ifstream& f) {
      f.open(dir / rel);
      if (!f) missing.push_back((dir / rel).string());
      return static_cast<bool>(f);
    };
    if (sub == "psi-sweep") {
      std::ifstream f;
      if (open("sweep.csv", f)) {
        auto rows = readSweepCsv(f);
        sweep.insert(sweep.end(), rows.begin(), rows.end());
      }
    } else if (sub == "simulate") {
      std::ifstream f;
      if (open("audit.json", f)) {
        nlohmann::json a;
        f >> a;
        auto get = [](const nlohmann::json& v) { return v.is_number() ? v.get<double>() : std::nan(""); };
        runs.push_back({a.value("profile", ""), get(a["nu"]), get(a["kappa"]), get(a["lambda"]),
                        get(a["trajectory_rate"]), a.value("bootstrap_pass", false), m.string()});
      }
    } else {
      missing.push_back(m.string() + " (unsupported subcommand '" + sub + "')");
    }
  }

  fs::create_directories(opts.outDir);
  Manifest man("report", opts.outDir);
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& m : opts.inputs) inputs.push_back(m.string());
  man.json()["inputs"] = inputs;
  std::size_t count = 0;
  {
    auto os = openOut(man.path("summary.csv"));
    os << "# manifest: " << kManifestName
       << "\nprofile,nu,kappa,psi,measured_rate,trajectory_rate,bootstrap_pass,slower_than_linear,source\n";
    auto findSweep = [&](const std::string& p, double nu, double kappa) -> const SweepRow* {
      for (const auto& r : sweep)
        if (r.m.profile == p && r.m.variant == "full" && std::abs(r.m.nu - nu) <= 1e-12 * nu &&
            std::abs(r.m.kappa - kappa) <= 1e-12 * kappa)
          return &r;
      return nullptr;
    };
    if (!runs.empty()) {
      for (const auto& r : runs) {
        const SweepRow* s = findSweep(r.profile, r.nu, r.kappa);
        const double psiV = s ? s->m.psi : std::nan("");
        const double rate = s && std::isfinite(s->m.measuredRate) ? s->m.measuredRate : r.lambda;
        const bool slower = std::isfinite(r.trajectoryRate) && std::isfinite(rate) && r.trajectoryRate < rate;
        os << clean(r.profile) << ',' << fmt(r.nu) << ',' << fmt(r.kappa) << ',' << fmt(psiV) << ',' << fmt(rate) << ','
           << fmt(r.trajectoryRate) << ',' << (r.bootstrapPass ? 1 : 0) << ',' << (slower ? 1 : 0) << ','
           << clean(r.manifest) << "\n";
        ++count;
      }
    } else {
      for (const auto& r : sweep) {
        if (!r.error.empty()) continue;
        os << clean(r.m.profile) << ',' << fmt(r.m.nu) << ',' << fmt(r.m.kappa) << ',' << fmt(r.m.psi) << ','
           << fmt(r.m.measuredRate) << ",nan,0,0,sweep\n";
        ++count;
      }
    }
  }
  man.add("summary.csv");
  man.json()["missing"] = missing;
  man.json()["rows"] = count;
  man.write();
  log << "report: " << count << " rows";
  if (!missing.empty()) log << ", " << missing.size() << " missing inputs";
  log << "\n";
  return missing.empty() ? kOk : kConfigError;
}

int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shear-flow Kuramoto-Sivashinsky numerics"};
  app.set_version_flag("--version", std::string(KSHEAR_VERSION));
  app.require_subcommand(1);
  CommonOptions opts;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool needConfig) {
    auto* c = sub->add_option("--config", opts.config, "YAML configuration file");
    if (needConfig) c->required();
    sub->add_option("--out-dir", opts.outDir, "output directory");
    sub->add_option("--jobs", opts.jobs, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "override the configured seed");
  };
  auto* sim = app.add_subcommand("simulate", "run the solver with bootstrap diagnostics");
  common(sim, true);
  auto* sweep = app.add_subcommand("psi-sweep", "pseudospectral bound and decay-rate sweep");
  common(sweep, true);
  auto* fit = app.add_subcommand("decay-fit", "scaling fits of a psi-sweep CSV");
  common(fit, true);
  auto* assume = app.add_subcommand("assumption-check", "audit of the sublevel-set covering assumption");
  common(assume, true);
  auto* rep = app.add_subcommand("report", "join sweep and simulation manifests");
  common(rep, false);
  rep->add_option("manifests", opts.inputs, "manifest.json files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  for (auto* s : {sim, sweep, fit, assume, rep})
    if (s->parsed() && s->count("--seed")) opts.seed = seed;

  try {
    if (sim->parsed()) return simulate(opts, out);
    if (sweep->parsed()) return psiSweep(opts, out);
    if (fit->parsed()) return decayFit(opts, out);
    if (assume->parsed()) return assumptionCheck(opts, out);
    if (rep->parsed()) return report(opts, out);
  } catch (const ConfigError& e) {
    err << "config error [" << e.key() << "]: " << e.what() << "\n";
    return kConfigError;
  } catch (const BlowUp& e) {
    err << "blow-up at t = " << e.time() << ": " << e.what() << "\n";
    return kBlowUp;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}

}  // namespace kshear::cli
