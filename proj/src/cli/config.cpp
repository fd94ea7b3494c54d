#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <numbers>
#include <regex>
#include <set>

#include "kshear/cli.hpp"

extern char** environ;

namespace kshear::cli {
namespace {

std::string joinKey(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed access to one mapping with unknown-key rejection.
class Section {
public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return node_ && node_[key] && !node_[key].IsNull();
  }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    return node_ ? node_[key] : YAML::Node();
  }

  std::string key(const std::string& k) const { return joinKey(path_, k); }

  double number(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "required");
    return toNumber(raw(k), key(k));
  }
  double number(const std::string& k, double def) { return has(k) ? number(k) : def; }

  int integer(const std::string& k) {
    const double v = number(k);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key(k), "expected an integer");
    return static_cast<int>(v);
  }
  int integer(const std::string& k, int def) { return has(k) ? integer(k) : def; }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    try {
      return raw(k).as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key(k), "expected true or false");
    }
  }

  std::string string(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "required");
    const auto n = raw(k);
    if (!n.IsScalar()) throw ConfigError(key(k), "expected a scalar");
    return n.Scalar();
  }
  std::string string(const std::string& k, const std::string& def) { return has(k) ? string(k) : def; }

  Section child(const std::string& k) { return Section(raw(k), key(k)); }

  std::vector<double> numbers(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "required");
    const auto n = raw(k);
    std::vector<double> out;
    if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) out.push_back(toNumber(n[i], key(k) + "[" + std::to_string(i) + "]"));
    } else if (n.IsMap()) {
      Section s(n, key(k));
      const double from = s.number("from");
      const double to = s.number("to");
      const int count = s.integer("count");
      const std::string spacing = s.string("spacing", "log");
      s.finish();
      if (count < 1) throw ConfigError(key(k) + ".count", "must be >= 1");
      if (spacing != "log" && spacing != "linear") throw ConfigError(key(k) + ".spacing", "expected log or linear");
      if (spacing == "log" && (from <= 0 || to <= 0)) throw ConfigError(key(k), "log spacing needs positive bounds");
      for (int i = 0; i < count; ++i) {
        const double w = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(spacing == "log" ? std::exp(std::log(from) + w * (std::log(to) - std::log(from)))
                                       : from + w * (to - from));
      }
    } else {
      out.push_back(toNumber(n, key(k)));
    }
    return out;
  }

  std::vector<Section> list(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "required");
    const auto n = raw(k);
    if (!n.IsSequence()) throw ConfigError(key(k), "expected a list");
    std::vector<Section> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.emplace_back(n[i], key(k) + "[" + std::to_string(i) + "]");
    return out;
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto name = kv.first.as<std::string>();
      if (!used_.count(name)) throw ConfigError(key(name), "unknown key");
    }
  }

  static double toNumber(const YAML::Node& n, const std::string& key) {
    if (!n || !n.IsScalar()) throw ConfigError(key, "expected a number");
    try {
      return parseQuantity(n.Scalar());
    } catch (const InvalidInput&) {
      throw ConfigError(key, "expected a number, got '" + n.Scalar() + "'");
    }
  }

private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

void applyEnv(YAML::Node& root, const std::string& prefix) {
  std::vector<std::pair<std::string, std::string>> vars;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    if (kv.rfind(prefix, 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    vars.emplace_back(kv.substr(prefix.size(), eq - prefix.size()), kv.substr(eq + 1));
  }
  std::sort(vars.begin(), vars.end());
  for (const auto& [name, value] : vars) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      const auto next = name.find("__", pos);
      parts.push_back(name.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    // match existing keys case-insensitively so "NX" reaches "Nx"
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string key = parts[i];
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      YAML::Node cur = chain.back();
      std::string actual = key;
      if (cur.IsMap()) {
        for (const auto& kv : cur) {
          std::string k = kv.first.as<std::string>();
          std::string lk = k;
          std::transform(lk.begin(), lk.end(), lk.begin(), [](unsigned char c) { return std::tolower(c); });
          if (lk == key) actual = k;
        }
      }
      if (i + 1 == parts.size()) {
        cur[actual] = YAML::Load(value);
      } else {
        if (!cur[actual] || !cur[actual].IsMap()) cur[actual] = YAML::Node(YAML::NodeType::Map);
        chain.push_back(cur[actual]);
      }
    }
  }
}

ShearProfile parseProfile(Section s, double L2, int Ny, const std::filesystem::path& baseDir, int* exponent) {
  const std::string kind = s.string("kind");
  ShearProfile p;
  if (kind == "sin_power") {
    const int m = s.integer("m");
    if (m < 1) throw ConfigError(s.key("m"), "must be >= 1");
    p = sinPowerProfile(m, L2, Ny);
  } else if (kind == "constant") {
    p = constantProfile(s.number("value"), L2, Ny);
  } else if (kind == "csv") {
    std::filesystem::path path = s.string("path");
    if (path.is_relative()) path = baseDir / path;
    p = loadProfileCsv(path.string(), L2, Ny, s.integer("order", 2));
  } else {
    throw ConfigError(s.key("kind"), "expected sin_power, constant or csv");
  }
  if (s.has("label")) p.label = s.string("label");
  if (exponent) *exponent = s.integer("exponent", p.declaredOrder);
  s.finish();
  return p;
}

nlohmann::json toJson(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = toJson(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& v : n) j.push_back(toJson(v));
      return j;
    }
    case YAML::NodeType::Scalar:
      return n.Scalar();
    default:
      return nullptr;
  }
}

FitSpec parseFit(Section s) {
  FitSpec f;
  const auto q = s.string("quantity", "psi");
  const auto v = s.string("variable", "nu");
  if (q == "psi") f.quantity = FitQuantity::Psi;
  else if (q == "measured_rate") f.quantity = FitQuantity::MeasuredRate;
  else throw ConfigError(s.key("quantity"), "expected psi or measured_rate");
  if (v == "nu") f.variable = FitVariable::Nu;
  else if (v == "kappa") f.variable = FitVariable::Kappa;
  else throw ConfigError(s.key("variable"), "expected nu or kappa");
  f.minDecades = s.number("min_decades", 2.0);
  s.finish();
  return f;
}

// Rebuilds a constructed value as ConfigError for the given key.
template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

double parseQuantity(const std::string& text) {
  static const std::regex re(R"(^\s*(?:([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\*?\s*)?pi\s*(?:/\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, re)) {
    double v = std::numbers::pi;
    if (m[1].matched) v *= std::stod(m[1].str());
    if (m[2].matched) v /= std::stod(m[2].str());
    return v;
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw InvalidInput("not a number: " + text);
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw InvalidInput("not a number: " + text);
  return v;
}

YAML::Node loadConfigString(const std::string& text, const std::string& envPrefix) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<file>", std::string("YAML parse error: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("<root>", "expected a mapping");
  applyEnv(root, envPrefix);
  return root;
}

YAML::Node loadConfig(const std::filesystem::path& path, const std::string& envPrefix) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return loadConfigString(ss.str(), envPrefix);
}

SimulateSpec parseSimulate(const YAML::Node& node, std::optional<std::uint64_t> seedOverride) {
  Section root(node, "");
  SimulateSpec spec;
  SolverConfig& c = spec.solver;

  Section g = root.child("grid");
  const double L1 = g.number("L1");
  const double L2 = g.number("L2");
  const int Nx = g.integer("Nx");
  const int Ny = g.integer("Ny");
  g.finish();
  c.grid = keyed("grid", [&] { return Grid2D(L1, L2, Nx, Ny); });

  c.nu = root.number("nu");
  if (!(c.nu > 0.0)) throw ConfigError("nu", "must be positive");
  c.profile = keyed("profile", [&] { return parseProfile(root.child("profile"), L2, Ny, ".", nullptr); });
  c.seed = static_cast<std::uint64_t>(root.number("seed", 0));
  if (seedOverride) c.seed = *seedOverride;

  Section t = root.child("time");
  c.tEnd = t.number("t_end");
  if (!(c.tEnd > 0.0)) throw ConfigError("time.t_end", "must be positive");
  double dtFraction = t.number("dt_fraction", 0.9);
  bool autoDt = true;
  if (t.has("dt")) {
    const auto raw = t.raw("dt");
    if (!(raw.IsScalar() && raw.Scalar() == "auto")) {
      c.dt = Section::toNumber(raw, "dt");
      autoDt = false;
    }
  }
  if (t.has("sample_times")) {
    c.sampleTimes = t.numbers("sample_times");
  } else {
    const double every = t.number("sample_every", c.tEnd);
    if (!(every > 0.0)) throw ConfigError("time.sample_every", "must be positive");
    for (int i = 0;; ++i) {
      const double s = i * every;
      if (s > c.tEnd * (1 + 1e-12)) break;
      c.sampleTimes.push_back(std::min(s, c.tEnd));
    }
  }
  t.finish();

  Section s = root.child("solver");
  c.dealias = s.boolean("dealias", true);
  c.nonlinear = s.boolean("nonlinear", true);
  c.checkEvery = s.integer("check_every", 100);
  s.finish();

  Section in = root.child("init");
  const std::string kind = in.string("kind", "random");
  if (kind == "random") {
    c.init.kind = InitSpec::Kind::Random;
  } else if (kind == "modes") {
    c.init.kind = InitSpec::Kind::Modes;
  } else if (kind == "file") {
    c.init.kind = InitSpec::Kind::File;
  } else {
    throw ConfigError("init.kind", "expected random, modes or file");
  }
  c.init.decayExponent = in.number("decay_exponent", 4.0);
  c.init.amplitude = in.number("amplitude", 1.0);
  c.init.maxK = in.integer("max_k", -1);
  c.init.maxJ = in.integer("max_j", -1);
  c.init.normalizeTo = in.number("normalize_to", -1.0);
  c.init.constant = in.number("constant", 0.0);
  c.init.path = in.string("path", "");
  if (in.has("modes")) {
    for (auto m : in.list("modes")) {
      c.init.modes.push_back({m.integer("k"), m.integer("j"), Complex(m.number("re", 0.0), m.number("im", 0.0))});
      m.finish();
    }
  }
  in.finish();
  if (c.init.kind == InitSpec::Kind::File && c.init.path.empty()) throw ConfigError("init.path", "required for kind file");

  Section l = root.child("ledger");
  spec.audit.recordEvery = l.integer("record_every", 1);
  l.finish();
  if (spec.audit.recordEvery < 1) throw ConfigError("ledger.record_every", "must be >= 1");

  Section a = root.child("audit");
  spec.audit.J = a.integer("J", 64);
  spec.audit.rateThreshold = a.number("rate_threshold", std::exp(-2.0));
  spec.audit.lambdaOverride = a.number("lambda", -1.0);
  spec.failOnAudit = a.boolean("fail_on_audit", false);
  a.finish();

  spec.checkpoints = root.boolean("checkpoints", true);
  root.finish();

  const double cap = stabilityCap(c);
  if (autoDt) {
    if (!(dtFraction > 0.0 && dtFraction <= 1.0)) throw ConfigError("time.dt_fraction", "must lie in (0, 1]");
    // whole number of steps per unit time keeps sample times on the step lattice
    const double target = dtFraction * cap;
    c.dt = 1.0 / std::ceil(1.0 / target);
  }
  if (!(c.dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (c.dt > cap) {
    throw ConfigError("dt", "dt = " + std::to_string(c.dt) + " exceeds the stability cap " + std::to_string(cap));
  }
  keyed("config", [&] {
    validate(c);
    return 0;
  });

  spec.echo = toJson(node);
  spec.echo["resolved"] = {{"dt", c.dt}, {"stability_cap", cap}, {"seed", c.seed}, {"profile", c.profile.label},
                           {"sample_times", c.sampleTimes}};
  return spec;
}

PsiSweepSpec parsePsiSweep(const YAML::Node& node) {
  Section root(node, "");
  PsiSweepSpec spec;
  const double L2 = root.number("L2", std::numbers::pi * 2.0);
  const int Ny = root.integer("Ny", 256);
  for (auto p : root.list("profiles")) {
    spec.profiles.push_back(keyed("profiles", [&] { return parseProfile(p, L2, Ny, ".", nullptr); }));
  }
  spec.nus = root.numbers("nu");
  spec.kappas = root.has("kappa") ? root.numbers("kappa") : std::vector<double>{1.0};
  for (double v : spec.nus)
    if (!(v > 0.0)) throw ConfigError("nu", "values must be positive");
  for (double v : spec.kappas)
    if (!(v > 0.0)) throw ConfigError("kappa", "values must be positive");
  if (root.has("variants")) {
    const auto n = root.raw("variants");
    if (!n.IsSequence()) throw ConfigError("variants", "expected a list");
    for (const auto& v : n) spec.variants.push_back(keyed("variants", [&] { return parseVariant(v.as<std::string>()); }));
  } else {
    spec.variants = {Variant::Full};
  }
  spec.J = root.integer("J", 128);
  if (spec.J < 4) throw ConfigError("J", "must be >= 4");
  spec.measure.doublingCheck = root.boolean("doubling_check", true);
  spec.measure.measureRate = root.boolean("measure_rate", true);
  spec.measure.threshold = root.number("rate_threshold", std::exp(-2.0));
  spec.measure.searchTol = root.number("search_tol", 1e-9);
  spec.measure.doublingTol = root.number("doubling_tol", 1e-6);
  if (root.has("fits")) {
    for (auto f : root.list("fits")) spec.fits.push_back(parseFit(f));
  }
  root.finish();
  spec.echo = toJson(node);
  return spec;
}

DecayFitSpec parseDecayFit(const YAML::Node& node, const std::filesystem::path& configDir) {
  Section root(node, "");
  DecayFitSpec spec;
  spec.input = root.string("input");
  if (spec.input.is_relative()) spec.input = configDir / spec.input;
  for (auto f : root.list("fits")) spec.fits.push_back(parseFit(f));
  root.finish();
  spec.echo = toJson(node);
  return spec;
}

AssumptionSpec parseAssumption(const YAML::Node& node, const std::filesystem::path& configDir) {
  Section root(node, "");
  AssumptionSpec spec;
  const double L2 = root.number("L2", std::numbers::pi * 2.0);
  const int Ny = root.integer("Ny", 256);
  for (auto p : root.list("profiles")) {
    ProfileSpec ps;
    ps.profile = keyed("profiles", [&] { return parseProfile(p, L2, Ny, configDir, &ps.exponent); });
    spec.profiles.push_back(std::move(ps));
  }
  spec.N = root.integer("N", 8);
  spec.delta0 = root.number("delta0", -1.0);
  spec.deltaCount = root.integer("delta_count", 16);
  spec.lambdaPoints = root.integer("lambda_points", 400);
  spec.options.finePoints = root.integer("fine_points", spec.options.finePoints);
  spec.includeCenters = root.boolean("include_centers", true);
  root.finish();
  if (spec.N < 1) throw ConfigError("N", "must be >= 1");
  if (spec.deltaCount < 2) throw ConfigError("delta_count", "must be >= 2");
  spec.echo = toJson(node);
  return spec;
}

}  // namespace kshear::cli
