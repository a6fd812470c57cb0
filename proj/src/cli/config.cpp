#include "mflow/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mflow/errors.hpp"

namespace mflow::cli {

namespace {

enum class Kind { Number, Integer, String, Object, Array, Bool };

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Number: return "number";
    case Kind::Integer: return "integer";
    case Kind::String: return "string";
    case Kind::Object: return "object";
    case Kind::Array: return "array";
    case Kind::Bool: return "boolean";
  }
  return "?";
}

bool has_kind(const json& v, Kind k) {
  switch (k) {
    case Kind::Number: return v.is_number();
    case Kind::Integer: return v.is_number_integer();
    case Kind::String: return v.is_string();
    case Kind::Object: return v.is_object();
    case Kind::Array: return v.is_array();
    case Kind::Bool: return v.is_boolean();
  }
  return false;
}

using Table = std::map<std::string, Kind>;

const std::map<std::string, Table>& sections() {
  static const std::map<std::string, Table> t = {
      {"spectral",
       {{"d", Kind::Integer}, {"alpha", Kind::Number}, {"k", Kind::Number}, {"d_prime", Kind::Number},
        {"trunc", Kind::Integer}, {"quad_order", Kind::Integer}}},
      {"potential",
       {{"name", Kind::String}, {"phi", Kind::String}, {"a", Kind::Number}, {"theta", Kind::Number},
        {"approx", Kind::Integer}}},
      {"gaussian", {{"n_samples", Kind::Integer}, {"p", Kind::Number}, {"mode", Kind::String}}},
      {"flow",
       {{"mode", Kind::String}, {"p", Kind::Number}, {"dt", Kind::Number}, {"n_steps", Kind::Integer},
        {"n_chains", Kind::Integer}, {"record_every", Kind::Integer}, {"integrator", Kind::String},
        {"burn_in", Kind::Integer}, {"sample_every", Kind::Integer}, {"horizon", Kind::Number},
        {"martingale_chains", Kind::Integer}, {"observables", Kind::Array}}},
      {"form",
       {{"kind", Kind::String}, {"n_samples", Kind::Integer}, {"p", Kind::Number}, {"mode", Kind::String},
        {"jump", Kind::Object}, {"killing_rate", Kind::Number}, {"k_eigenvalues", Kind::Array},
        {"k_tail", Kind::Number}, {"u", Kind::Object}, {"v", Kind::Object}}},
      {"check",
       {{"quarter_samples", Kind::Integer}, {"chain_step", Kind::Number}, {"chain_points", Kind::Integer},
        {"ibp_samples", Kind::Integer}, {"jump_pairs", Kind::Integer}, {"lip_measures", Kind::Integer},
        {"kfun_instances", Kind::Integer}, {"separation_pairs", Kind::Integer},
        {"separation_budget", Kind::Integer}, {"cdx_max_samples", Kind::Integer}, {"quad_order", Kind::Integer}}},
      {"exec", {{"workers", Kind::Integer}, {"chunk", Kind::Integer}}},
  };
  return t;
}

void check_table(const json& obj, const Table& table, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto f = table.find(it.key());
    if (f == table.end()) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
    if (!has_kind(it.value(), f->second))
      throw ConfigError("key '" + where + "." + it.key() + "' must be a " + kind_name(f->second));
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("'" + where + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

TestFunction parse_inner(const json& j, int d) {
  check_keys(j, {"kind", "n", "center", "width", "a", "b", "value"}, "inner");
  const std::string kind = j.value("kind", "");
  if (kind == "constant") return test_constant(j.value("value", 1.0));
  if (kind == "hermite") {
    MultiIndex n;
    for (double x : number_array(j.at("n"), "inner.n")) n.push_back(static_cast<int>(x));
    if (static_cast<int>(n.size()) != d) throw ConfigError("hermite index length must equal d");
    return test_hermite(n);
  }
  if (kind == "gaussian") {
    Point c{0.0, 0.0};
    if (j.contains("center")) {
      const auto v = number_array(j.at("center"), "inner.center");
      if (static_cast<int>(v.size()) != d) throw ConfigError("gaussian center length must equal d");
      for (int a = 0; a < d; ++a) c[a] = v[a];
    }
    return test_gaussian(c, j.value("width", 1.0), d);
  }
  if (kind == "tanh_window") return test_tanh_window(j.value("a", -1.0), j.value("b", 1.0), j.value("width", 0.5));
  throw ConfigError("unknown inner function kind '" + kind + "'");
}

}  // namespace

const json& ExperimentConfig::section(const char* name) const {
  static const json empty = json::object();
  auto it = raw.find(name);
  return it == raw.end() ? empty : *it;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate_schema(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("spectral")) throw ConfigError("config is missing the 'spectral' section");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key == "seed") {
      if (!it.value().is_number_integer() || it.value().get<long long>() < 0) throw ConfigError("'seed' must be a non-negative integer");
      continue;
    }
    if (key == "out") {
      if (!it.value().is_string()) throw ConfigError("'out' must be a string");
      continue;
    }
    auto s = sections().find(key);
    if (s == sections().end()) throw ConfigError("unknown section '" + key + "'");
    if (!it.value().is_object()) throw ConfigError("section '" + key + "' must be an object");
    check_table(it.value(), s->second, key);
  }
}

Mode parse_mode(const std::string& s) {
  if (s == "M") return Mode::M;
  if (s == "P") return Mode::P;
  throw ConfigError("mode must be 'M' or 'P', got '" + s + "'");
}

PotentialSpec parse_potential(const json& j, int d) {
  const std::string name = j.value("name", "none");
  PotentialSpec pot;
  if (name == "none") {
    pot = potential_none();
  } else if (name == "entropy") {
    pot = potential_entropy();
  } else if (name == "relative_entropy") {
    const std::string phi = j.value("phi", "softabs");
    PhiKind kind;
    if (phi == "zero") kind = PhiKind::Zero;
    else if (phi == "quadratic") kind = PhiKind::Quadratic;
    else if (phi == "softabs") kind = PhiKind::SoftAbs;
    else throw ConfigError("unknown phi '" + phi + "' (zero | quadratic | softabs)");
    pot = potential_relative_entropy(kind, j.value("a", 1.0), d);
  } else if (name == "power") {
    pot = potential_power(j.value("theta", 2.0));
  } else if (name == "linear") {
    pot = potential_linear(j.value("a", 1.0));
  } else {
    throw ConfigError("unknown potential '" + name + "'");
  }
  if (j.contains("approx")) pot = approx_potential(pot, j.at("approx").get<int>());
  return pot;
}

CylinderFunction parse_cylinder(const json& j, int d) {
  check_keys(j, {"outer", "a", "value", "inner"}, "cylinder");
  const std::string outer = j.value("outer", "identity");
  CylinderFunction u;
  if (!j.contains("inner") || !j.at("inner").is_array()) throw ConfigError("cylinder needs an 'inner' array");
  for (const auto& f : j.at("inner")) u.inner.push_back(parse_inner(f, d));
  const int n = static_cast<int>(u.inner.size());
  if (outer == "identity") u.outer = outer_identity();
  else if (outer == "linear") u.outer = outer_linear(number_array(j.at("a"), "cylinder.a"));
  else if (outer == "constant") u.outer = outer_constant(j.value("value", 0.0), n);
  else if (outer == "sin") u.outer = outer_sin();
  else if (outer == "tanh") u.outer = outer_tanh();
  else if (outer == "gauss_bump") u.outer = outer_gauss_bump();
  else if (outer == "product") u.outer = outer_product();
  else if (outer == "tanh_sum") u.outer = outer_tanh_sum(number_array(j.at("a"), "cylinder.a"));
  else if (outer == "sin_cos") u.outer = outer_sin_cos();
  else throw ConfigError("unknown outer map '" + outer + "'");
  u.validate();
  return u;
}

ExperimentConfig config_from_json(const json& doc, const Overrides& ov) {
  validate_schema(doc);
  ExperimentConfig cfg;
  cfg.raw = doc;
  const json& sp = doc.at("spectral");
  cfg.spectral.d = sp.value("d", 1);
  cfg.spectral.alpha = sp.value("alpha", 1.0);
  cfg.spectral.k = sp.value("k", 1.0);
  cfg.spectral.d_prime = sp.value("d_prime", 2.0);
  cfg.spectral.trunc = sp.value("trunc", 8);
  cfg.spectral.quad_order = sp.value("quad_order", 0);
  cfg.spectral.validate();

  if (doc.contains("potential")) {
    cfg.pot = parse_potential(doc.at("potential"), cfg.spectral.d);
    if (!cfg.pot.is_none()) validate_certificates(cfg.pot, cfg.spectral.k, cfg.spectral.d);
  }

  cfg.seed = doc.value("seed", std::uint64_t{1});
  cfg.out = doc.value("out", std::string("out"));
  if (const char* e = std::getenv("MFLOW_SEED"); e && *e) {
    try {
      cfg.seed = std::stoull(e);
    } catch (const std::exception&) {
      throw ConfigError(std::string("MFLOW_SEED is not an integer: ") + e);
    }
  }
  if (const char* e = std::getenv("MFLOW_OUT"); e && *e) cfg.out = e;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out = *ov.out;

  if (doc.contains("exec")) {
    cfg.exec.workers = doc.at("exec").value("workers", 1);
    cfg.exec.chunk = doc.at("exec").value("chunk", std::size_t{1024});
  }
  if (ov.workers) cfg.exec.workers = *ov.workers;
  if (ov.chunk) cfg.exec.chunk = *ov.chunk;
  if (cfg.exec.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.exec.chunk < 1) throw ConfigError("chunk must be >= 1");

  // The stamp covers everything that changes numeric output; workers does not.
  json stamped = doc;
  stamped["seed"] = cfg.seed;
  stamped.erase("out");
  stamped["exec"] = json{{"chunk", cfg.exec.chunk}};
  std::ostringstream hs;
  hs << std::hex;
  hs.width(16);
  hs.fill('0');
  hs << fnv1a64(stamped.dump());
  cfg.hash = hs.str();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    is >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc, ov);
}

}  // namespace mflow::cli
