#include "mflow/cli/records.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "mflow/errors.hpp"

namespace mflow::cli {

bool Record::passed() const {
  for (const auto& c : claims)
    if (!c.pass) return false;
  return true;
}

bool Record::expect_le(const std::string& name, double value, double tolerance, const std::string& provenance) {
  Claim c{name, value, tolerance, "<=", provenance, value <= tolerance};
  claims.push_back(c);
  return c.pass;
}

void Record::note(const std::string& name, double value, const std::string& provenance) {
  claims.push_back(Claim{name, value, 0.0, "info", provenance, true});
}

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const Record& r, const ExperimentConfig& cfg) {
  json j;
  j["command"] = r.command;
  j["config_hash"] = cfg.hash;
  j["seed"] = cfg.seed;
  j["chunk"] = cfg.exec.chunk;
  j["passed"] = r.passed();
  json claims = json::array();
  for (const auto& c : r.claims) {
    json cj;
    cj["name"] = c.name;
    cj["value"] = number(c.value);
    cj["relation"] = c.relation;
    cj["tolerance"] = number(c.tolerance);
    cj["provenance"] = c.provenance;
    cj["pass"] = c.pass;
    claims.push_back(cj);
  }
  j["claims"] = claims;
  j["data"] = r.data;
  return j;
}

std::string write_record(const Record& r, const ExperimentConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.out);
  const std::string path = (std::filesystem::path(cfg.out) / (file + ".json")).string();
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  os << to_json(r, cfg).dump(2) << '\n';
  return path;
}

std::string write_csv(const ExperimentConfig& cfg, const std::string& file, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::filesystem::create_directories(cfg.out);
  const std::string path = (std::filesystem::path(cfg.out) / (file + ".csv")).string();
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  os << "# config_hash=" << cfg.hash << " seed=" << cfg.seed << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n' << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return path;
}

void print_record(const Record& r, std::ostream& os) {
  os << std::setprecision(6);
  for (const auto& c : r.claims) {
    os << (c.relation == "info" ? "  info " : c.pass ? "  ok   " : "  FAIL ") << r.command << ' ' << c.name << " = "
       << c.value;
    if (c.relation != "info") os << ' ' << c.relation << ' ' << c.tolerance;
    os << " [" << c.provenance << "]\n";
  }
}

}  // namespace mflow::cli
