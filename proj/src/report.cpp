#include "rsdlab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rsdlab/error.hpp"

#ifndef RSDLAB_BUILD_ID
#define RSDLAB_BUILD_ID "rsdlab-0.1.0"
#endif

namespace rsdlab {

std::string build_id_string() { return RSDLAB_BUILD_ID; }

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::FileNotFound, "cannot open for writing: " + path);
  return os;
}

std::string pass_cell(int pass) {
  if (pass == kPassNA) return "";
  return pass ? "1" : "0";
}

}  // namespace

void write_csv(const ExperimentReport& report, std::ostream& os) {
  os << "# experiment=" << report.experiment << " master_seed=" << report.master_seed
     << " replications=" << report.replications << " config_hash=" << report.config_hash
     << " build=" << report.build_id << '\n';
  os << "quantity,school,t_or_epsilon,estimate,stderr,bound,pass\n";
  for (const auto& r : report.rows) {
    os << r.quantity << ',' << r.school << ',' << format_double(r.x) << ','
       << format_double(r.estimate) << ',' << format_double(r.std_err) << ','
       << format_double(r.bound) << ',' << pass_cell(r.pass) << '\n';
  }
}

void write_csv_file(const ExperimentReport& report, const std::string& path) {
  auto os = open_out(path);
  write_csv(report, os);
}

void write_text(const ExperimentReport& report, std::ostream& os) {
  os << "experiment: " << report.experiment << '\n'
     << "master_seed: " << report.master_seed << '\n'
     << "replications: " << report.replications << '\n'
     << "build: " << report.build_id << '\n'
     << "config_hash: " << report.config_hash << '\n';
  for (const auto& note : report.notes) os << "note: " << note << '\n';
  os << '\n';
  os << std::left << std::setw(34) << "quantity" << std::setw(8) << "school" << std::setw(14)
     << "t_or_eps" << std::setw(24) << "estimate" << std::setw(16) << "stderr" << std::setw(24)
     << "bound" << "pass" << '\n';
  for (const auto& r : report.rows) {
    os << std::left << std::setw(34) << r.quantity << std::setw(8) << r.school << std::setw(14)
       << format_double(r.x) << std::setw(24) << format_double(r.estimate) << std::setw(16)
       << format_double(r.std_err) << std::setw(24) << format_double(r.bound) << pass_cell(r.pass)
       << '\n';
  }
}

void write_text_file(const ExperimentReport& report, const std::string& path) {
  auto os = open_out(path);
  write_text(report, os);
}

std::string summary_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["master_seed"] = report.master_seed;
  j["replications"] = report.replications;
  j["build"] = report.build_id;
  j["config_hash"] = report.config_hash;
  j["all_pass"] = report.all_pass();
  j["notes"] = report.notes;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["quantity"] = r.quantity;
    row["school"] = r.school;
    if (std::isnan(r.x)) row["t_or_epsilon"] = nullptr; else row["t_or_epsilon"] = r.x;
    if (std::isnan(r.estimate)) row["estimate"] = nullptr; else row["estimate"] = r.estimate;
    if (std::isnan(r.std_err)) row["stderr"] = nullptr; else row["stderr"] = r.std_err;
    if (std::isnan(r.bound)) row["bound"] = nullptr; else row["bound"] = r.bound;
    if (r.pass == kPassNA) row["pass"] = nullptr; else row["pass"] = static_cast<bool>(r.pass);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

void write_summary_file(const ExperimentReport& report, const std::string& path) {
  auto os = open_out(path);
  os << summary_json(report);
}

}  // namespace rsdlab
