#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace rsdlab {

constexpr std::int64_t kAllSchools = -1;
constexpr int kPassNA = -1;

inline double report_nan() { return std::numeric_limits<double>::quiet_NaN(); }

// One line of an experiment table. `x` is the row's t or epsilon (NaN when
// not applicable), `bound` is the theoretical reference for the row (NaN when
// there is none) and `pass` is 1/0 for bound rows, kPassNA otherwise.
struct ReportRow {
  std::string quantity;
  std::int64_t school = kAllSchools;
  double x = 0.0;
  double estimate = 0.0;
  double std_err = 0.0;
  double bound = 0.0;
  int pass = kPassNA;
};

// Seeded, replication-stamped summary of one estimation run. Wall-clock time
// is kept in memory for console display but never serialized, so reruns with
// the same config stay byte-identical.
struct ExperimentReport {
  std::string experiment;
  std::uint64_t master_seed = 0;
  std::int64_t replications = 0;
  std::string build_id;
  std::string config_hash;
  double wall_ms = 0.0;
  std::vector<ReportRow> rows;
  std::vector<std::string> notes;

  bool all_pass() const {
    for (const auto& r : rows) {
      if (r.pass == 0) return false;
    }
    return true;
  }

  std::vector<const ReportRow*> failing_rows() const {
    std::vector<const ReportRow*> out;
    for (const auto& r : rows) {
      if (r.pass == 0) out.push_back(&r);
    }
    return out;
  }
};

std::string build_id_string();

// Stable shortest-round-trip formatting; used everywhere a double reaches an
// output file so that reruns are byte-identical.
std::string format_double(double v);

// Fixed column set: quantity,school,t_or_epsilon,estimate,stderr,bound,pass.
// school -1 means market-wide; empty cells mean "not applicable".
void write_csv(const ExperimentReport& report, std::ostream& os);
void write_csv_file(const ExperimentReport& report, const std::string& path);

// Aligned human-readable table with the same content as the CSV.
void write_text(const ExperimentReport& report, std::ostream& os);
void write_text_file(const ExperimentReport& report, const std::string& path);

// JSON document with metadata, notes and all rows.
std::string summary_json(const ExperimentReport& report);
void write_summary_file(const ExperimentReport& report, const std::string& path);

}  // namespace rsdlab
