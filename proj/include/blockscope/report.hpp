#pragma once

// Tabular outputs and the group comparison report.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blockscope/ingest.hpp"
#include "blockscope/metrics.hpp"
#include "blockscope/smells.hpp"
#include "blockscope/stats.hpp"

namespace blockscope {

inline constexpr int kReportSchemaVersion = 1;

class MissingUpstream : public std::runtime_error {
 public:
  explicit MissingUpstream(std::string name)
      : std::runtime_error("missing upstream output: " + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// --- CSV ---------------------------------------------------------------------

using CsvRow = std::vector<std::string>;

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const CsvRow& row);

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  // Column index by name; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

// --- per-project tables -------------------------------------------------------

// Numeric columns of metrics.csv, in order (after project_id, group, age).
std::vector<std::string> metric_columns();
std::vector<double> metric_values(const MetricRecord& record);

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records, const Corpus& corpus);
void write_smells_csv(std::ostream& out, const std::vector<std::string>& ids, const std::vector<SmellCounts>& counts,
                      const Corpus& corpus);
void write_smells_summary_csv(std::ostream& out, const std::vector<std::string>& ids,
                              const std::vector<SmellCounts>& counts, const Corpus& corpus);
// Long format: project_id,opcode,category,count.
void write_opcodes_csv(std::ostream& out, const std::vector<MetricRecord>& records);

// --- report -----------------------------------------------------------------

struct ProjectValues {
  std::string group;
  std::map<std::string, double> values;  // metric name -> value
};

struct ReportInputs {
  std::map<std::string, ProjectValues> projects;  // by project id
  std::vector<std::string> metric_order;           // metrics compared, in order
  std::map<std::string, std::map<std::string, std::size_t>> opcode_counts;  // project -> opcode -> count
  std::optional<std::size_t> topic_count;
  std::map<std::string, std::size_t> dominant_topic;  // project -> topic
  std::size_t top_k = 10;
};

// Reads metrics.csv, smells.csv and opcodes.csv (required) and
// assignments.csv (optional) from `dir`.
ReportInputs read_report_inputs(const std::filesystem::path& dir, std::size_t top_k = 10);

struct ReportBundle {
  nlohmann::ordered_json report;
  std::vector<GroupComparison> comparisons;
  // metric -> group -> outlier-filtered values
  std::map<std::string, std::map<std::string, std::vector<double>>> plot_data;
  std::vector<std::string> diagnostics;
};

ReportBundle summarize_groups(const ReportInputs& inputs);

void write_comparisons_csv(std::ostream& out, const std::vector<GroupComparison>& comparisons);
// Writes report.json, comparisons.csv and plotdata/<metric>.csv.
void write_report(const std::filesystem::path& dir, const ReportBundle& bundle);
// Fixed-width text table of the comparisons.
void print_summary(std::ostream& out, const ReportBundle& bundle);

}  // namespace blockscope
