#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qwork {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Column {
  std::string name;
  // Empty for dimensionless or label columns.
  std::string unit;
};

class Table {
 public:
  Table() = default;
  Table(std::string name, std::vector<Column> columns);

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
  std::vector<double> numbers(const std::string& column) const;

  // Header "name[unit]", shortest round-trip doubles.
  std::string csv() const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double x);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  // Advisory checks are reported but do not fail the run.
  bool advisory = false;
};

Check check_below(std::string name, double value, double threshold, bool advisory = false);
Check check_flag(std::string name, bool pass, double value, double threshold, bool advisory = false);

struct RunOutput {
  std::string scenario;
  // Subdirectory name when this output is a sweep point.
  std::string label;
  std::vector<Table> tables;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> derived;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> warnings;
  std::string error;
  // Sweep points written to their own subdirectories.
  std::vector<RunOutput> children;

  bool failed() const;
  bool has_warnings() const;
  const Table& table(const std::string& name) const;
  bool has_table(const std::string& name) const;
  double value(const std::string& key) const;
  std::optional<double> find(const std::string& key) const;
  const Check* check(const std::string& name) const;
};

struct ManifestInfo {
  std::string config_json;
  std::string command;
  std::string started_utc;
  double wall_seconds = 0.0;
  bool strict = false;
};

std::string tool_version();
std::string utc_timestamp();

// runs/<name>/<run_id or timestamp>/
std::filesystem::path run_directory(const std::filesystem::path& out_root, const std::string& name,
                                    const std::string& run_id);

// Writes CSVs, child subdirectories, an index for children, and manifest.json.
void write_run(const std::filesystem::path& dir, const RunOutput& out, const ManifestInfo& info);

// 0 if the run passed; warnings count as failures under strict.
int exit_status(const RunOutput& out, bool strict);

}  // namespace qwork
