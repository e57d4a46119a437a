#include "qwork/output.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#ifndef QWORK_VERSION
#define QWORK_VERSION "0.0.0"
#endif

namespace qwork {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

Table::Table(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw std::invalid_argument("Table " + name_ + ": row has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(columns_.size()));
  rows_.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  throw std::out_of_range("Table " + name_ + ": no column " + name);
}

double Table::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows_.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw std::invalid_argument("Table " + name_ + ": column " + column + " is not numeric");
}

std::vector<double> Table::numbers(const std::string& column) const {
  std::vector<double> v;
  v.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) v.push_back(number(r, column));
  return v;
}

std::string Table::csv() const {
  std::string s;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) s += ',';
    s += columns_[i].name;
    if (!columns_[i].unit.empty()) s += "[" + columns_[i].unit + "]";
  }
  s += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) s += format_number(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) s += std::to_string(v);
            else s += v;
          },
          row[i]);
    }
    s += '\n';
  }
  return s;
}

Check check_below(std::string name, double value, double threshold, bool advisory) {
  return Check{std::move(name), value, threshold, value < threshold, advisory};
}

Check check_flag(std::string name, bool pass, double value, double threshold, bool advisory) {
  return Check{std::move(name), value, threshold, pass, advisory};
}

bool RunOutput::failed() const {
  if (!error.empty()) return true;
  for (const auto& c : checks)
    if (!c.pass && !c.advisory) return true;
  for (const auto& child : children)
    if (child.failed()) return true;
  return false;
}

bool RunOutput::has_warnings() const {
  if (!warnings.empty()) return true;
  for (const auto& c : checks)
    if (!c.pass && c.advisory) return true;
  for (const auto& child : children)
    if (child.has_warnings()) return true;
  return false;
}

const Table& RunOutput::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name() == name) return t;
  throw std::out_of_range("no table " + name);
}

bool RunOutput::has_table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name() == name) return true;
  return false;
}

std::optional<double> RunOutput::find(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  for (const auto& [k, v] : derived)
    if (k == key) return v;
  return std::nullopt;
}

double RunOutput::value(const std::string& key) const {
  if (auto v = find(key)) return *v;
  throw std::out_of_range("no summary value " + key);
}

const Check* RunOutput::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string tool_version() { return QWORK_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::filesystem::path run_directory(const std::filesystem::path& out_root, const std::string& name,
                                    const std::string& run_id) {
  return out_root / name / (run_id.empty() ? utc_timestamp() : run_id);
}

namespace {

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

ordered_json pairs_json(const std::vector<std::pair<std::string, double>>& v) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, x] : v) j[k] = json_number(x);
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

ordered_json checks_json(const RunOutput& out) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : out.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = json_number(c.value);
    cj["threshold"] = json_number(c.threshold);
    cj["pass"] = c.pass;
    cj["advisory"] = c.advisory;
    arr.push_back(cj);
  }
  return arr;
}

std::vector<std::string> write_tables(const std::filesystem::path& dir, const RunOutput& out) {
  std::vector<std::string> files;
  for (const auto& t : out.tables) {
    const std::string f = t.name() + ".csv";
    write_file(dir / f, t.csv());
    files.push_back(f);
  }
  return files;
}

std::string status_of(const RunOutput& out) {
  if (!out.error.empty()) return "failed";
  if (out.failed()) return "checks_failed";
  return out.has_warnings() ? "passed_with_warnings" : "passed";
}

}  // namespace

void write_run(const std::filesystem::path& dir, const RunOutput& out, const ManifestInfo& info) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files = write_tables(dir, out);

  if (!out.children.empty()) {
    Table index("index", {{"point", ""}, {"directory", ""}, {"status", ""}});
    for (std::size_t i = 0; i < out.children.size(); ++i) {
      const RunOutput& child = out.children[i];
      const std::string& sub = child.label;
      const std::filesystem::path cdir = dir / sub;
      std::filesystem::create_directories(cdir);
      for (const auto& f : write_tables(cdir, child)) files.push_back(sub + "/" + f);
      ordered_json cj;
      cj["scenario"] = child.scenario;
      cj["status"] = status_of(child);
      cj["derived"] = pairs_json(child.derived);
      cj["summary"] = pairs_json(child.summary);
      cj["checks"] = checks_json(child);
      cj["warnings"] = child.warnings;
      if (!child.error.empty()) cj["error"] = child.error;
      write_file(cdir / "point.json", cj.dump(2) + "\n");
      files.push_back(sub + "/point.json");
      index.add_row({static_cast<std::int64_t>(i), sub, status_of(child)});
    }
    write_file(dir / "index.csv", index.csv());
    files.push_back("index.csv");
  }

  ordered_json m;
  m["tool"] = "qwork";
  m["version"] = tool_version();
  m["scenario"] = out.scenario;
  m["command"] = info.command;
  m["started_utc"] = info.started_utc;
  m["wall_seconds"] = info.wall_seconds;
  m["strict"] = info.strict;
  m["status"] = status_of(out);
  if (!out.error.empty()) m["error"] = out.error;
  m["config"] = info.config_json.empty() ? ordered_json::object() : ordered_json::parse(info.config_json);
  m["derived"] = pairs_json(out.derived);
  m["summary"] = pairs_json(out.summary);
  m["checks"] = checks_json(out);
  m["warnings"] = out.warnings;
  m["files"] = files;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

int exit_status(const RunOutput& out, bool strict) {
  if (out.failed()) return 1;
  if (strict && out.has_warnings()) return 1;
  return 0;
}

}  // namespace qwork
