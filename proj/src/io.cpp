#include "rgop/io.hpp"

#include "rgop/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rgop {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_cells(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  // U+2212 MINUS SIGN shows up in hand-edited files
  for (auto& c : cells) {
    for (auto pos = c.find("\xE2\x88\x92"); pos != std::string::npos; pos = c.find("\xE2\x88\x92")) c.replace(pos, 3, "-");
  }
  return cells;
}

[[noreturn]] void malformed(int line, const std::string& what) {
  throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& cell, int line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) malformed(line, "not a number: '" + cell + "'");
  if (!std::isfinite(v)) malformed(line, "non-finite value '" + cell + "'");
  return v;
}

int parse_date(const std::string& cell, int line) {
  if (cell.size() != 6) malformed(line, "date '" + cell + "' is not YYYYMM");
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) malformed(line, "date '" + cell + "' is not YYYYMM");
  const int month = v % 100;
  if (month < 1 || month > 12) malformed(line, "month out of range in '" + cell + "'");
  return v;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_number_integer()) return std::to_string(cell.get<long long>());
  if (cell.is_number_unsigned()) return std::to_string(cell.get<unsigned long long>());
  if (cell.is_number()) return format_number(cell.get<double>());
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  std::string s = cell.is_string() ? cell.get<std::string>() : cell.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

ReturnsTable parse_returns_text(std::string_view text) {
  ReturnsTable out;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_cells(line);
    if (!have_header) {
      if (cells.size() < 2) malformed(line_no, "header has no asset columns");
      out.labels.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != out.labels.size() + 1) {
      throw Error(ErrorCode::InconsistentColumnCount, "line " + std::to_string(line_no) + ": expected " +
                                                          std::to_string(out.labels.size() + 1) + " cells, found " +
                                                          std::to_string(cells.size()));
    }
    const int date = parse_date(cells[0], line_no);
    std::vector<double> values(out.labels.size());
    bool sentinel = false;
    for (std::size_t j = 0; j < values.size(); ++j) {
      values[j] = parse_number(cells[j + 1], line_no);
      sentinel = sentinel || values[j] <= -99.0;
    }
    if (sentinel) {
      out.skipped_lines.push_back(line_no);
      continue;
    }
    out.dates.push_back(date);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, have_header ? "no data rows" : "no header");
  out.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < out.labels.size(); ++j)
      out.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j] / 100.0;
  return out;
}

ReturnsTable parse_returns_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_returns_text(ss.str());
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "command" && key != "seed" && key != "params") {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  RunConfig cfg;
  if (j.contains("command")) {
    if (!j["command"].is_string()) throw Error(ErrorCode::InvalidArgument, "'command' must be a string");
    cfg.command = j["command"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, "'seed' must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw Error(ErrorCode::InvalidArgument, "'params' must be an object");
    cfg.params = j["params"];
  }
  cfg.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  return cfg;
}

json ResultRecord::to_json() const {
  json tabs = json::array();
  for (const auto& t : tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    tabs.push_back({{"name", t.name}, {"columns", cols}, {"rows", rows}});
  }
  return {{"schema_version", schema_version}, {"command", command},   {"inputs", inputs},
          {"outputs", outputs},               {"tables", tabs},       {"software_version", software_version},
          {"timestamp", timestamp},           {"seed", seed}};
}

ResultRecord ResultRecord::from_json(const json& j) {
  try {
    ResultRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion) {
      throw Error(ErrorCode::InvalidArgument, "unsupported schema_version " + std::to_string(r.schema_version));
    }
    r.command = j.at("command").get<std::string>();
    r.inputs = j.at("inputs");
    r.outputs = j.at("outputs");
    r.software_version = j.at("software_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& t : j.at("tables")) {
      ResultTable tab;
      tab.name = t.at("name").get<std::string>();
      for (const auto& c : t.at("columns")) tab.columns.push_back({c.at("name").get<std::string>(), c.at("unit").get<std::string>()});
      for (const auto& row : t.at("rows")) {
        if (row.size() != tab.columns.size()) throw Error(ErrorCode::InvalidArgument, "table row width mismatch");
        tab.rows.emplace_back(row.begin(), row.end());
      }
      r.tables.push_back(std::move(tab));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed result record: ") + e.what());
  }
}

bool ResultRecord::operator==(const ResultRecord& other) const { return to_json() == other.to_json(); }

std::string table_to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    const auto& c = table.columns[i];
    out += csv_cell(c.unit.empty() ? c.name : c.name + " [" + c.unit + "]");
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> write_outputs(const ResultRecord& record, const std::filesystem::path& out_dir,
                                                 OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    written.push_back(p);
  };
  write(out_dir / (record.command + ".json"), record.to_json().dump(2) + "\n");
  if (format == OutputFormat::Csv) {
    for (const auto& t : record.tables) write(out_dir / (record.command + "_" + t.name + ".csv"), table_to_csv(t));
  }
  return written;
}

}  // namespace rgop
