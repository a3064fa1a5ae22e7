#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rgop {

struct ReturnsTable {
  std::vector<std::string> labels;
  std::vector<int> dates;    // YYYYMM
  Eigen::MatrixXd returns;   // K x N, decimal
  std::vector<int> skipped_lines;  // 1-based lines dropped for the -99 missing-data sentinel
};

/// Parses "date, v_1, ..., v_N" rows of percent returns. The first non-empty line is the
/// header; its first cell is ignored and the rest become labels. Rows with any value
/// <= -99 are skipped. Throws MalformedRow (with the line number), EmptyFile,
/// InconsistentColumnCount or IoError.
ReturnsTable parse_returns_csv(const std::filesystem::path& path);
ReturnsTable parse_returns_text(std::string_view text);

enum class OutputFormat { Json, Csv };

/// A command plus its JSON parameter block. Relative file paths in the parameters
/// resolve against base_dir.
struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::filesystem::path base_dir = ".";
  std::filesystem::path out_dir = ".";
  OutputFormat format = OutputFormat::Json;

  /// Loads {"command": ..., "seed": ..., "params": {...}}; command and seed are optional.
  /// Throws IoError when the file cannot be read and InvalidArgument when it is not valid JSON.
  static RunConfig load(const std::filesystem::path& path);
};

/// Names of the supported commands, in dispatch order.
const std::vector<std::string>& command_names();

/// Checks the parameter block of cfg.command against its schema: unknown keys, missing
/// required keys, wrong types and out-of-range values throw InvalidArgument;
/// referenced files that do not exist throw IoError.
void validate_config(const RunConfig& cfg);

struct TableColumn {
  std::string name;
  std::string unit;
};

/// Row-oriented table; cells are numbers, strings or null (value not available).
struct ResultTable {
  std::string name;
  std::vector<TableColumn> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct ResultRecord {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::vector<ResultTable> tables;
  std::string software_version;
  std::string timestamp;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
  bool operator==(const ResultRecord& other) const;
};

/// Validates cfg and runs the command. Errors propagate as rgop::Error.
ResultRecord run_command(const RunConfig& cfg);

/// CSV text of one table: header row of "name [unit]" cells, numbers as %.17g, null as empty.
std::string table_to_csv(const ResultTable& table);

/// Writes <command>.json and, for OutputFormat::Csv, <command>_<table>.csv into out_dir.
/// Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> write_outputs(const ResultRecord& record, const std::filesystem::path& out_dir,
                                                 OutputFormat format);

}  // namespace rgop
