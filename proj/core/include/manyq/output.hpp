#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace manyq {

/// Environment variable overriding the configured output directory.
inline constexpr const char* kOutDirEnv = "MANYQ_OUT_DIR";

/// --out, then $MANYQ_OUT_DIR, then the config's output.dir, then ./manyq-out.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out,
                                         const std::optional<std::string>& config_out);

/// Shortest round-trip text for a double; "inf", "-inf", "nan" for the rest.
std::string format_double(double v);

/// Writes `content` to `path`, creating parent directories. Throws
/// SimulationError with the path on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

/// CSV table whose first line is "# config_hash=<hex> seed=<u64>".
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& values);
  /// Pre-formatted cells, for mixed text/number rows.
  void add_cells(std::vector<std::string> cells);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::string render(std::uint64_t config_hash, std::uint64_t seed) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace manyq
