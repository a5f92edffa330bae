#include "manyq/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "manyq/config.hpp"
#include "manyq/errors.hpp"

namespace manyq {

namespace fs = std::filesystem;

fs::path resolve_output_dir(const std::optional<std::string>& cli_out, const std::optional<std::string>& config_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  if (config_out && !config_out->empty()) return *config_out;
  return "manyq-out";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw SimulationError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimulationError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw SimulationError("write failed for '" + path.string() + "'");
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_cells(std::move(cells));
}

void CsvTable::add_cells(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render(std::uint64_t config_hash, std::uint64_t seed) const {
  std::string s = "# config_hash=" + hash_hex(config_hash) + " seed=" + std::to_string(seed) + "\n";
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return s;
}

}  // namespace manyq
