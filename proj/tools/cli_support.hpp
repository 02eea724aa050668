#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jjosc::cli {

/// CSV builder. Numbers are written with 17
/// significant digits; missing values are empty cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& num(double x);
    Row& num(const std::optional<double>& x);
    Row& text(const std::string& s);
    Row& flag(bool b) { return text(b ? "true" : "false"); }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  Row& row();
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

std::string format_number(double x);

/// Writes via a temporary sibling file and rename. Throws Io.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Reads a whole file. Throws Io.
std::string read_file(const std::string& path);

/// Reads a file, preferring contents captured in a manifest during rerun.
/// Throws Io.
std::string read_input(const std::string& path);
/// Every file read through read_input, with its contents.
const std::map<std::string, std::string>& inputs_read();
void set_input_override(const std::string& path, std::string contents);

/// Two numeric columns; a non-numeric first line is taken as a header and
/// # lines are skipped. Throws ConfigParse naming the file and line.
std::vector<std::pair<double, double>> read_two_columns(const std::string& path);

std::string utc_timestamp();

}  // namespace jjosc::cli
