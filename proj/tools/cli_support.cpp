#include "cli_support.hpp"

#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "jjosc/errors.hpp"

namespace jjosc::cli {

namespace {

std::map<std::string, std::string>& input_store() {
  static std::map<std::string, std::string> store;
  return store;
}

std::map<std::string, std::string>& override_store() {
  static std::map<std::string, std::string> store;
  return store;
}

bool to_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::Row& CsvTable::Row::num(double x) {
  cells_.push_back(format_number(x));
  return *this;
}

CsvTable::Row& CsvTable::Row::num(const std::optional<double>& x) {
  cells_.push_back(x ? format_number(*x) : std::string());
  return *this;
}

CsvTable::Row& CsvTable::Row::text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    cells_.push_back(s);
  } else {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    cells_.push_back(q + "\"");
  }
  return *this;
}

CsvTable::Row& CsvTable::row() {
  rows_.emplace_back();
  return rows_.back();
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) {
    if (r.cells_.size() != header_.size()) fail(ErrorKind::InvalidArgument, "CSV row width does not match header");
    line(r.cells_);
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string read_input(const std::string& path) {
  auto it = override_store().find(path);
  return input_store()[path] = it != override_store().end() ? it->second : read_file(path);
}

const std::map<std::string, std::string>& inputs_read() { return input_store(); }

void set_input_override(const std::string& path, std::string contents) { override_store()[path] = std::move(contents); }

std::vector<std::pair<double, double>> read_two_columns(const std::string& path) {
  std::istringstream in(read_input(path));
  std::vector<std::pair<double, double>> out;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    double a = 0.0, b = 0.0;
    const bool ok = comma != std::string::npos && to_double(line.substr(0, comma), a) &&
                    to_double(line.substr(comma + 1, line.find(',', comma + 1) - comma - 1), b);
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::ConfigParse, path + ":" + std::to_string(line_no) + ": expected two numeric columns");
    }
    first = false;
    out.emplace_back(a, b);
  }
  if (out.empty()) fail(ErrorKind::EmptyInput, path + ": no data rows");
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, int(ms));
  return out;
}

}  // namespace jjosc::cli
