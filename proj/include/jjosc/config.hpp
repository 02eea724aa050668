#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "jjosc/steady_state.hpp"
#include "jjosc/time_domain.hpp"

namespace jjosc {

/// Sectioned key = value text: `[section]` headers, numbers, "strings",
/// true/false, [number, ...] arrays and # comments. Keys are addressed as
/// "section.key".
class ConfigDocument {
 public:
  using Value = std::variant<double, std::string, bool, std::vector<double>>;

  /// Throws ConfigParse with "source:line:" context on malformed input or
  /// duplicate keys.
  static ConfigDocument parse(std::string_view text, std::string source = "<config>");
  static ConfigDocument load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<double> number(const std::string& key) const;
  std::optional<std::string> string(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::vector<double>> numbers(const std::string& key) const;

  const std::string& source() const { return source_; }
  const std::string& text() const { return text_; }
  std::vector<std::string> keys() const;
  /// Throws ConfigParse naming the first key outside `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

 private:
  struct Entry {
    Value value;
    int line = 0;
  };
  [[noreturn]] void type_error(const std::string& key, const char* expected) const;

  std::string source_;
  std::string text_;
  std::map<std::string, Entry> values_;
};

struct DeviceConfig {
  JunctionParams junction;
  ResonatorParams resonator;
  double temperature = 0.0;  // K
  SolverOptions solver;
  SimConfig simulation;
  double injection_coupling = 1.0;  // A per sqrt(W)
};

/// Reads [junction], [resonator], [environment], [solver], [simulation] and
/// [injection]. Junction and resonator keys are required; every value is
/// range-checked with a key-qualified ConfigParse message.
DeviceConfig device_config(const ConfigDocument& doc);

/// "start:stop:step" (inclusive), "start:stop:N/dec" (N points per decade),
/// "a,b,c" or a single number. Throws ConfigParse for empty or malformed grids.
std::vector<double> parse_grid(std::string_view spec, std::string_view what = "grid");

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace jjosc
