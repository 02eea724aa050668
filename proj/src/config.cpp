#include "jjosc/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "jjosc/errors.hpp"

namespace jjosc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  std::string clean;
  for (char ch : s)
    if (ch != '_') clean.push_back(ch);
  const char* end = clean.data() + clean.size();
  auto [ptr, ec] = std::from_chars(clean.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Cuts a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char ch : k)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
  return true;
}

}  // namespace

ConfigDocument ConfigDocument::parse(std::string_view text, std::string source) {
  ConfigDocument doc;
  doc.source_ = std::move(source);
  doc.text_ = std::string(text);
  std::string section;
  int line_no = 0;
  std::istringstream in(doc.text_);
  std::string raw;
  auto error = [&](const std::string& what) {
    fail(ErrorKind::ConfigParse, doc.source_ + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') error("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) error("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) error("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) error("invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    std::string_view val = trim(line.substr(eq + 1));
    if (val.empty()) error("missing value for " + full);

    Value v;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') error("unterminated string for " + full);
      v = std::string(val.substr(1, val.size() - 2));
    } else if (val == "true" || val == "false") {
      v = val == "true";
    } else if (val.front() == '[') {
      if (val.back() != ']') error("unterminated array for " + full);
      std::vector<double> arr;
      std::string_view body = trim(val.substr(1, val.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        double x = 0.0;
        if (!parse_double(body.substr(0, comma), x)) error("non-numeric array element in " + full);
        arr.push_back(x);
        if (comma == std::string_view::npos) break;
        body = trim(body.substr(comma + 1));
      }
      v = std::move(arr);
    } else {
      double x = 0.0;
      if (!parse_double(val, x)) error("cannot parse value '" + std::string(val) + "' for " + full);
      v = x;
    }
    if (!doc.values_.emplace(full, Entry{std::move(v), line_no}).second) error("duplicate key " + full);
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

void ConfigDocument::type_error(const std::string& key, const char* expected) const {
  const auto& e = values_.at(key);
  fail(ErrorKind::ConfigParse, source_ + ":" + std::to_string(e.line) + ": " + key + " must be " + expected);
}

std::optional<double> ConfigDocument::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const double* d = std::get_if<double>(&it->second.value)) return *d;
  type_error(key, "a number");
}

std::optional<std::string> ConfigDocument::string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second.value)) return *s;
  type_error(key, "a string");
}

std::optional<bool> ConfigDocument::boolean(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const bool* b = std::get_if<bool>(&it->second.value)) return *b;
  type_error(key, "true or false");
}

std::optional<std::vector<double>> ConfigDocument::numbers(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* a = std::get_if<std::vector<double>>(&it->second.value)) return *a;
  type_error(key, "an array of numbers");
}

std::vector<std::string> ConfigDocument::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

void ConfigDocument::require_known(const std::vector<std::string>& allowed) const {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, e] : values_)
    if (!ok.count(k)) fail(ErrorKind::ConfigParse, source_ + ":" + std::to_string(e.line) + ": unknown key " + k);
}

DeviceConfig device_config(const ConfigDocument& doc) {
  doc.require_known({"junction.ic_a", "junction.cs_f", "junction.rs_ohm", "resonator.l1_h", "resonator.c1_f",
                     "resonator.r1_ohm", "resonator.lp_h", "resonator.qt", "resonator.qe",
                     "environment.temperature_k", "solver.shunt", "simulation.duration_s", "simulation.output_dt_s",
                     "simulation.rel_tol", "simulation.abs_tol", "simulation.seed", "simulation.transient_fraction",
                     "simulation.ramp_duration_s", "simulation.noise_steps_per_period", "simulation.noise_psd_scale",
                     "injection.coupling_a_per_sqrt_w"});
  auto where = [&](const std::string& key) { return doc.source() + ": " + key; };
  auto required = [&](const std::string& key) {
    auto v = doc.number(key);
    if (!v) fail(ErrorKind::ConfigParse, where(key) + " is required");
    return *v;
  };
  auto check = [&](const std::string& key, double v, bool ok, const char* rule) {
    if (!ok) {
      std::ostringstream os;
      os << where(key) << " must be " << rule << " (got " << v << ")";
      fail(ErrorKind::ConfigParse, os.str());
    }
    return v;
  };
  auto positive = [&](const std::string& key, double v) { return check(key, v, v > 0.0, "> 0"); };

  DeviceConfig c;
  c.junction.ic = positive("junction.ic_a", required("junction.ic_a"));
  c.junction.cs = positive("junction.cs_f", required("junction.cs_f"));
  c.junction.rs = positive("junction.rs_ohm", required("junction.rs_ohm"));
  c.resonator.l1 = positive("resonator.l1_h", required("resonator.l1_h"));
  c.resonator.c1 = positive("resonator.c1_f", required("resonator.c1_f"));
  c.resonator.r1 = positive("resonator.r1_ohm", required("resonator.r1_ohm"));
  c.resonator.lp = doc.number("resonator.lp_h").value_or(0.0);
  check("resonator.lp_h", c.resonator.lp, c.resonator.lp >= 0.0, ">= 0");
  c.resonator.qt = positive("resonator.qt", doc.number("resonator.qt").value_or(1.0));
  c.resonator.qe = positive("resonator.qe", doc.number("resonator.qe").value_or(1.0));
  check("resonator.qt", c.resonator.qt, c.resonator.qt <= c.resonator.qe, "<= resonator.qe");

  c.temperature = doc.number("environment.temperature_k").value_or(0.0);
  check("environment.temperature_k", c.temperature, c.temperature >= 0.0, ">= 0");

  if (auto s = doc.string("solver.shunt")) {
    try {
      c.solver.shunt = shunt_model_from_string(*s);
    } catch (const Error& e) {
      fail(ErrorKind::ConfigParse, where("solver.shunt") + ": " + e.what());
    }
  }

  SimConfig& sim = c.simulation;
  sim.duration = doc.number("simulation.duration_s").value_or(2e-6);
  sim.output_dt = doc.number("simulation.output_dt_s").value_or(0.0);
  sim.rel_tol = doc.number("simulation.rel_tol").value_or(sim.rel_tol);
  sim.abs_tol = doc.number("simulation.abs_tol").value_or(sim.abs_tol);
  if (auto s = doc.number("simulation.seed")) {
    check("simulation.seed", *s, *s >= 0.0 && *s == std::floor(*s) && *s < 1.8e19, "a non-negative integer");
    sim.seed = std::uint64_t(*s);
  }
  sim.transient_fraction = doc.number("simulation.transient_fraction").value_or(sim.transient_fraction);
  sim.ramp_duration = doc.number("simulation.ramp_duration_s").value_or(sim.ramp_duration);
  if (auto s = doc.number("simulation.noise_steps_per_period")) sim.noise_steps_per_period = int(*s);
  sim.noise_psd_scale = doc.number("simulation.noise_psd_scale").value_or(sim.noise_psd_scale);
  sim.noise_temperature = c.temperature;
  try {
    sim.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigParse, doc.source() + ": [simulation] " + e.what());
  }

  c.injection_coupling = positive("injection.coupling_a_per_sqrt_w",
                                  doc.number("injection.coupling_a_per_sqrt_w").value_or(1.0));
  return c;
}

std::vector<double> parse_grid(std::string_view spec, std::string_view what) {
  const std::string label(what);
  auto bad = [&](const std::string& why) {
    fail(ErrorKind::ConfigParse, label + " '" + std::string(spec) + "': " + why);
  };
  spec = trim(spec);
  if (spec.empty()) bad("empty");
  std::vector<double> out;
  if (spec.find(':') == std::string_view::npos) {
    while (true) {
      const auto comma = spec.find(',');
      double x = 0.0;
      if (!parse_double(spec.substr(0, comma), x)) bad("not a number list");
      out.push_back(x);
      if (comma == std::string_view::npos) break;
      spec = spec.substr(comma + 1);
    }
    return out;
  }
  const auto c1 = spec.find(':'), c2 = spec.find(':', c1 + 1);
  if (c2 == std::string_view::npos || spec.find(':', c2 + 1) != std::string_view::npos)
    bad("expected start:stop:step");
  double start = 0.0, stop = 0.0;
  if (!parse_double(spec.substr(0, c1), start) || !parse_double(spec.substr(c1 + 1, c2 - c1 - 1), stop))
    bad("start and stop must be numbers");
  std::string_view step_s = trim(spec.substr(c2 + 1));
  if (step_s.size() > 4 && step_s.substr(step_s.size() - 4) == "/dec") {
    double per_decade = 0.0;
    if (!parse_double(step_s.substr(0, step_s.size() - 4), per_decade) || per_decade < 1.0)
      bad("points per decade must be >= 1");
    if (!(start > 0.0) || !(stop >= start)) bad("logarithmic grid needs 0 < start <= stop");
    const long n = std::lround(std::log10(stop / start) * per_decade);
    for (long k = 0; k <= n; ++k) out.push_back(start * std::pow(10.0, double(k) / per_decade));
    if (n > 0 && std::fabs(out.back() / stop - 1.0) < 1e-9) out.back() = stop;
    return out;
  }
  double step = 0.0;
  if (!parse_double(step_s, step) || !(step > 0.0)) bad("step must be a positive number");
  if (stop < start) bad("empty range (stop < start)");
  const double span = (stop - start) / step;
  if (span > 1e7) bad("more than 1e7 points");
  const long n = long(std::floor(span + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(start + double(k) * step);
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace jjosc
