#include "doctest.h"

#include <string>

#include "fixtures.hpp"
#include "jjosc/config.hpp"
#include "jjosc/errors.hpp"

using namespace jjosc;

namespace {

std::string message_of(auto&& fn, ErrorKind expected) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.kind() == expected);
    return e.what();
  }
  FAIL("expected an exception");
  return {};
}

const char* kDevice = R"(
# comment
[junction]
ic_a = 10e-6
cs_f = 192e-12   # trailing comment
rs_ohm = 0.748

[resonator]
l1_h = 2.0e-9
c1_f = 0.36e-12
r1_ohm = 1e-3
lp_h = 4.6446e-10
qt = 2400
qe = 2763.1

[solver]
shunt = "parallel"
)";

}  // namespace

TEST_CASE("document parsing") {
  const auto doc = ConfigDocument::parse("a = 1\n[s]\nx = -2.5e-3\nname = \"a # b\"\nflag = true\nv = [1, 2,3]\n");
  CHECK(doc.number("a") == 1.0);
  CHECK(doc.number("s.x") == -2.5e-3);
  CHECK(doc.string("s.name") == "a # b");
  CHECK(doc.boolean("s.flag") == true);
  CHECK(doc.numbers("s.v") == std::vector<double>{1, 2, 3});
  CHECK_FALSE(doc.number("s.missing").has_value());
  CHECK(message_of([&] { doc.number("s.name"); }, ErrorKind::ConfigParse).find("s.name must be a number") !=
        std::string::npos);

  CHECK(message_of([] { ConfigDocument::parse("[a]\nx = 1\nx = 2\n", "f.toml"); }, ErrorKind::ConfigParse)
            .find("f.toml:3: duplicate key a.x") != std::string::npos);
  message_of([] { ConfigDocument::parse("[a\n"); }, ErrorKind::ConfigParse);
  message_of([] { ConfigDocument::parse("x 1\n"); }, ErrorKind::ConfigParse);
  message_of([] { ConfigDocument::parse("x = 1e\n"); }, ErrorKind::ConfigParse);
  message_of([] { ConfigDocument::parse("x = \"open\n"); }, ErrorKind::ConfigParse);
  message_of([] { ConfigDocument::parse("x = [1, a]\n"); }, ErrorKind::ConfigParse);
  message_of([] { ConfigDocument::load("/nonexistent/device.toml"); }, ErrorKind::Io);
}

TEST_CASE("device configuration") {
  const auto d = device_config(ConfigDocument::parse(kDevice, "dev.toml"));
  CHECK(d.junction.ic == fixtures::kSpiralJunction.ic);
  CHECK(d.junction.rs == fixtures::kSpiralJunction.rs);
  CHECK(d.resonator.lp == fixtures::kSpiralResonator.lp);
  CHECK(d.resonator.qe == fixtures::kSpiralResonator.qe);
  CHECK(d.solver.shunt == ShuntModel::RfParallel);
  CHECK(d.temperature == 0.0);
  CHECK(d.injection_coupling == 1.0);

  auto with = [](const std::string& extra) { return ConfigDocument::parse(std::string(kDevice) + extra, "dev.toml"); };
  CHECK(message_of([&] { device_config(with("[environment]\ntemperature_k = -1\n")); }, ErrorKind::ConfigParse)
            .find("environment.temperature_k must be >= 0") != std::string::npos);
  CHECK(message_of([&] { device_config(with("[junction]\nic = 1\n")); }, ErrorKind::ConfigParse)
            .find("unknown key junction.ic") != std::string::npos);
  CHECK(message_of([&] { device_config(with("[resonator]\nq_t = 1\n")); }, ErrorKind::ConfigParse)
            .find("unknown key resonator.q_t") != std::string::npos);
  CHECK(message_of([&] { device_config(with("[simulation]\nrel_tol = 1e-3\n")); }, ErrorKind::ConfigParse)
            .find("[simulation]") != std::string::npos);

  const std::string no_ic = std::string(kDevice).replace(std::string(kDevice).find("ic_a"), 4, "#c_a");
  CHECK(message_of([&] { device_config(ConfigDocument::parse(no_ic, "dev.toml")); }, ErrorKind::ConfigParse)
            .find("junction.ic_a is required") != std::string::npos);
  const std::string neg = std::string(kDevice).replace(std::string(kDevice).find("0.748"), 5, "-0.75");
  CHECK(message_of([&] { device_config(ConfigDocument::parse(neg, "dev.toml")); }, ErrorKind::ConfigParse)
            .find("junction.rs_ohm must be > 0") != std::string::npos);
  const std::string qs = std::string(kDevice).replace(std::string(kDevice).find("2763.1"), 6, "2000");
  CHECK(message_of([&] { device_config(ConfigDocument::parse(qs, "dev.toml")); }, ErrorKind::ConfigParse)
            .find("resonator.qt") != std::string::npos);
}

TEST_CASE("sweep grids") {
  const auto g = parse_grid("0e-6:25e-6:0.1e-6");
  CHECK(g.size() == 251);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(25e-6));
  CHECK(parse_grid("1:2:0.3").size() == 4);
  CHECK(parse_grid("5").size() == 1);
  CHECK(parse_grid("1, 2,3") == std::vector<double>{1, 2, 3});
  const auto lg = parse_grid("1e-7:1e-2:2/dec");
  CHECK(lg.size() == 11);
  CHECK(lg.back() == 1e-2);
  CHECK(lg[2] == doctest::Approx(1e-6));

  message_of([] { parse_grid("5e-6:1e-6:1e-7", "--ib"); }, ErrorKind::ConfigParse);
  message_of([] { parse_grid(""); }, ErrorKind::ConfigParse);
  message_of([] { parse_grid("1:2:0"); }, ErrorKind::ConfigParse);
  message_of([] { parse_grid("1:2"); }, ErrorKind::ConfigParse);
  message_of([] { parse_grid("0:1:3/dec"); }, ErrorKind::ConfigParse);
  message_of([] { parse_grid("a,b"); }, ErrorKind::ConfigParse);
}

TEST_CASE("config hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}
