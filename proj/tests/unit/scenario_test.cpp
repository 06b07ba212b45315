#include "scenario.hpp"

#include "impulse/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace impulse::cli {
namespace {

using nlohmann::json;

const std::string kScenarios = IMPULSE_SCENARIO_DIR;
const std::string kData = IMPULSE_TEST_DATA_DIR;

json point_doc() {
  return json::parse(R"({
    "model": {"builtin": "point", "parameters": {"m": 1, "g": 10}},
    "law": {"type": "coulomb_static", "e_S": 0.5, "mu_s": 0.5},
    "initial": {"t": 0, "q": [0, 0], "qdot": [1, -1]},
    "force": [0, "-m*g"],
    "simulation": {"t_end": 2, "step": 0.01, "max_impacts": 10, "settle_speed": 1e-6}
  })");
}

// Returns the error raised by parse_scenario, or fails the test.
Error parse_error(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an error for " << doc.dump();
  return Error(ErrorKind::Contract, "none");
}

bool mentions(const Error& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

TEST(ParseScenario, BuiltinPoint) {
  const Scenario sc = parse_scenario(point_doc());
  ASSERT_TRUE(sc.builtin.has_value());
  EXPECT_EQ(sc.builtin->name, "point");
  EXPECT_EQ(sc.coordinates(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(sc.config.force, (Vector{{0.0, -10.0}}));
  EXPECT_EQ(sc.config.max_impacts, 10);
  EXPECT_EQ(sc.config.law.name(), "coulomb_static");
  EXPECT_EQ(sc.parameters.at("g"), 10.0);
}

TEST(ParseScenario, ExpressionsAndContactPlacement) {
  json doc = json::parse(R"({
    "model": {"builtin": "rod", "parameters": {"m": 1, "L": 2, "A": 0.5}},
    "law": {"type": "restitution", "e_S": 0.5},
    "initial": {"q": [0, 0, "pi/3"], "qdot": [0, -1, 0], "solve_contact_for": "y"}
  })");
  const Scenario sc = parse_scenario(doc);
  EXPECT_NEAR(sc.config.initial.q(2), std::numbers::pi / 3, 1e-15);
  EXPECT_NEAR(sc.config.initial.q(1), 2.0 * std::sin(std::numbers::pi / 3), 1e-12);
}

TEST(ParseScenario, CustomModelWithDerivedGradient) {
  const Scenario sc = load_scenario(kScenarios + "/custom_rod.json");
  ASSERT_TRUE(sc.custom.has_value());
  EXPECT_FALSE(sc.custom->gradient_hand_written);
  const Vector q = sc.config.initial.q;
  EXPECT_LE(std::abs(sc.config.system.surface.value(q)), contact_tolerance(q));
}

TEST(ParseScenario, SchemaErrorsPointAtField) {
  json doc = point_doc();
  doc["initial"]["qdot"] = json::array({1});
  Error e = parse_error(doc);
  EXPECT_EQ(e.kind(), ErrorKind::Schema);
  EXPECT_TRUE(mentions(e, "/initial/qdot")) << e.what();

  doc = point_doc();
  doc["law"]["mu_s"] = "lots";
  e = parse_error(doc);
  EXPECT_EQ(e.kind(), ErrorKind::Schema);
  EXPECT_TRUE(mentions(e, "/law/mu_s")) << e.what();

  doc = point_doc();
  doc["extra"] = 1;
  EXPECT_EQ(parse_error(doc).kind(), ErrorKind::Schema);

  doc = point_doc();
  doc["model"]["builtin"] = "cube";
  e = parse_error(doc);
  EXPECT_EQ(e.kind(), ErrorKind::Schema);
  EXPECT_TRUE(mentions(e, "/model/builtin")) << e.what();

  doc = point_doc();
  doc["simulation"]["max_impacts"] = 0;
  EXPECT_EQ(parse_error(doc).kind(), ErrorKind::Schema);

  doc = point_doc();
  doc["law"]["e_S"] = 2.0;
  EXPECT_EQ(parse_error(doc).kind(), ErrorKind::Schema);

  doc = point_doc();
  doc["force"] = json::array({0, "-m*h"});
  e = parse_error(doc);
  EXPECT_TRUE(mentions(e, "/force/1")) << e.what();
}

TEST(ParseScenario, ExpressionSyntaxErrorKeepsColumn) {
  json doc = point_doc();
  doc["force"] = json::array({0, "-m*"});
  try {
    parse_scenario(doc);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_EQ(e.column(), 4);
    EXPECT_TRUE(mentions(e, "/force/1")) << e.what();
  }
}

TEST(LoadScenario, MalformedAndMissingFiles) {
  try {
    load_scenario(kData + "/malformed.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Schema);
    EXPECT_TRUE(mentions(e, "line")) << e.what();
  }
  try {
    load_scenario(kData + "/does_not_exist.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(LoadScenario, ShippedScenariosParse) {
  for (const char* name : {"point_slip", "point_stick", "point_bounce", "disk_backspin", "rod_vertical",
                           "rod_inclined", "rod_drop", "custom_rod", "custom_polar_point"}) {
    EXPECT_NO_THROW(load_scenario(kScenarios + "/" + name + ".json")) << name;
  }
}

TEST(WithParameter, ResolutionOrder) {
  const json doc = point_doc();
  EXPECT_EQ(with_parameter(doc, "mu_s", 0.25)["law"]["mu_s"], 0.25);
  EXPECT_EQ(with_parameter(doc, "m", 3.0)["model"]["parameters"]["m"], 3.0);
  EXPECT_EQ(with_parameter(doc, "g", 9.81)["model"]["parameters"]["g"], 9.81);
  EXPECT_EQ(with_parameter(doc, "x", 0.5)["initial"]["q"][0], 0.5);
  EXPECT_EQ(with_parameter(doc, "qdot.y", -2.0)["initial"]["qdot"][1], -2.0);
  EXPECT_EQ(with_parameter(doc, "t_end", 4.0)["simulation"]["t_end"], 4.0);
  EXPECT_THROW(with_parameter(doc, "e_B", 0.1), Error);
  try {
    with_parameter(doc, "zeta", 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownParameter);
  }
}

}  // namespace
}  // namespace impulse::cli
