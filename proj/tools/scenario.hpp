#pragma once

// Scenario documents: JSON objects describing a model, a contact law, an
// initial state, a constant force, and simulation/output settings.
//
//   {
//     "model": {"builtin": "rod", "parameters": {"m": 1, "L": 1, "A": 0.3333}}
//          or  {"custom": {"coordinates": [...], "parameters": {...},
//                          "metric": [[expr, ...], ...], "surface": expr,
//                          "surface_gradient": [expr, ...],   (optional)
//                          "stick": [[expr, ...], ...]}},
//     "law": {"type": "coulomb_static", "e_S": 0.5, "mu_s": 0.5},
//     "initial": {"t": 0, "q": [...], "qdot": [...], "solve_contact_for": "y"},
//     "force": [0, "-m*g", 0],
//     "simulation": {"t_end": 2, "step": 1e-3, "max_impacts": 100, "settle_speed": 1e-6},
//     "output": {"format": "csv", "path": "out"}
//   }
//
// Numeric fields in "initial" and "force" may be expressions over the model
// parameters and `pi`.

#include "impulse/expr.hpp"
#include "impulse/models.hpp"
#include "impulse/simulator.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace impulse::cli {

struct CustomModel {
  std::vector<std::string> coordinates;
  std::map<std::string, double> parameters;
  std::vector<std::vector<expr::Expr>> metric;
  expr::Expr surface;
  std::vector<expr::Expr> gradient;
  bool gradient_hand_written = false;
  std::vector<std::vector<expr::Expr>> stick;
};

struct Scenario {
  explicit Scenario(MechanicalSystem system) : config(std::move(system)) {}

  nlohmann::json document;
  ScenarioConfig config;
  std::optional<ModelSpec> builtin;
  std::optional<CustomModel> custom;
  std::map<std::string, double> parameters;  // model parameters (and g)
  std::string output_format = "csv";
  std::string output_path = ".";

  const std::vector<std::string>& coordinates() const { return config.system.coordinates; }
};

// Validates and builds. Schema problems throw ErrorKind::Schema with a JSON
// pointer to the offending field; expression syntax errors keep
// ErrorKind::Parse.
Scenario parse_scenario(const nlohmann::json& document);

// Reads a UTF-8 JSON file. Malformed JSON reports line and column.
Scenario load_scenario(const std::string& path);

// Returns a copy of `document` with one parameter overridden. Names resolve in
// order: law coefficients (e_S, e_B, mu_s, mu_d), model parameters (and g),
// coordinate names (initial q), "qdot.<coordinate>", then t_end, step and
// settle_speed. Anything else is ErrorKind::UnknownParameter.
nlohmann::json with_parameter(const nlohmann::json& document, const std::string& name, double value);

}  // namespace impulse::cli
