#include "scenario.hpp"

#include "impulse/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace impulse::cli {
namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& message) {
  fail(ErrorKind::Schema, "at " + (where.empty() ? std::string("/") : where) + ": " + message);
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.is_object()) schema(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(where, std::string("missing key '") + key + "'");
  return *it;
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) schema(where, "unknown key '" + key + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema(where, "expected a finite number");
  return x;
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) schema(where, "expected a string");
  return v.get<std::string>();
}

expr::Expr expression(const json& v, const std::string& where) {
  std::string source;
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    source = os.str();
    if (!source.empty() && source.front() == '-') source = "(" + source + ")";
  } else {
    source = text(v, where);
  }
  try {
    return expr::parse(source);
  } catch (const ParseError& e) {
    throw ParseError(e.column(), std::string("at ") + where + ": '" + source + "': " + e.what());
  }
}

void require_bound(const expr::Expr& e, const std::vector<std::string>& names, const std::string& where) {
  for (const std::string& v : e.variables()) {
    if (std::find(names.begin(), names.end(), v) == names.end()) {
      schema(where, "expression uses undeclared variable '" + v + "'");
    }
  }
}

// Numbers or parameter expressions.
double scalar(const json& v, const std::string& where, const expr::Environment& env) {
  if (v.is_number()) return number(v, where);
  const expr::Expr e = expression(v, where);
  for (const std::string& name : e.variables()) {
    if (!env.contains(name)) schema(where, "expression uses unknown parameter '" + name + "'");
  }
  return expr::evaluate(e, env);
}

Vector vector_field(const json& v, const std::string& where, Index n, const expr::Environment& env) {
  if (!v.is_array()) schema(where, "expected an array");
  if (static_cast<Index>(v.size()) != n) {
    schema(where, "expected " + std::to_string(n) + " entries, found " + std::to_string(v.size()));
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    out(i) = scalar(v[static_cast<std::size_t>(i)], where + "/" + std::to_string(i), env);
  }
  return out;
}

std::map<std::string, double> parameter_map(const json& v, const std::string& where) {
  std::map<std::string, double> out;
  if (v.is_null()) return out;
  if (!v.is_object()) schema(where, "expected an object");
  for (const auto& [key, value] : v.items()) out[key] = number(value, where + "/" + key);
  return out;
}

ContactLaw parse_law(const json& v, const std::string& where) {
  const std::string type = text(require(v, where, "type"), where + "/type");
  auto coef = [&](const char* key) { return number(require(v, where, key), where + "/" + key); };
  try {
    if (type == "ideal") {
      reject_unknown_keys(v, where, {"type"});
      return ContactLaw::ideal();
    }
    if (type == "restitution") {
      reject_unknown_keys(v, where, {"type", "e_S"});
      return ContactLaw::restitution(coef("e_S"));
    }
    if (type == "double_restitution") {
      reject_unknown_keys(v, where, {"type", "e_S", "e_B"});
      return ContactLaw::double_restitution(coef("e_S"), coef("e_B"));
    }
    if (type == "coulomb_static") {
      reject_unknown_keys(v, where, {"type", "e_S", "mu_s"});
      return ContactLaw::coulomb_static(coef("e_S"), coef("mu_s"));
    }
    if (type == "coulomb_dynamic") {
      reject_unknown_keys(v, where, {"type", "e_S", "mu_s", "mu_d"});
      return ContactLaw::coulomb_dynamic(coef("e_S"), coef("mu_s"), coef("mu_d"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Domain) schema(where, e.what());
    throw;
  }
  schema(where + "/type", "unknown law '" + type + "'");
}

std::vector<std::vector<expr::Expr>> expression_matrix(const json& v, const std::string& where,
                                                       std::size_t cols) {
  if (!v.is_array() || v.empty()) schema(where, "expected a non-empty array of rows");
  std::vector<std::vector<expr::Expr>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_where = where + "/" + std::to_string(i);
    const json& row = v[i];
    if (!row.is_array() || row.size() != cols) {
      schema(row_where, "expected a row of " + std::to_string(cols) + " expressions");
    }
    std::vector<expr::Expr> r;
    for (std::size_t j = 0; j < cols; ++j) r.push_back(expression(row[j], row_where + "/" + std::to_string(j)));
    out.push_back(std::move(r));
  }
  return out;
}

// Expressions over coordinates with parameters substituted at evaluation.
struct Bound {
  std::vector<std::string> slots;
  std::vector<double> fixed;  // parameter values, then pi
  std::size_t n = 0;

  expr::BoundExpr bind(const expr::Expr& e) const { return expr::BoundExpr(e, slots); }

  std::vector<double> values(const Vector& q) const {
    std::vector<double> v(n + fixed.size());
    for (std::size_t i = 0; i < n; ++i) v[i] = q(static_cast<Index>(i));
    std::copy(fixed.begin(), fixed.end(), v.begin() + static_cast<std::ptrdiff_t>(n));
    return v;
  }
};

MechanicalSystem build_custom(const CustomModel& model) {
  const std::size_t n = model.coordinates.size();
  auto bound = std::make_shared<Bound>();
  bound->slots = model.coordinates;
  bound->n = n;
  for (const auto& [key, value] : model.parameters) {
    bound->slots.push_back(key);
    bound->fixed.push_back(value);
  }
  bound->slots.push_back("pi");
  bound->fixed.push_back(std::numbers::pi);

  bool constant = true;
  for (const auto& row : model.metric) {
    for (const auto& e : row) {
      for (const std::string& v : e.variables()) {
        if (std::find(model.coordinates.begin(), model.coordinates.end(), v) != model.coordinates.end()) {
          constant = false;
        }
      }
    }
  }

  std::vector<expr::BoundExpr> metric;
  for (const auto& row : model.metric) {
    for (const auto& e : row) metric.push_back(bound->bind(e));
  }
  auto metric_fn = [bound, metric, n](const Vector& q) {
    const std::vector<double> vals = bound->values(q);
    Matrix G(static_cast<Index>(n), static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        G(static_cast<Index>(i), static_cast<Index>(j)) = metric[i * n + j](vals);
      }
    }
    return G;
  };
  std::optional<MassMetric> mass;
  if (constant) {
    try {
      mass = MassMetric::constant(metric_fn(Vector::Zero(static_cast<Index>(n))));
    } catch (const Error&) {
      // Left to per-evaluation validation so diagnostics can report it.
    }
  }
  if (!mass) mass = MassMetric::field(static_cast<Index>(n), metric_fn);

  const expr::BoundExpr surface = bound->bind(model.surface);
  std::vector<expr::BoundExpr> gradient;
  for (const auto& e : model.gradient) gradient.push_back(bound->bind(e));
  std::vector<expr::BoundExpr> stick;
  for (const auto& row : model.stick) {
    for (const auto& e : row) stick.push_back(bound->bind(e));
  }
  const std::size_t k = model.stick.size();

  return MechanicalSystem{
      "custom",
      model.coordinates,
      *mass,
      ContactSurface([bound, surface](const Vector& q) { return surface(bound->values(q)); },
                     [bound, gradient, n](const Vector& q) {
                       const std::vector<double> vals = bound->values(q);
                       RowVector g(static_cast<Index>(n));
                       for (std::size_t i = 0; i < n; ++i) g(static_cast<Index>(i)) = gradient[i](vals);
                       return g;
                     }),
      StickConstraint([bound, stick, n, k](const Vector& q) {
        const std::vector<double> vals = bound->values(q);
        Matrix C(static_cast<Index>(k), static_cast<Index>(n));
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            C(static_cast<Index>(i), static_cast<Index>(j)) = stick[i * n + j](vals);
          }
        }
        return C;
      }),
      {},
  };
}

CustomModel parse_custom(const json& v, const std::string& where) {
  reject_unknown_keys(v, where, {"coordinates", "parameters", "metric", "surface", "surface_gradient", "stick"});
  CustomModel model;
  const json& coords = require(v, where, "coordinates");
  if (!coords.is_array() || coords.size() < 2) schema(where + "/coordinates", "expected at least two names");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    model.coordinates.push_back(text(coords[i], where + "/coordinates/" + std::to_string(i)));
  }
  if (auto it = v.find("parameters"); it != v.end()) model.parameters = parameter_map(*it, where + "/parameters");

  std::vector<std::string> names = model.coordinates;
  for (const auto& [key, value] : model.parameters) names.push_back(key);
  names.push_back("pi");

  const std::size_t n = model.coordinates.size();
  model.metric = expression_matrix(require(v, where, "metric"), where + "/metric", n);
  if (model.metric.size() != n) schema(where + "/metric", "expected " + std::to_string(n) + " rows");
  model.surface = expression(require(v, where, "surface"), where + "/surface");
  require_bound(model.surface, names, where + "/surface");
  if (auto it = v.find("surface_gradient"); it != v.end()) {
    if (!it->is_array() || it->size() != n) {
      schema(where + "/surface_gradient", "expected " + std::to_string(n) + " expressions");
    }
    for (std::size_t i = 0; i < n; ++i) {
      model.gradient.push_back(expression((*it)[i], where + "/surface_gradient/" + std::to_string(i)));
    }
    model.gradient_hand_written = true;
  } else {
    for (const std::string& c : model.coordinates) model.gradient.push_back(expr::differentiate(model.surface, c));
  }
  model.stick = expression_matrix(require(v, where, "stick"), where + "/stick", n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      require_bound(model.metric[i][j], names, where + "/metric/" + std::to_string(i) + "/" + std::to_string(j));
    }
    require_bound(model.gradient[i], names, where + "/surface_gradient/" + std::to_string(i));
  }
  for (std::size_t i = 0; i < model.stick.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      require_bound(model.stick[i][j], names, where + "/stick/" + std::to_string(i) + "/" + std::to_string(j));
    }
  }
  return model;
}

// Moves coordinate `index` until s(q) = 0 (Newton with gradient component).
void place_on_surface(const MechanicalSystem& system, Vector& q, Index index) {
  for (int iter = 0; iter < 100; ++iter) {
    const double s = system.surface.value(q);
    if (std::abs(s) <= 1e-3 * contact_tolerance(q)) return;
    const double ds = system.surface.gradient(q)(index);
    if (ds == 0.0) fail(ErrorKind::Contact, "surface does not depend on the solved coordinate");
    q(index) -= s / ds;
  }
  if (!(std::abs(system.surface.value(q)) <= contact_tolerance(q))) {
    fail(ErrorKind::Contact, "could not place the initial state on the surface");
  }
}

}  // namespace

Scenario parse_scenario(const json& document) {
  if (!document.is_object()) schema("", "expected an object");
  reject_unknown_keys(document, "", {"model", "law", "initial", "force", "simulation", "output"});
  const json& model = require(document, "", "model");
  if (!model.is_object()) schema("/model", "expected an object");
  if (model.contains("builtin") == model.contains("custom")) {
    schema("/model", "expected exactly one of 'builtin' or 'custom'");
  }
  std::map<std::string, double> parameters;
  std::optional<ModelSpec> builtin;
  std::optional<CustomModel> custom;
  if (model.contains("builtin")) {
    reject_unknown_keys(model, "/model", {"builtin", "parameters"});
    const std::string name = text(model["builtin"], "/model/builtin");
    parameters = parameter_map(model.contains("parameters") ? model["parameters"] : json(), "/model/parameters");
    try {
      builtin = build_model(name, parameters);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Domain || e.kind() == ErrorKind::UnknownParameter) schema("/model", e.what());
      if (e.kind() == ErrorKind::UnknownModel) schema("/model/builtin", e.what());
      throw;
    }
  } else {
    reject_unknown_keys(model, "/model", {"custom"});
    custom = parse_custom(model["custom"], "/model/custom");
    parameters = custom->parameters;
  }

  Scenario sc(builtin ? builtin->system : build_custom(*custom));
  sc.document = document;
  sc.builtin = std::move(builtin);
  sc.custom = std::move(custom);
  sc.parameters = std::move(parameters);

  const Index n = sc.config.system.dim();
  expr::Environment env;
  for (const auto& [key, value] : sc.parameters) env[key] = value;
  env["pi"] = std::numbers::pi;

  sc.config.law = parse_law(require(document, "", "law"), "/law");

  const json& initial = require(document, "", "initial");
  reject_unknown_keys(initial, "/initial", {"t", "q", "qdot", "solve_contact_for"});
  sc.config.initial.time = initial.contains("t") ? number(initial["t"], "/initial/t") : 0.0;
  sc.config.initial.q = vector_field(require(initial, "/initial", "q"), "/initial/q", n, env);
  sc.config.initial.qdot = vector_field(require(initial, "/initial", "qdot"), "/initial/qdot", n, env);
  if (initial.contains("solve_contact_for")) {
    const std::string coord = text(initial["solve_contact_for"], "/initial/solve_contact_for");
    const auto& coords = sc.config.system.coordinates;
    auto it = std::find(coords.begin(), coords.end(), coord);
    if (it == coords.end()) schema("/initial/solve_contact_for", "unknown coordinate '" + coord + "'");
    place_on_surface(sc.config.system, sc.config.initial.q, static_cast<Index>(it - coords.begin()));
  }

  sc.config.force = document.contains("force") ? vector_field(document["force"], "/force", n, env)
                                               : Vector::Zero(n);

  if (document.contains("simulation")) {
    const json& sim = document["simulation"];
    reject_unknown_keys(sim, "/simulation", {"t_end", "step", "max_impacts", "settle_speed"});
    if (sim.contains("t_end")) sc.config.t_end = number(sim["t_end"], "/simulation/t_end");
    if (sim.contains("step")) sc.config.step = number(sim["step"], "/simulation/step");
    if (sim.contains("max_impacts")) {
      if (!sim["max_impacts"].is_number_integer()) schema("/simulation/max_impacts", "expected an integer");
      sc.config.max_impacts = sim["max_impacts"].get<int>();
    }
    if (sim.contains("settle_speed")) sc.config.settle_speed = number(sim["settle_speed"], "/simulation/settle_speed");
  } else {
    sc.config.t_end = sc.config.initial.time + 1.0;
  }
  try {
    sc.config.validate();
  } catch (const Error& e) {
    schema("/simulation", e.what());
  }

  if (document.contains("output")) {
    const json& out = document["output"];
    reject_unknown_keys(out, "/output", {"format", "path"});
    if (out.contains("format")) sc.output_format = text(out["format"], "/output/format");
    if (out.contains("path")) sc.output_path = text(out["path"], "/output/path");
    if (sc.output_format != "csv" && sc.output_format != "json") {
      schema("/output/format", "expected 'csv' or 'json'");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json document;
  try {
    document = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, path + ": " + e.what());
  }
  try {
    return parse_scenario(document);
  } catch (const ParseError& e) {
    throw ParseError(e.column(), path + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

json with_parameter(const json& document, const std::string& name, double value) {
  const Scenario base = parse_scenario(document);
  json doc = document;
  json& law = doc["law"];
  if (name == "e_S" || name == "e_B" || name == "mu_s" || name == "mu_d") {
    if (!law.contains(name)) fail(ErrorKind::UnknownParameter, "law has no coefficient '" + name + "'");
    law[name] = value;
    return doc;
  }
  json& model = doc["model"];
  if (model.contains("builtin")) {
    if (base.parameters.contains(name)) {
      model["parameters"][name] = value;
      return doc;
    }
  } else if (base.custom->parameters.contains(name)) {
    model["custom"]["parameters"][name] = value;
    return doc;
  }
  const auto& coords = base.coordinates();
  std::string coord = name;
  const char* key = "q";
  if (name.rfind("qdot.", 0) == 0) {
    coord = name.substr(5);
    key = "qdot";
  }
  if (auto it = std::find(coords.begin(), coords.end(), coord); it != coords.end()) {
    doc["initial"][key][static_cast<std::size_t>(it - coords.begin())] = value;
    return doc;
  }
  if (name == "t_end" || name == "step" || name == "settle_speed") {
    doc["simulation"][name] = value;
    return doc;
  }
  fail(ErrorKind::UnknownParameter, "unknown sweep parameter '" + name + "'");
}

}  // namespace impulse::cli
