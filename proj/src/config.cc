#include "lpvp/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lpvp {
namespace {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Writer. Floating point values are printed in the shortest form that reads
// back to the same double; arrays of scalars stay on one line, which keeps
// matrix rows readable.

std::string FormatDouble(double value) {
  Require(std::isfinite(value), ErrorKind::kNumerical,
          "cannot serialize a non-finite number");
  // A bare "-0" would read back as the integer 0.
  if (value == 0.0 && std::signbit(value)) return "-0.0";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

bool IsFlat(const Json& j) {
  for (const auto& item : j) {
    if (item.is_structured()) return false;
  }
  return true;
}

void Write(const Json& j, int indent, std::string* out) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        *out += "{}";
        return;
      }
      *out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) *out += ",\n";
        first = false;
        *out += inner + Json(key).dump() + ": ";
        Write(value, indent + 2, out);
      }
      *out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        *out += "[]";
        return;
      }
      const bool flat = IsFlat(j);
      *out += flat ? "[" : "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i > 0) *out += flat ? ", " : ",\n";
        if (!flat) *out += inner;
        Write(j[i], indent + 2, out);
      }
      *out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      *out += FormatDouble(j.get<double>());
      return;
    default:
      *out += j.dump();
  }
}

std::string Dump(const Json& j) {
  std::string out;
  Write(j, 0, &out);
  out += "\n";
  return out;
}

Json Parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Throw(ErrorKind::kConfig, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Path-aware reading. Every error names the offending key.

class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& json() const { return j_; }

  std::string Child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void ExpectObject(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) Fail(path_, "expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!keys.count(key)) Fail(Child(key), "unknown key");
    }
  }

  bool Has(const char* key) const { return j_.contains(key); }

  Node Object(const char* key) const { return Node(j_.at(key), Child(key)); }

  void Number(const char* key, double* out, bool required = false) const {
    if (!Present(key, required)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) Fail(Child(key), "expected a number");
    *out = v.get<double>();
    if (!std::isfinite(*out)) Fail(Child(key), "must be finite");
  }

  void Integer(const char* key, int* out) const {
    if (!Present(key, false)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) Fail(Child(key), "expected an integer");
    *out = v.get<int>();
  }

  void Unsigned(const char* key, std::uint64_t* out) const {
    if (!Present(key, false)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) Fail(Child(key), "expected a nonnegative integer");
    *out = v.get<std::uint64_t>();
  }

  void Bool(const char* key, bool* out) const {
    if (!Present(key, false)) return;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) Fail(Child(key), "expected true or false");
    *out = v.get<bool>();
  }

  void String(const char* key, std::string* out) const {
    if (!Present(key, false)) return;
    const Json& v = j_.at(key);
    if (!v.is_string()) Fail(Child(key), "expected a string");
    *out = v.get<std::string>();
  }

  std::vector<double> Numbers(const Json& v, const std::string& path) const {
    if (!v.is_array()) Fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) Fail(path + "." + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void NumberList(const char* key, std::vector<double>* out) const {
    if (!Present(key, false)) return;
    *out = Numbers(j_.at(key), Child(key));
  }

  /// Parses an enumeration through `parse`, turning its error into a keyed
  /// config error.
  template <typename T, typename F>
  void Enum(const char* key, T* out, F parse) const {
    std::string text;
    String(key, &text);
    if (!Has(key)) return;
    try {
      *out = parse(text);
    } catch (const Error& e) {
      Fail(Child(key), e.what());
    }
  }

  [[noreturn]] static void Fail(const std::string& path, const std::string& msg) {
    Throw(ErrorKind::kConfig, path + ": " + msg);
  }

 private:
  bool Present(const char* key, bool required) const {
    if (j_.contains(key)) return true;
    if (required) Fail(Child(key), "missing required field");
    return false;
  }

  const Json& j_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// ToolConfig <-> tree.

const char* VariantName(ErrorModelVariant v) {
  return v == ErrorModelVariant::kPaper ? "paper" : "standard";
}

ErrorModelVariant ParseVariant(const std::string& text) {
  if (text == "paper") return ErrorModelVariant::kPaper;
  if (text == "standard") return ErrorModelVariant::kStandard;
  Throw(ErrorKind::kConfig, "unknown model variant '" + text + "'");
}

std::string ParseMethod(const std::string& text) {
  if (text == "lq") return text;
  return ToString(ParseSynthesisMode(text));
}

Json ScenarioToJson(const ScenarioSpec& spec) {
  const Scenario& s = spec.scenario;
  Json path;
  path["kind"] = ToString(s.path.kind);
  path["length"] = s.path.length;
  path["lateral_shift"] = s.path.lateral_shift;
  path["transition_start"] = s.path.transition_start;
  path["transition_length"] = s.path.transition_length;
  Json waypoints = Json::array();
  for (const auto& w : s.path.waypoints) waypoints.push_back({w.x(), w.y()});
  path["waypoints"] = waypoints;

  Json j;
  j["name"] = s.name;
  j["path"] = path;
  if (s.speed.kind == SpeedProfile::Kind::kConstant) {
    j["speed"] = s.speed.values.empty() ? 0.0 : s.speed.values.front();
  } else {
    j["speed"] = {{"times", s.speed.times}, {"values", s.speed.values}};
  }
  j["speeds"] = spec.speeds;
  j["duration"] = s.duration;
  j["initial_error"] = {s.initial_error[0], s.initial_error[1],
                        s.initial_error[2], s.initial_error[3]};
  j["initial_offset_std"] = s.initial_offset_std;
  return j;
}

ScenarioSpec ScenarioFromJson(const Node& node) {
  node.ExpectObject({"name", "path", "speed", "speeds", "duration",
                     "initial_error", "initial_offset_std"});
  ScenarioSpec spec;
  Scenario& s = spec.scenario;
  node.String("name", &s.name);
  if (node.Has("path")) {
    const Node p = node.Object("path");
    p.ExpectObject({"kind", "length", "lateral_shift", "transition_start",
                    "transition_length", "waypoints"});
    p.Enum("kind", &s.path.kind, ParsePathKind);
    p.Number("length", &s.path.length);
    p.Number("lateral_shift", &s.path.lateral_shift);
    p.Number("transition_start", &s.path.transition_start);
    p.Number("transition_length", &s.path.transition_length);
    if (p.Has("waypoints")) {
      const Json& w = p.json().at("waypoints");
      const std::string wp = p.Child("waypoints");
      if (!w.is_array()) Node::Fail(wp, "expected an array of [X, Y] pairs");
      for (size_t i = 0; i < w.size(); ++i) {
        const auto xy = p.Numbers(w[i], wp + "." + std::to_string(i));
        if (xy.size() != 2) {
          Node::Fail(wp + "." + std::to_string(i), "expected an [X, Y] pair");
        }
        s.path.waypoints.emplace_back(xy[0], xy[1]);
      }
    }
  }
  if (node.Has("speed")) {
    const Json& v = node.json().at("speed");
    if (v.is_number()) {
      s.speed = SpeedProfile::Constant(v.get<double>());
    } else {
      const Node sp = node.Object("speed");
      sp.ExpectObject({"times", "values"});
      s.speed.kind = SpeedProfile::Kind::kPiecewiseLinear;
      sp.NumberList("times", &s.speed.times);
      sp.NumberList("values", &s.speed.values);
    }
  }
  node.NumberList("speeds", &spec.speeds);
  node.Number("duration", &s.duration);
  if (node.Has("initial_error")) {
    const auto e = node.Numbers(node.json().at("initial_error"),
                                node.Child("initial_error"));
    if (e.size() != 4) {
      Node::Fail(node.Child("initial_error"), "expected [y, V_y, Psi, Psi_dot]");
    }
    s.initial_error = Eigen::Vector4d(e[0], e[1], e[2], e[3]);
  }
  node.Number("initial_offset_std", &s.initial_offset_std);
  return spec;
}

Json ConfigToJson(const ToolConfig& c) {
  Json j;
  j["vehicle"] = {{"m", c.vehicle.m},
                  {"Iz", c.vehicle.Iz},
                  {"Lf", c.vehicle.Lf},
                  {"Lr", c.vehicle.Lr},
                  {"Caf", c.vehicle.Caf},
                  {"Car", c.vehicle.Car},
                  {"stiffness_uncertainty", c.vehicle.stiffness_uncertainty}};
  j["preview"] = {{"T", c.preview.T},
                  {"N", c.preview.N},
                  {"v_min", c.preview.v_min},
                  {"v_max", c.preview.v_max}};
  j["model"] = {{"variant", VariantName(c.variant)}, {"speeds", c.model_speeds}};
  j["weights"] = {{"q1", c.weights.q1}, {"q2", c.weights.q2}, {"R", c.weights.R}};
  const auto& s = c.synthesis;
  j["synthesis"] = {{"method", s.method},
                    {"uncertain", s.uncertain},
                    {"interpolation", ToString(s.interpolation)},
                    {"feas_tol", s.feas_tol},
                    {"opt_tol", s.opt_tol},
                    {"max_iter", s.max_iter},
                    {"lq_tol", s.lq_tol},
                    {"lq_max_iter", s.lq_max_iter},
                    {"verify_grid", s.verify_grid},
                    {"sweep_points", s.sweep_points}};
  const auto& p = c.pole_region;
  j["pole_region"] = {{"enabled", p.enabled},
                      {"zeta_p", p.zeta_p},
                      {"scope", ToString(p.scope)},
                      {"decouple_lyapunov", p.decouple_lyapunov}};
  j["simulation"] = {{"preview_frame", ToString(c.simulation.preview_frame)},
                     {"run", c.simulation.run}};
  Json scenarios = Json::array();
  for (const auto& sc : c.scenarios) scenarios.push_back(ScenarioToJson(sc));
  j["scenarios"] = scenarios;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

ToolConfig ConfigFromJson(const Json& j, bool require_vehicle) {
  ToolConfig c = ToolConfig::Defaults();
  const Node root(j, "");
  root.ExpectObject({"vehicle", "preview", "model", "weights", "synthesis",
                     "pole_region", "simulation", "scenarios", "output_dir",
                     "seed"});
  if (require_vehicle && !root.Has("vehicle")) {
    Node::Fail("vehicle", "missing required section");
  }
  if (root.Has("vehicle")) {
    const Node v = root.Object("vehicle");
    v.ExpectObject({"m", "Iz", "Lf", "Lr", "Caf", "Car", "stiffness_uncertainty"});
    v.Number("m", &c.vehicle.m, require_vehicle);
    v.Number("Iz", &c.vehicle.Iz, require_vehicle);
    v.Number("Lf", &c.vehicle.Lf, require_vehicle);
    v.Number("Lr", &c.vehicle.Lr, require_vehicle);
    v.Number("Caf", &c.vehicle.Caf, require_vehicle);
    v.Number("Car", &c.vehicle.Car, require_vehicle);
    v.Number("stiffness_uncertainty", &c.vehicle.stiffness_uncertainty);
  }
  if (root.Has("preview")) {
    const Node p = root.Object("preview");
    p.ExpectObject({"T", "N", "v_min", "v_max"});
    p.Number("T", &c.preview.T);
    p.Integer("N", &c.preview.N);
    p.Number("v_min", &c.preview.v_min);
    p.Number("v_max", &c.preview.v_max);
  }
  if (root.Has("model")) {
    const Node m = root.Object("model");
    m.ExpectObject({"variant", "speeds"});
    m.Enum("variant", &c.variant, ParseVariant);
    m.NumberList("speeds", &c.model_speeds);
  }
  if (root.Has("weights")) {
    const Node w = root.Object("weights");
    w.ExpectObject({"q1", "q2", "R"});
    w.Number("q1", &c.weights.q1);
    w.Number("q2", &c.weights.q2);
    w.Number("R", &c.weights.R);
  }
  if (root.Has("synthesis")) {
    const Node s = root.Object("synthesis");
    s.ExpectObject({"method", "uncertain", "interpolation", "feas_tol", "opt_tol",
                    "max_iter", "lq_tol", "lq_max_iter", "verify_grid",
                    "sweep_points"});
    s.Enum("method", &c.synthesis.method, ParseMethod);
    s.Bool("uncertain", &c.synthesis.uncertain);
    s.Enum("interpolation", &c.synthesis.interpolation, ParseInterpolationMode);
    s.Number("feas_tol", &c.synthesis.feas_tol);
    s.Number("opt_tol", &c.synthesis.opt_tol);
    s.Integer("max_iter", &c.synthesis.max_iter);
    s.Number("lq_tol", &c.synthesis.lq_tol);
    s.Integer("lq_max_iter", &c.synthesis.lq_max_iter);
    s.Integer("verify_grid", &c.synthesis.verify_grid);
    s.Integer("sweep_points", &c.synthesis.sweep_points);
  }
  if (root.Has("pole_region")) {
    const Node p = root.Object("pole_region");
    p.ExpectObject({"enabled", "zeta_p", "scope", "decouple_lyapunov"});
    p.Bool("enabled", &c.pole_region.enabled);
    p.Number("zeta_p", &c.pole_region.zeta_p);
    p.Enum("scope", &c.pole_region.scope, ParsePoleScope);
    p.Bool("decouple_lyapunov", &c.pole_region.decouple_lyapunov);
  }
  if (root.Has("simulation")) {
    const Node s = root.Object("simulation");
    s.ExpectObject({"preview_frame", "run"});
    s.Enum("preview_frame", &c.simulation.preview_frame, ParsePreviewFrame);
    if (s.Has("run")) {
      const Json& run = s.json().at("run");
      if (!run.is_array()) Node::Fail(s.Child("run"), "expected a list of names");
      c.simulation.run.clear();
      for (size_t i = 0; i < run.size(); ++i) {
        if (!run[i].is_string()) {
          Node::Fail(s.Child("run") + "." + std::to_string(i), "expected a string");
        }
        c.simulation.run.push_back(run[i].get<std::string>());
      }
    }
  }
  if (root.Has("scenarios")) {
    const Json& list = j.at("scenarios");
    if (!list.is_array()) Node::Fail("scenarios", "expected a list");
    c.scenarios.clear();
    for (size_t i = 0; i < list.size(); ++i) {
      c.scenarios.push_back(
          ScenarioFromJson(Node(list[i], "scenarios." + std::to_string(i))));
    }
  }
  root.String("output_dir", &c.output_dir);
  root.Unsigned("seed", &c.seed);
  c.Validate();
  return c;
}

// ---------------------------------------------------------------------------
// Matrices as nested row-major arrays.

Json RowToJson(const RowVectorXd& r) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < r.size(); ++i) j.push_back(r[i]);
  return j;
}

Json MatrixToJson(const MatrixXd& m) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(RowToJson(m.row(i)));
  return j;
}

RowVectorXd RowFromJson(const Node& node, const char* key) {
  std::vector<double> values;
  if (!node.Has(key)) Node::Fail(node.Child(key), "missing required field");
  values = node.Numbers(node.json().at(key), node.Child(key));
  return Eigen::Map<RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

MatrixXd MatrixFromJson(const Node& node, const char* key) {
  const Json& j = node.json().at(key);
  const std::string path = node.Child(key);
  if (!j.is_array()) Node::Fail(path, "expected a list of rows");
  MatrixXd m;
  for (size_t i = 0; i < j.size(); ++i) {
    const auto row = node.Numbers(j[i], path + "." + std::to_string(i));
    if (i == 0) m.resize(static_cast<Eigen::Index>(j.size()),
                         static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
      Node::Fail(path, "rows have different lengths");
    }
    for (size_t k = 0; k < row.size(); ++k) m(i, k) = row[k];
  }
  return m;
}

// The H-infinity norm of an unstable loop is reported as null.
Json FiniteOrNull(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

Json VertexCheckJson(const VertexCheck& v) {
  return {{"speed_vertex", v.speed_vertex + 1},
          {"stiffness_corner", {v.corner[0], v.corner[1]}},
          {"vx", v.rho.vx},
          {"inv_vx", v.rho.inv_vx},
          {"spectral_radius", v.spectral_radius},
          {"vehicle_min_re", v.vehicle_min_re},
          {"hinf_norm_sq", FiniteOrNull(v.hinf_norm_sq)},
          {"peak_frequency", FiniteOrNull(v.peak_frequency)}};
}

Json VerificationJson(const VerificationReport& r) {
  Json j;
  j["passed"] = r.Passed();
  j["vertex_schur"] = r.vertex_schur;
  j["grid_schur"] = r.grid_schur;
  j["pole_ok"] = r.pole_ok;
  j["bounded_real_ok"] = r.bounded_real_ok;
  j["mu"] = r.mu ? Json(*r.mu) : Json(nullptr);
  j["zeta_p"] = r.zeta_p ? Json(*r.zeta_p) : Json(nullptr);
  j["unstable_speeds"] = r.unstable_speeds;
  Json vertices = Json::array();
  for (const auto& v : r.vertices) vertices.push_back(VertexCheckJson(v));
  j["vertices"] = vertices;
  double worst_rho = 0.0;
  double worst_re = std::numeric_limits<double>::infinity();
  for (const auto& g : r.grid) {
    worst_rho = std::max(worst_rho, g.spectral_radius);
    worst_re = std::min(worst_re, g.vehicle_min_re);
  }
  j["grid"] = {{"points", r.grid.size()},
               {"max_spectral_radius", FiniteOrNull(worst_rho)},
               {"min_vehicle_re", r.grid.empty() ? 0.0 : worst_re}};
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Scenario> ScenarioSpec::Expand() const {
  if (speeds.empty()) return {scenario};
  std::vector<Scenario> out;
  for (double v : speeds) {
    Scenario s = scenario;
    s.speed = SpeedProfile::Constant(v);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "@%g", v);
    s.name += buf;
    out.push_back(std::move(s));
  }
  return out;
}

ToolConfig ToolConfig::Defaults() {
  ToolConfig c;
  ScenarioSpec sweep;
  sweep.scenario.name = "lane-change";
  sweep.speeds = {5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
  c.scenarios.push_back(sweep);

  ScenarioSpec straight;
  straight.scenario.name = "straight";
  straight.scenario.path.kind = PathKind::kStraight;
  straight.scenario.duration = 10.0;
  c.scenarios.push_back(straight);

  ScenarioSpec ramp;
  ramp.scenario.name = "lane-change-ramp";
  ramp.scenario.path.length = 300.0;
  ramp.scenario.path.transition_start = 120.0;
  ramp.scenario.path.transition_length = 60.0;
  ramp.scenario.speed = SpeedProfile::Ramp(8.0, 20.0, 10.0);
  ramp.scenario.duration = 25.0;
  c.scenarios.push_back(ramp);
  return c;
}

void ToolConfig::Validate() const {
  try {
    vehicle.Validate();
    preview.Validate();
    weights.Validate();
  } catch (const Error& e) {
    Throw(ErrorKind::kConfig, e.what());
  }
  for (size_t i = 0; i < model_speeds.size(); ++i) {
    Require(std::isfinite(model_speeds[i]) && model_speeds[i] > 0.0,
            ErrorKind::kConfig, "model.speeds." + std::to_string(i) + ": must be positive");
  }
  const auto& s = synthesis;
  Require(s.feas_tol > 0.0, ErrorKind::kConfig, "synthesis.feas_tol: must be positive");
  Require(s.opt_tol > 0.0, ErrorKind::kConfig, "synthesis.opt_tol: must be positive");
  Require(s.max_iter > 0, ErrorKind::kConfig, "synthesis.max_iter: must be positive");
  Require(s.lq_tol > 0.0, ErrorKind::kConfig, "synthesis.lq_tol: must be positive");
  Require(s.lq_max_iter > 0, ErrorKind::kConfig, "synthesis.lq_max_iter: must be positive");
  Require(s.verify_grid >= 2, ErrorKind::kConfig, "synthesis.verify_grid: must be at least 2");
  Require(s.sweep_points >= 2, ErrorKind::kConfig,
          "synthesis.sweep_points: must be at least 2");
  Require(pole_region.zeta_p >= 0.0, ErrorKind::kConfig,
          "pole_region.zeta_p: must be nonnegative");
  std::set<std::string> names;
  for (size_t i = 0; i < scenarios.size(); ++i) {
    const std::string at = "scenarios." + std::to_string(i);
    const auto& sc = scenarios[i];
    Require(!sc.scenario.name.empty(), ErrorKind::kConfig, at + ".name: must not be empty");
    Require(names.insert(sc.scenario.name).second, ErrorKind::kConfig,
            at + ".name: duplicate scenario '" + sc.scenario.name + "'");
    Require(sc.scenario.duration >= 0.0, ErrorKind::kConfig,
            at + ".duration: must be nonnegative");
    Require(sc.scenario.initial_offset_std >= 0.0, ErrorKind::kConfig,
            at + ".initial_offset_std: must be nonnegative");
    for (double v : sc.speeds) {
      Require(std::isfinite(v) && v > 0.0, ErrorKind::kConfig,
              at + ".speeds: speeds must be positive");
    }
    try {
      sc.scenario.path.Validate();
      if (sc.speeds.empty()) sc.scenario.speed.Validate();
    } catch (const Error& e) {
      Throw(ErrorKind::kConfig, at + ": " + e.what());
    }
  }
  for (const auto& name : simulation.run) {
    Require(names.count(name) > 0, ErrorKind::kConfig,
            "simulation.run: scenario '" + name + "' is not defined");
  }
}

PlantFamilySpec ToolConfig::FamilySpec(bool uncertain) const {
  PlantFamilySpec spec;
  spec.vehicle = vehicle;
  spec.preview = preview;
  spec.weights = weights;
  spec.variant = variant;
  spec.family = uncertain ? ModelFamily::kUncertain : ModelFamily::kNominal;
  return spec;
}

SynthesisOptions ToolConfig::MakeSynthesisOptions() const {
  SynthesisOptions o;
  o.mode = synthesis.method == "lq" ? SynthesisMode::kCommonP
                                    : ParseSynthesisMode(synthesis.method);
  o.pole_region = pole_region.enabled;
  o.zeta_p = pole_region.zeta_p;
  o.scope = pole_region.scope;
  o.decouple_lyapunov = pole_region.decouple_lyapunov;
  o.interpolation = synthesis.interpolation;
  o.solver.feas_tol = synthesis.feas_tol;
  o.solver.opt_tol = synthesis.opt_tol;
  o.solver.max_iter = synthesis.max_iter;
  o.verify.grid_points = synthesis.verify_grid;
  o.verify.sweep_points = synthesis.sweep_points;
  return o;
}

DareOptions ToolConfig::MakeDareOptions() const {
  DareOptions o;
  o.tol = synthesis.lq_tol;
  o.max_iter = synthesis.lq_max_iter;
  return o;
}

SimOptions ToolConfig::MakeSimOptions() const {
  SimOptions o;
  o.vehicle = vehicle;
  o.preview = preview;
  o.variant = variant;
  o.frame = simulation.preview_frame;
  o.seed = seed;
  return o;
}

std::vector<Scenario> ToolConfig::SelectedScenarios() const {
  std::vector<Scenario> out;
  for (const auto& spec : scenarios) {
    const bool selected =
        simulation.run.empty() ||
        std::find(simulation.run.begin(), simulation.run.end(),
                  spec.scenario.name) != simulation.run.end();
    if (!selected) continue;
    for (auto& s : spec.Expand()) out.push_back(std::move(s));
  }
  return out;
}

ToolConfig ParseConfig(const std::string& json_text, bool require_vehicle) {
  return ConfigFromJson(Parse(json_text, "config"), require_vehicle);
}

ToolConfig LoadConfig(const std::string& path) {
  return ParseConfig(ReadTextFile(path), true);
}

std::string SerializeConfig(const ToolConfig& config) {
  return Dump(ConfigToJson(config));
}

ToolConfig ApplyOverride(const ToolConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
          "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  Json tree = ConfigToJson(config);
  Json* node = &tree;
  std::string walked;
  std::istringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    walked += (walked.empty() ? "" : ".") + part;
    if (node->is_object()) {
      Require(node->contains(part), ErrorKind::kConfig, walked + ": unknown key");
      node = &(*node)[part];
    } else if (node->is_array()) {
      char* end = nullptr;
      const long index = std::strtol(part.c_str(), &end, 10);
      Require(!part.empty() && *end == '\0' && index >= 0 &&
                  static_cast<size_t>(index) < node->size(),
              ErrorKind::kConfig, walked + ": index out of range");
      node = &(*node)[static_cast<size_t>(index)];
    } else {
      Throw(ErrorKind::kConfig, walked + ": not a section");
    }
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = value;
  return ConfigFromJson(tree, false);
}

// ---------------------------------------------------------------------------

std::string SerializeSchedule(const GainSchedule& schedule) {
  schedule.Validate();
  Json j;
  j["format"] = "lpvp-gain-schedule";
  j["version"] = 1;
  Json vertices = Json::array();
  for (const auto& v : schedule.polytope.vertices) vertices.push_back({v.x(), v.y()});
  j["polytope"] = {{"v_min", schedule.polytope.v_min},
                   {"v_max", schedule.polytope.v_max},
                   {"vertices", vertices}};
  j["interpolation"] = ToString(schedule.mode);
  j["n_v"] = schedule.n_v;
  j["n_r"] = schedule.n_r;
  Json gains = Json::array();
  for (const auto& v : schedule.vertices) {
    Json g;
    g["Kv"] = RowToJson(v.Kv);
    g["Kr"] = RowToJson(v.Kr);
    if (v.P) g["P"] = MatrixToJson(*v.P);
    if (v.Z) g["Z"] = MatrixToJson(*v.Z);
    gains.push_back(g);
  }
  j["vertices"] = gains;
  const auto& m = schedule.metadata;
  Json meta;
  meta["method"] = m.method;
  meta["mu"] = m.mu ? Json(*m.mu) : Json(nullptr);
  meta["norm_bound"] = m.mu ? Json(std::sqrt(*m.mu)) : Json(nullptr);
  meta["zeta_p"] = m.zeta_p ? Json(*m.zeta_p) : Json(nullptr);
  meta["pole_scope"] = m.pole_scope;
  meta["uncertain"] = m.uncertain;
  meta["stiffness_uncertainty"] = m.stiffness_uncertainty;
  meta["weights"] = {{"q1", m.q1}, {"q2", m.q2}, {"R", m.R}};
  meta["T"] = m.T;
  meta["model_variant"] = m.model_variant;
  meta["timestamp"] = m.timestamp;
  j["metadata"] = meta;
  return Dump(j);
}

GainSchedule ParseSchedule(const std::string& json_text) {
  const Json j = Parse(json_text, "schedule");
  const Node root(j, "");
  root.ExpectObject({"format", "version", "polytope", "interpolation", "n_v",
                     "n_r", "vertices", "metadata"});
  std::string format;
  root.String("format", &format);
  Require(format == "lpvp-gain-schedule", ErrorKind::kConfig,
          "format: not a gain schedule file");
  int version = 0;
  root.Integer("version", &version);
  Require(version == 1, ErrorKind::kConfig,
          "version: unsupported schedule version " + std::to_string(version));

  GainSchedule s;
  const Node poly = root.Object("polytope");
  poly.ExpectObject({"v_min", "v_max", "vertices"});
  poly.Number("v_min", &s.polytope.v_min, true);
  poly.Number("v_max", &s.polytope.v_max, true);
  const MatrixXd pv = MatrixFromJson(poly, "vertices");
  Require(pv.rows() == 3 && pv.cols() == 2, ErrorKind::kConfig,
          "polytope.vertices: expected three (Vx, 1/Vx) pairs");
  for (int i = 0; i < 3; ++i) s.polytope.vertices[i] = pv.row(i).transpose();
  root.Enum("interpolation", &s.mode, ParseInterpolationMode);
  root.Integer("n_v", &s.n_v);
  root.Integer("n_r", &s.n_r);

  const Json& list = j.at("vertices");
  Require(list.is_array(), ErrorKind::kConfig, "vertices: expected a list");
  for (size_t i = 0; i < list.size(); ++i) {
    const Node g(list[i], "vertices." + std::to_string(i));
    g.ExpectObject({"Kv", "Kr", "P", "Z"});
    VertexGain v;
    v.Kv = RowFromJson(g, "Kv");
    v.Kr = RowFromJson(g, "Kr");
    if (g.Has("P")) v.P = MatrixFromJson(g, "P");
    if (g.Has("Z")) v.Z = MatrixFromJson(g, "Z");
    s.vertices.push_back(std::move(v));
  }

  if (root.Has("metadata")) {
    const Node m = root.Object("metadata");
    m.ExpectObject({"method", "mu", "norm_bound", "zeta_p", "pole_scope",
                    "uncertain", "stiffness_uncertainty", "weights", "T",
                    "model_variant", "timestamp"});
    auto& meta = s.metadata;
    m.String("method", &meta.method);
    if (m.Has("mu") && !m.json().at("mu").is_null()) {
      double mu = 0.0;
      m.Number("mu", &mu);
      meta.mu = mu;
    }
    if (m.Has("zeta_p") && !m.json().at("zeta_p").is_null()) {
      double zeta = 0.0;
      m.Number("zeta_p", &zeta);
      meta.zeta_p = zeta;
    }
    m.String("pole_scope", &meta.pole_scope);
    m.Bool("uncertain", &meta.uncertain);
    m.Number("stiffness_uncertainty", &meta.stiffness_uncertainty);
    if (m.Has("weights")) {
      const Node w = m.Object("weights");
      w.ExpectObject({"q1", "q2", "R"});
      w.Number("q1", &meta.q1);
      w.Number("q2", &meta.q2);
      w.Number("R", &meta.R);
    }
    m.Number("T", &meta.T);
    m.String("model_variant", &meta.model_variant);
    m.String("timestamp", &meta.timestamp);
  }
  try {
    s.Validate();
  } catch (const Error& e) {
    Throw(ErrorKind::kConfig, std::string("schedule: ") + e.what());
  }
  return s;
}

GainSchedule LoadSchedule(const std::string& path) {
  return ParseSchedule(ReadTextFile(path));
}

void SaveSchedule(const GainSchedule& schedule, const std::string& path) {
  WriteTextFile(path, SerializeSchedule(schedule));
}

std::string SynthesisReportJson(const SynthesisResult& r) {
  Json j;
  j["method"] = r.schedule.metadata.method;
  j["uncertain"] = r.schedule.metadata.uncertain;
  j["mu"] = r.solution.mu;
  j["norm_bound"] = std::sqrt(r.solution.mu);
  j["solver"] = {{"status", sdp::ToString(r.solution.status)},
                 {"iterations", r.solution.iterations},
                 {"relative_gap", r.solution.relative_gap},
                 {"message", r.solution.message},
                 {"worst_block_eigenvalue", r.solution.worst_block_eigenvalue}};
  j["solve_seconds"] = r.solve_seconds;
  Json blocks = Json::array();
  for (const auto& [label, value] : r.solution.block_min_eigenvalues) {
    blocks.push_back({{"label", label}, {"min_eigenvalue", value}});
  }
  j["blocks"] = blocks;
  Json gains = Json::array();
  for (const auto& v : r.schedule.vertices) {
    gains.push_back({{"max_abs_Kv", v.Kv.cwiseAbs().maxCoeff()},
                     {"max_abs_Kr", v.Kr.size() ? v.Kr.cwiseAbs().maxCoeff() : 0.0}});
  }
  j["vertex_gains"] = gains;
  j["verification"] = VerificationJson(r.verification);
  j["warnings"] = r.warnings;
  return Dump(j);
}

std::string VerificationReportJson(const VerificationReport& report) {
  return Dump(VerificationJson(report));
}

std::string TraceSummaryJson(const TraceSummary& s) {
  Json j = {{"max_abs_error", s.max_abs_error},
            {"steady_state_error", s.steady_state_error},
            {"rms_error", s.rms_error},
            {"max_abs_steer", s.max_abs_steer},
            {"max_abs_yaw_rate", s.max_abs_yaw_rate}};
  return Dump(j);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out << text;
  Require(out.good(), ErrorKind::kIo, "failed writing '" + path + "'");
}

}  // namespace lpvp
