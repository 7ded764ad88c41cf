#include "npbrake/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "npbrake/errors.hpp"

namespace npb {

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ParseJsonText(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    int line = 1, column = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    // drop the "[json.exception...] parse error at ...: " prefix
    const auto pos = what.find(": ");
    if (pos != std::string::npos) what = what.substr(pos + 2);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": malformed JSON (" << what << ")";
    Throw(ErrorCode::kConfig, msg.str());
  }
}

namespace {

Json LoadJson(const std::string& path) { return ParseJsonText(ReadTextFile(path), path); }

// Strict object access: every key must be consumed before Finish().
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) Fail("must be a JSON object");
  }

  bool Has(const char* key) const { return j_.contains(key); }

  double Number(const char* key, std::optional<double> fallback = std::nullopt) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) Fail(std::string("missing field '") + key + "'");
      return *fallback;
    }
    const Json& v = j_.at(key);
    if (!v.is_number()) Fail(std::string("field '") + key + "' must be a number");
    const double out = v.get<double>();
    if (!std::isfinite(out)) Fail(std::string("field '") + key + "' must be finite");
    return out;
  }

  int Integer(const char* key, std::optional<int> fallback = std::nullopt) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) Fail(std::string("missing field '") + key + "'");
      return *fallback;
    }
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) Fail(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
  }

  std::string String(const char* key, std::optional<std::string> fallback = std::nullopt) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) Fail(std::string("missing field '") + key + "'");
      return *fallback;
    }
    const Json& v = j_.at(key);
    if (!v.is_string()) Fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> Numbers(const char* key) {
    used_.insert(key);
    if (!j_.contains(key)) Fail(std::string("missing field '") + key + "'");
    return NumberArray(j_.at(key), key);
  }

  const Json* Child(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::vector<double> NumberArray(const Json& v, const std::string& key) const {
    if (!v.is_array()) Fail("field '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        Fail("field '" + key + "' must hold finite numbers");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) Fail("unknown field '" + it.key() + "'");
    }
  }

  [[noreturn]] void Fail(const std::string& what) const {
    Throw(ErrorCode::kConfig, where_ + ": " + what);
  }

  const std::string& where() const { return where_; }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

template <class F>
auto Guard(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kIo) throw;
    Throw(ErrorCode::kConfig, where + ": " + e.what());
  }
}

}  // namespace

RoadSurface ParseRoad(const Json& j) {
  Fields f(j, "road");
  f.String("name", "");
  const std::string type = f.String("type");
  const double half_width = f.Number("half_width");
  auto build = [&]() -> RoadSurface {
    if (type == "plane") {
      const double length = f.Number("length");
      f.Finish();
      return Guard("road", [&] { return RoadSurface::Plane(length, half_width); });
    }
    if (type == "banked_arc") {
      const double radius = f.Number("radius");
      const double bank = f.Number("bank_angle");
      const double arc = f.Number("arc_angle");
      f.Finish();
      return Guard("road", [&] { return RoadSurface::BankedArc(radius, bank, arc, half_width); });
    }
    if (type == "crest") {
      const double radius = f.Number("vertical_radius");
      const double length = f.Number("length");
      f.Finish();
      return Guard("road", [&] { return RoadSurface::Crest(radius, length, half_width); });
    }
    if (type == "ribbon") {
      const double length = f.Number("length");
      const Json* prof = f.Child("profiles");
      if (!prof) f.Fail("missing field 'profiles'");
      f.Finish();
      Fields pf(*prof, "road.profiles");
      RibbonProfiles p;
      p.knots_s = pf.Numbers("s");
      p.kappa_c = pf.Numbers("kappa");
      p.bank = pf.Numbers("bank");
      p.grade = pf.Numbers("grade");
      pf.Finish();
      return Guard("road", [&] { return RoadSurface::Ribbon(p, length, half_width); });
    }
    f.Fail("unknown road type '" + type + "' (plane, banked_arc, crest, ribbon)");
  };
  return build();
}

RoadSurface LoadRoad(const std::string& path) { return ParseRoad(LoadJson(path)); }

VehicleConfig ParseVehicle(const Json& j) {
  Fields f(j, "vehicle");
  f.String("name", "");
  VehicleConfig out;
  VehicleParams& p = out.params;
  p.mass = f.Number("mass", p.mass);
  p.inertia1 = f.Number("inertia1", p.inertia1);
  p.inertia2 = f.Number("inertia2", p.inertia2);
  p.inertia3 = f.Number("inertia3", p.inertia3);
  p.cg_height = f.Number("cg_height", p.cg_height);
  p.l_front = f.Number("l_front", p.l_front);
  p.l_rear = f.Number("l_rear", p.l_rear);
  p.t_front = f.Number("t_front", p.t_front);
  p.t_rear = f.Number("t_rear", p.t_rear);
  p.mu = f.Number("mu", p.mu);
  p.gravity = f.Number("gravity", p.gravity);
  p.k_drag = f.Number("k_drag", p.k_drag);
  p.k_lift = f.Number("k_lift", p.k_lift);
  if (const Json* t = f.Child("tire")) {
    Fields tf(*t, "vehicle.tire");
    out.tire.b = tf.Number("B", out.tire.b);
    out.tire.c = tf.Number("C", out.tire.c);
    out.tire.d = tf.Number("D", out.tire.d);
    out.tire.e = tf.Number("E", out.tire.e);
    tf.Finish();
  }
  if (const Json* a = f.Child("actuator")) {
    Fields af(*a, "vehicle.actuator");
    out.actuator.lag = af.Number("lag", out.actuator.lag);
    out.actuator.cap = af.Number("cap", out.actuator.cap);
    af.Finish();
    if (!(out.actuator.lag > 0.0) || !(out.actuator.cap >= 0.0)) {
      af.Fail("lag must be positive and cap nonnegative");
    }
  }
  f.Finish();
  if (!(out.tire.b > 0.0 && out.tire.c > 0.0 && out.tire.d > 0.0 && out.tire.e <= 1.0)) {
    f.Fail("tire coefficients need B, C, D > 0 and E <= 1");
  }
  Guard("vehicle", [&] {
    p.Validate();
    return 0;
  });
  return out;
}

VehicleConfig LoadVehicle(const std::string& path) { return ParseVehicle(LoadJson(path)); }

Expectation ScenarioConfig::Expected() const {
  if (expect) return *expect;
  return mode == SimMode::kSafetySystem ? Expectation::kComplete : Expectation::kAny;
}

ScenarioConfig ParseScenario(const Json& j, const std::string& base_dir) {
  Fields f(j, "scenario");
  f.String("name", "");
  ScenarioConfig sc;
  sc.v0 = f.Number("v0");
  sc.num_stages = f.Integer("N", sc.num_stages);
  sc.s_start = f.Number("s_start", 0.0);
  sc.s_end = f.Number("s_end");
  sc.lane_offset = f.Number("lane_offset", 0.0);
  if (const Json* b = f.Child("B_profile")) {
    if (b->is_number()) {
      sc.brake_profile = {b->get<double>()};
    } else {
      sc.brake_profile = f.NumberArray(*b, "B_profile");
    }
  }
  SimSettings& sim = sc.sim;
  sc.mode = Guard("scenario", [&] { return ParseSimMode(f.String("mode", "none")); });
  sim.t_max = f.Number("t_max", sim.t_max);
  sim.dt = f.Number("dt", sim.dt);
  sim.control_dt = f.Number("control_dt", sim.control_dt);
  sim.replan_dt = f.Number("replan_dt", sim.replan_dt);
  sim.horizon = f.Number("horizon", sim.horizon);
  sim.horizon_stages = f.Integer("horizon_stages", sim.horizon_stages);
  sim.driver_delay = f.Number("driver_delay", sim.driver_delay);
  sim.driver_brake = f.Number("driver_brake", sim.driver_brake);
  sim.intervention_threshold = f.Number("intervention_threshold", sim.intervention_threshold);
  sim.stop_speed = f.Number("stop_speed", sim.stop_speed);
  sim.plan_mu_scale = f.Number("plan_mu_scale", sim.plan_mu_scale);
  if (const Json* d = f.Child("driver")) {
    Fields df(*d, "scenario.driver");
    DriverParams& p = sim.driver;
    p.k_p = df.Number("k_p", p.k_p);
    p.k_i = df.Number("k_i", p.k_i);
    p.k_theta = df.Number("k_theta", p.k_theta);
    p.integral_limit = df.Number("integral_limit", p.integral_limit);
    p.max_angle = df.Number("max_angle", p.max_angle);
    p.max_rate = df.Number("max_rate", p.max_rate);
    df.Finish();
  }
  if (f.Has("expect")) {
    const std::string e = f.String("expect");
    if (e == "complete") {
      sc.expect = Expectation::kComplete;
    } else if (e == "depart") {
      sc.expect = Expectation::kDepart;
    } else if (e == "any") {
      sc.expect = Expectation::kAny;
    } else {
      f.Fail("expect must be complete, depart or any");
    }
  }
  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
  };
  sc.road = resolve(f.String("road", ""));
  sc.vehicle = resolve(f.String("vehicle", ""));
  f.Finish();

  if (!(sc.v0 >= 0.0)) f.Fail("v0 must be >= 0");
  if (sc.num_stages < 2) f.Fail("N must be >= 2");
  if (!(sc.s_end > sc.s_start)) f.Fail("s_end must exceed s_start");
  if (sc.brake_profile.size() != 1 && sc.brake_profile.size() != static_cast<std::size_t>(sc.num_stages)) {
    f.Fail("B_profile must be a number or an array of N numbers");
  }
  if (!(sim.dt > 0.0 && sim.dt <= 0.01)) f.Fail("dt must lie in (0, 0.01]");
  if (!(sim.control_dt >= sim.dt && sim.replan_dt >= sim.control_dt)) {
    f.Fail("need dt <= control_dt <= replan_dt");
  }
  if (!(sim.t_max > 0.0)) f.Fail("t_max must be positive");
  if (!(sim.horizon > 0.0) || sim.horizon_stages < 2) f.Fail("horizon must be positive with >= 2 stages");
  if (!(sim.plan_mu_scale > 0.0 && sim.plan_mu_scale <= 1.0)) f.Fail("plan_mu_scale must lie in (0, 1]");
  if (!(sim.driver_brake >= 0.0)) f.Fail("driver_brake must be >= 0");
  sim.v0 = sc.v0;
  sim.s_start = sc.s_start;
  sim.s_end = sc.s_end;
  sim.lane_offset = sc.lane_offset;
  return sc;
}

ScenarioConfig LoadScenario(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return ParseScenario(LoadJson(path), dir.empty() ? "." : dir);
}

SimSettings MakeSimSettings(const ScenarioConfig& scenario, const VehicleConfig& vehicle,
                            const ModelOptions& options) {
  SimSettings s = scenario.sim;
  s.tire = vehicle.tire;
  s.actuator = vehicle.actuator;
  s.model = options;
  return s;
}

namespace {

SparseMatrix ParseSparse(const Json* j, int default_cols, const char* name) {
  if (!j) {
    SparseMatrix m(0, default_cols);
    return m;
  }
  Fields f(*j, std::string("program.") + name);
  const int rows = f.Integer("rows");
  const int cols = f.Integer("cols");
  const Json* entries = f.Child("entries");
  f.Finish();
  if (rows < 0 || cols < 0) f.Fail("dimensions must be nonnegative");
  std::vector<Eigen::Triplet<double>> t;
  if (entries) {
    if (!entries->is_array()) f.Fail("entries must be an array of [row, col, value]");
    for (const Json& e : *entries) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_number()) {
        f.Fail("entries must be [row, col, value] triples");
      }
      const int r = e[0].get<int>(), c = e[1].get<int>();
      if (r < 0 || r >= rows || c < 0 || c >= cols) f.Fail("entry index out of range");
      t.emplace_back(r, c, e[2].get<double>());
    }
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json FromVector(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

ConicRequest ParseConicRequest(const Json& j) {
  Fields f(j, "program");
  ConicRequest req;
  ConicProgram& p = req.program;
  p.c = ToVector(f.Numbers("c"));
  const int n = static_cast<int>(p.c.size());
  p.a = ParseSparse(f.Child("A"), n, "A");
  p.b = f.Has("b") ? ToVector(f.Numbers("b")) : Eigen::VectorXd(0);
  p.g = ParseSparse(f.Child("G"), n, "G");
  p.h = f.Has("h") ? ToVector(f.Numbers("h")) : Eigen::VectorXd(0);
  p.objective_offset = f.Number("objective_offset", 0.0);
  if (const Json* cones = f.Child("cones")) {
    Fields cf(*cones, "program.cones");
    p.num_orthant = cf.Integer("l", 0);
    if (const Json* q = cf.Child("q")) {
      if (!q->is_array()) cf.Fail("q must be an array of cone sizes");
      for (const Json& d : *q) {
        if (!d.is_number_integer()) cf.Fail("q must hold integers");
        p.soc_dims.push_back(d.get<int>());
      }
    }
    cf.Finish();
  } else {
    p.num_orthant = static_cast<int>(p.h.size());
  }
  if (const Json* s = f.Child("settings")) {
    Fields sf(*s, "program.settings");
    req.settings.max_iter = sf.Integer("max_iter", req.settings.max_iter);
    req.settings.tol = sf.Number("tol", req.settings.tol);
    sf.Finish();
    if (req.settings.max_iter < 1 || !(req.settings.tol > 0.0)) {
      sf.Fail("max_iter must be >= 1 and tol > 0");
    }
  }
  f.Finish();
  Guard("program", [&] {
    p.Validate();
    return 0;
  });
  return req;
}

Json ConicSolutionToJson(const ConicSolution& s) {
  Json out;
  out["status"] = ToString(s.status);
  out["iterations"] = s.iterations;
  out["x"] = FromVector(s.x);
  out["y"] = FromVector(s.y);
  out["z"] = FromVector(s.z);
  out["s"] = FromVector(s.s);
  const ResidualReport& r = s.residuals;
  out["objective"] = r.objective;
  out["residuals"] = {{"equality", r.equality},         {"orthant", r.orthant},
                      {"soc", r.soc},                   {"dual_objective", r.dual_objective},
                      {"gap", r.gap},                   {"dual_residual", r.dual_residual},
                      {"dual_cone", r.dual_cone},       {"scaled_primal", r.scaled_primal},
                      {"scaled_gap", r.scaled_gap}};
  if (!s.message.empty()) out["message"] = s.message;
  return out;
}

}  // namespace npb
