#include "hiersim/io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hiersim/errors.hpp"

namespace hiersim {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw std::invalid_argument(what + ": rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw std::invalid_argument(what + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
  }
  return M;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void expect_schema(const json& j, const std::string& schema,
                   const std::string& path) {
  if (!j.contains("schema") || j["schema"] != schema) {
    throw Error(path + ": expected schema \"" + schema + "\"");
  }
}

LinearSystem system_from_json(const json& j, SystemRole role,
                              const std::string& what) {
  LinearSystem sys;
  sys.A = matrix_from_json(j.at("A"), what + ".A");
  sys.B = matrix_from_json(j.at("B"), what + ".B");
  sys.C = matrix_from_json(j.at("C"), what + ".C");
  sys.role = role;
  sys.validate(what);
  return sys;
}

json system_to_json(const LinearSystem& sys) {
  return json{{"A", matrix_to_json(sys.A)},
              {"B", matrix_to_json(sys.B)},
              {"C", matrix_to_json(sys.C)}};
}

Rect rect_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument(what + ": expected [xmin, ymin, xmax, ymax]");
  }
  return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>()};
}

json rect_to_json(const Rect& r) {
  return json::array({r.xmin, r.ymin, r.xmax, r.ymax});
}

}  // namespace

DisturbanceSpec DisturbanceConfig::spec(DisturbanceKind regime) const {
  DisturbanceSpec s;
  s.kind = regime;
  s.d_max = d_max;
  s.b_max = b_max;
  s.t_dwell = t_dwell;
  return s;
}

std::string kind_name(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::None: return "none";
    case DisturbanceKind::Bounded: return "bounded";
    case DisturbanceKind::Impulse: return "impulse";
  }
  return "none";
}

DisturbanceKind kind_from_name(const std::string& name) {
  if (name == "none") return DisturbanceKind::None;
  if (name == "bounded") return DisturbanceKind::Bounded;
  if (name == "impulse") return DisturbanceKind::Impulse;
  throw std::invalid_argument("unknown disturbance kind: " + name);
}

Scenario load_scenario(const std::string& path) {
  const json j = load_json_file(path);
  expect_schema(j, "hiersim-scenario-1", path);

  Scenario sc;
  sc.concrete = system_from_json(j.at("concrete"), SystemRole::Concrete, "concrete");
  sc.abstraction =
      system_from_json(j.at("abstract"), SystemRole::Abstract, "abstract");

  if (j.contains("synthesis")) {
    const json& s = j["synthesis"];
    if (s.contains("K")) sc.synthesis.K = matrix_from_json(s["K"], "synthesis.K");
    if (s.contains("lambda")) sc.synthesis.lambda = s["lambda"].get<double>();
    if (s.contains("P")) sc.synthesis.P = matrix_from_json(s["P"], "synthesis.P");
    if (s.contains("Q")) sc.synthesis.Q = matrix_from_json(s["Q"], "synthesis.Q");
    if (s.contains("R")) sc.synthesis.R = matrix_from_json(s["R"], "synthesis.R");
    if (s.contains("state_weight")) {
      sc.synthesis.state_weight =
          matrix_from_json(s["state_weight"], "synthesis.state_weight");
    }
    if (s.contains("input_weight")) {
      sc.synthesis.input_weight =
          matrix_from_json(s["input_weight"], "synthesis.input_weight");
    }
  }

  if (j.contains("disturbance")) {
    const json& d = j["disturbance"];
    DisturbanceConfig& cfg = sc.disturbance;
    cfg.kind = kind_from_name(d.value("kind", "none"));
    if (d.contains("B_d")) cfg.Bd = matrix_from_json(d["B_d"], "disturbance.B_d");
    cfg.d_max = d.value("d_max", 0.0);
    cfg.b_max = d.value("b_max", 0.0);
    cfg.t_dwell = d.value("t_dwell", 0.0);
    cfg.impulse_period = d.value("impulse_period", 0.0);
    cfg.impulse_start = d.value("impulse_start", 0.0);
    if (d.contains("impulse_times")) {
      cfg.impulse_times = d["impulse_times"].get<std::vector<double>>();
    }
    if (d.contains("signal")) {
      const json& s = d["signal"];
      cfg.signal_preset = s.value("preset", "constant");
      if (s.contains("value")) {
        cfg.signal_value = vector_from_json(s["value"], "disturbance.signal.value");
      }
      cfg.signal_hold = s.value("hold", 0.5);
    }
    sc.synthesis.Bd = cfg.Bd.size() > 0 ? std::optional<Matrix>(cfg.Bd)
                                        : std::nullopt;
  }

  if (j.contains("plan_regime")) {
    sc.plan_regime = kind_from_name(j["plan_regime"].get<std::string>());
    sc.plan_regime_set = true;
  }

  if (j.contains("workspace")) {
    const json& w = j["workspace"];
    Workspace ws;
    ws.bounds = rect_from_json(w.at("bounds"), "workspace.bounds");
    if (w.contains("obstacles")) {
      for (const auto& o : w["obstacles"]) {
        ws.obstacles.push_back(rect_from_json(o, "workspace.obstacles"));
      }
    }
    const Vector start = vector_from_json(w.at("start"), "workspace.start");
    const Vector goal = vector_from_json(w.at("goal"), "workspace.goal");
    if (start.size() != 2 || goal.size() != 2) {
      throw std::invalid_argument("workspace start/goal must be 2D");
    }
    ws.start = Point2(start(0), start(1));
    ws.goal = Point2(goal(0), goal(1));
    ws.goal_radius = w.value("goal_radius", 0.0);
    sc.workspace = ws;
  }

  if (j.contains("planner")) {
    sc.planner.n_samples = j["planner"].value("n_samples", 500);
    sc.planner.k_neighbors = j["planner"].value("k_neighbors", 10);
  }

  sc.u_max = j.value("u_max", 1.0);
  sc.ramp_time = j.value("ramp_time", 0.1);
  if (j.contains("x1_0")) sc.x1_0 = vector_from_json(j["x1_0"], "x1_0");
  if (j.contains("x2_0")) sc.x2_0 = vector_from_json(j["x2_0"], "x2_0");
  if (j.contains("u2")) {
    sc.u2_preset = j["u2"].value("preset", "zero");
    if (j["u2"].contains("value")) {
      sc.u2_value = vector_from_json(j["u2"]["value"], "u2.value");
    }
  }
  sc.dt = j.value("dt", 0.01);
  sc.T = j.value("T", 10.0);
  sc.seed = j.value("seed", std::uint64_t{1});
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  json j;
  j["schema"] = "hiersim-scenario-1";
  j["concrete"] = system_to_json(sc.concrete);
  j["abstract"] = system_to_json(sc.abstraction);

  json s = json::object();
  if (sc.synthesis.K) s["K"] = matrix_to_json(*sc.synthesis.K);
  if (sc.synthesis.lambda) s["lambda"] = *sc.synthesis.lambda;
  if (sc.synthesis.P) s["P"] = matrix_to_json(*sc.synthesis.P);
  if (sc.synthesis.Q) s["Q"] = matrix_to_json(*sc.synthesis.Q);
  if (sc.synthesis.R) s["R"] = matrix_to_json(*sc.synthesis.R);
  if (sc.synthesis.state_weight) {
    s["state_weight"] = matrix_to_json(*sc.synthesis.state_weight);
  }
  if (sc.synthesis.input_weight) {
    s["input_weight"] = matrix_to_json(*sc.synthesis.input_weight);
  }
  if (!s.empty()) j["synthesis"] = s;

  const DisturbanceConfig& cfg = sc.disturbance;
  json d;
  d["kind"] = kind_name(cfg.kind);
  if (cfg.Bd.size() > 0) d["B_d"] = matrix_to_json(cfg.Bd);
  if (cfg.d_max > 0.0) d["d_max"] = cfg.d_max;
  if (cfg.b_max > 0.0) d["b_max"] = cfg.b_max;
  if (cfg.t_dwell > 0.0) d["t_dwell"] = cfg.t_dwell;
  if (cfg.impulse_period > 0.0) d["impulse_period"] = cfg.impulse_period;
  if (cfg.impulse_start > 0.0) d["impulse_start"] = cfg.impulse_start;
  if (!cfg.impulse_times.empty()) d["impulse_times"] = cfg.impulse_times;
  if (cfg.kind == DisturbanceKind::Bounded) {
    json sig;
    sig["preset"] = cfg.signal_preset;
    if (cfg.signal_value.size() > 0) sig["value"] = vector_to_json(cfg.signal_value);
    sig["hold"] = cfg.signal_hold;
    d["signal"] = sig;
  }
  j["disturbance"] = d;

  if (sc.plan_regime_set) j["plan_regime"] = kind_name(sc.plan_regime);

  if (sc.workspace) {
    const Workspace& ws = *sc.workspace;
    json w;
    w["bounds"] = rect_to_json(ws.bounds);
    json obs = json::array();
    for (const Rect& o : ws.obstacles) obs.push_back(rect_to_json(o));
    w["obstacles"] = obs;
    w["start"] = json::array({ws.start.x(), ws.start.y()});
    w["goal"] = json::array({ws.goal.x(), ws.goal.y()});
    w["goal_radius"] = ws.goal_radius;
    j["workspace"] = w;
    j["planner"] = {{"n_samples", sc.planner.n_samples},
                    {"k_neighbors", sc.planner.k_neighbors}};
  }

  j["u_max"] = sc.u_max;
  j["ramp_time"] = sc.ramp_time;
  if (sc.x1_0) j["x1_0"] = vector_to_json(*sc.x1_0);
  if (sc.x2_0) j["x2_0"] = vector_to_json(*sc.x2_0);
  if (sc.u2_preset != "zero") {
    j["u2"] = {{"preset", sc.u2_preset}, {"value", vector_to_json(sc.u2_value)}};
  }
  j["dt"] = sc.dt;
  j["T"] = sc.T;
  j["seed"] = sc.seed;
  write_json_file(j, path);
}

void save_certificate(const RobustCertificate& cert, const std::string& path) {
  json j;
  j["schema"] = "hiersim-cert-1";
  j["K"] = matrix_to_json(cert.K);
  j["lambda"] = cert.lambda;
  j["M"] = matrix_to_json(cert.M);
  j["sqrtM"] = matrix_to_json(cert.sqrtM);
  j["lambda_max_M"] = cert.lambda_max_M;
  j["P"] = matrix_to_json(cert.P);
  j["Q"] = matrix_to_json(cert.Q);
  j["R"] = matrix_to_json(cert.R);
  j["c_dist"] = cert.c_dist;
  j["c_input"] = cert.c_input;
  write_json_file(j, path);
}

RobustCertificate load_certificate(const std::string& path) {
  const json j = load_json_file(path);
  expect_schema(j, "hiersim-cert-1", path);
  RobustCertificate cert;
  cert.K = matrix_from_json(j.at("K"), "cert.K");
  cert.lambda = j.at("lambda").get<double>();
  cert.M = matrix_from_json(j.at("M"), "cert.M");
  cert.sqrtM = matrix_from_json(j.at("sqrtM"), "cert.sqrtM");
  cert.lambda_max_M = j.at("lambda_max_M").get<double>();
  cert.P = matrix_from_json(j.at("P"), "cert.P");
  cert.Q = matrix_from_json(j.at("Q"), "cert.Q");
  cert.R = matrix_from_json(j.at("R"), "cert.R");
  cert.c_dist = j.at("c_dist").get<double>();
  cert.c_input = j.at("c_input").get<double>();
  return cert;
}

void save_path_file(const PathFile& pf, const std::string& path) {
  json j;
  j["schema"] = "hiersim-path-1";
  j["regime"] = kind_name(pf.regime);
  j["eps"] = pf.eps;
  j["u_max"] = pf.u_max;
  j["ramp_time"] = pf.ramp_time;
  j["total_time"] = pf.total_time;
  json wps = json::array();
  for (const Point2& w : pf.waypoints) wps.push_back(json::array({w.x(), w.y()}));
  j["waypoints"] = wps;
  write_json_file(j, path);
}

PathFile load_path_file(const std::string& path) {
  const json j = load_json_file(path);
  expect_schema(j, "hiersim-path-1", path);
  PathFile pf;
  pf.regime = kind_from_name(j.at("regime").get<std::string>());
  pf.eps = j.at("eps").get<double>();
  pf.u_max = j.at("u_max").get<double>();
  pf.ramp_time = j.at("ramp_time").get<double>();
  pf.total_time = j.at("total_time").get<double>();
  for (const auto& w : j.at("waypoints")) {
    pf.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
  }
  return pf;
}

void save_waypoints_csv(const std::vector<Point2>& waypoints,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "x,y\n";
  char buf[96];
  for (const Point2& w : waypoints) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", w.x(), w.y());
    out << buf;
  }
}

void save_report(const Report& report, const std::string& path) {
  json j;
  j["schema"] = "hiersim-report-1";
  j["eps"] = report.eps;
  j["tol"] = report.tol;
  j["max_error"] = report.max_error;
  j["margin"] = report.margin;
  json v = json::array();
  for (const auto& violation : report.violations) {
    v.push_back({{"t", violation.time}, {"error", violation.error}});
  }
  j["violations"] = v;
  j["runtime_s"] = report.runtime_s;
  j["regime"] = report.regime;
  json ev = json::array();
  for (const auto& e : report.impulse_events) {
    ev.push_back({{"t", e.time},
                  {"requested_t", e.requested_time},
                  {"V_before", e.v_before},
                  {"V_after", e.v_after}});
  }
  j["impulse_events"] = ev;
  j["max_snap_error"] = report.max_snap_error;
  if (report.goal_distance) j["goal_distance"] = *report.goal_distance;
  if (report.goal_radius) j["goal_radius"] = *report.goal_radius;
  if (report.goal_reached) j["goal_reached"] = *report.goal_reached;
  write_json_file(j, path);
}

Report load_report(const std::string& path) {
  const json j = load_json_file(path);
  expect_schema(j, "hiersim-report-1", path);
  Report report;
  report.eps = j.at("eps").get<double>();
  report.tol = j.at("tol").get<double>();
  report.max_error = j.at("max_error").get<double>();
  report.margin = j.at("margin").get<double>();
  for (const auto& v : j.at("violations")) {
    report.violations.push_back({0, v.at("t").get<double>(),
                                 v.at("error").get<double>()});
  }
  report.runtime_s = j.at("runtime_s").get<double>();
  report.regime = j.value("regime", "none");
  if (j.contains("impulse_events")) {
    for (const auto& e : j["impulse_events"]) {
      ImpulseEvent ev;
      ev.time = e.at("t").get<double>();
      ev.requested_time = e.at("requested_t").get<double>();
      ev.v_before = e.at("V_before").get<double>();
      ev.v_after = e.at("V_after").get<double>();
      report.impulse_events.push_back(ev);
    }
  }
  report.max_snap_error = j.value("max_snap_error", 0.0);
  if (j.contains("goal_distance")) report.goal_distance = j["goal_distance"].get<double>();
  if (j.contains("goal_radius")) report.goal_radius = j["goal_radius"].get<double>();
  if (j.contains("goal_reached")) report.goal_reached = j["goal_reached"].get<bool>();
  return report;
}

}  // namespace hiersim
