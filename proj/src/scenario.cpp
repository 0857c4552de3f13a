#include "safeadapt/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace safeadapt {

using nlohmann::json;

namespace {

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat to_mat(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ConfigError(name + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(name + ": expected nested row arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) {
      throw ConfigError(name + ": ragged matrix rows");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& e = r[static_cast<std::size_t>(k)];
      if (!e.is_number()) throw ConfigError(name + ": non-numeric entry");
      m(i, k) = e.get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError(name + ": non-finite entry");
  return m;
}

Vec to_vec(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ConfigError(name + ": expected a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(name + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

// Matrix, or a scalar meaning scalar * I of the given size.
Mat to_gain(const json& j, Eigen::Index size, const std::string& name) {
  if (j.is_number()) return j.get<double>() * Mat::Identity(size, size);
  return to_mat(j, name);
}

double to_num(const json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError(name + ": expected a number");
  return j.get<double>();
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

Box box_from_json(const json& j, Eigen::Index n, const std::string& name) {
  Box b{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
  if (j.is_null()) return b;
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) > n) {
    throw ConfigError(name + ": domain must list at most n [lo, hi] pairs");
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vec lh = to_vec(j[i], name);
    if (lh.size() != 2 || !(lh(0) < lh(1))) throw ConfigError(name + ": each domain entry is [lo, hi] with lo < hi");
    b.lo(static_cast<Eigen::Index>(i)) = lh(0);
    b.hi(static_cast<Eigen::Index>(i)) = lh(1);
  }
  return b;
}

const json kCircleKeys = {{"type", nullptr}, {"center", nullptr}, {"radius", nullptr}, {"domain", nullptr}};
const json kHalfspaceKeys = {{"type", nullptr}, {"alpha_max_deg", nullptr}, {"alpha_max", nullptr}};

BarrierSpec barrier_from_json(const json& j, Eigen::Index n, std::size_t idx) {
  const std::string name = "barriers[" + std::to_string(idx) + "]";
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ConfigError(name + ": expected an object with a string \"type\"");
  }
  const std::string type = j["type"];
  const json& allowed = type == "circle" ? kCircleKeys : kHalfspaceKeys;
  if (type != "circle" && type != "halfspace") throw ConfigError(name + ": unknown barrier type \"" + type + "\"");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw ConfigError("unknown key \"" + name + "." + k + "\"");
  }
  if (type == "circle") {
    if (n < 2) throw ConfigError(name + ": circle barrier needs at least two states");
    const Vec c = to_vec(j.at("center"), name + ".center");
    if (c.size() != 2) throw ConfigError(name + ".center: expected [x, y]");
    const double r = to_num(j.at("radius"), name + ".radius");
    if (!(r > 0.0)) throw ConfigError(name + ".radius must be positive");
    return circle_barrier(c(0), c(1), r, box_from_json(j.value("domain", json()), n, name + ".domain"));
  }
  double amax;
  if (j.contains("alpha_max_deg") && !j["alpha_max_deg"].is_null()) {
    amax = to_num(j["alpha_max_deg"], name + ".alpha_max_deg") * kDegToRad;
  } else if (j.contains("alpha_max") && !j["alpha_max"].is_null()) {
    amax = to_num(j["alpha_max"], name + ".alpha_max");
  } else {
    throw ConfigError(name + ": halfspace barrier needs alpha_max_deg or alpha_max");
  }
  return halfspace_barrier(amax, static_cast<std::size_t>(n));
}

json obstacle_preset() {
  const Mat id = Mat::Identity(2, 2);
  json j;
  j["scenario"] = "obstacle";
  j["mode"] = "orm";
  j["ebr"] = true;
  j["dt"] = 5e-3;
  j["t_end"] = 30.0;
  j["gamma0"] = 5.0;
  j["epsilon"] = 5.0;
  j["delta_buffer"] = nullptr;
  j["r_max"] = nullptr;
  j["K_max"] = nullptr;
  j["seed"] = 0;
  j["gains"] = {{"Gamma_x", mat_json(10.0 * id)},
                {"Gamma_r", mat_json(10.0 * id)},
                {"Gamma_lambda", mat_json(10.0 * id)},
                {"Q", mat_json(id)}};
  j["plant"] = {{"A_p", mat_json(-2.0 * id)}, {"B_p", mat_json(0.8 * id)}, {"Lambda", mat_json(id)},
                {"u0", 10.0}, {"u0_deg", nullptr}};
  j["refmodel"] = {{"A_m", mat_json(-id)}, {"B_m", mat_json(-id)}, {"L", mat_json(id)}, {"e0", 1.0},
                   {"du0", nullptr}};
  j["barriers"] = json::array(
      {{{"type", "circle"}, {"center", {0.0, 0.0}}, {"radius", 1.0}, {"domain", {{-4.0, 4.0}, {-4.0, 4.0}}}}});
  j["x_d"] = {{"kind", "constant"}, {"target", {2.0, 2.0}}, {"alpha_deg", nullptr}, {"tau", nullptr},
              {"t_step", nullptr}};
  j["initial"] = {{"x_p", {-2.5, 0.5}}, {"x_m", nullptr}, {"theta_x", nullptr}, {"theta_r", nullptr},
                  {"lambda_hat", nullptr}};
  return j;
}

json missile_preset() {
  const MissileModel mm = missile_model();
  json j;
  j["scenario"] = "missile";
  j["mode"] = "ccrm";
  j["ebr"] = true;
  j["dt"] = 1e-3;
  j["t_end"] = 15.0;
  j["gamma0"] = 100.0;
  j["epsilon"] = 300.0;
  j["delta_buffer"] = 0.01;
  j["r_max"] = 1.0;
  j["K_max"] = nullptr;
  j["seed"] = 0;
  j["gains"] = {{"Gamma_x", mat_json(400.0 * Mat::Identity(2, 2))},
                {"Gamma_r", mat_json(300.0 * Mat::Identity(1, 1))},
                {"Gamma_lambda", mat_json(400.0 * Mat::Identity(1, 1))},
                {"Q", mat_json(Mat::Identity(2, 2))}};
  j["plant"] = {{"A_p", mat_json(mm.A_p)}, {"B_p", mat_json(mm.B_p)}, {"Lambda", mat_json(mm.Lambda)},
                {"u0", nullptr}, {"u0_deg", 10.0}};
  j["refmodel"] = {{"A_m", mat_json(mm.A_m)}, {"B_m", mat_json(mm.B_m)}, {"L", mat_json(Mat::Identity(2, 2))},
                   {"e0", 1.0}, {"du0", nullptr}};
  j["barriers"] = json::array({{{"type", "halfspace"}, {"alpha_max_deg", 4.0}}});
  j["x_d"] = {{"kind", "step"}, {"target", nullptr}, {"alpha_deg", 5.0}, {"tau", nullptr}, {"t_step", nullptr}};
  j["initial"] = {{"x_p", {0.0, 0.0}}, {"x_m", nullptr}, {"theta_x", nullptr},
                  {"theta_r", mat_json(mm.theta_r_nominal)}, {"lambda_hat", nullptr}};
  return j;
}

}  // namespace

MissileModel missile_model(double delta_A, double lambda_delta) {
  MissileModel m;
  m.A_p_nominal.resize(2, 2);
  m.A_p_nominal << -0.8757, 1.0, -68.9210, 0.0;
  m.A_p = delta_A * m.A_p_nominal;
  m.B_p.resize(2, 1);
  m.B_p << -0.1531, -74.2313;
  m.Lambda = Mat::Constant(1, 1, lambda_delta);
  m.A_m_printed.resize(2, 2);
  m.A_m_printed << -0.8707, 0.9927, -65.5877, -3.5903;
  m.B_m_printed.resize(2, 2);
  m.B_m_printed << 0.1395, -0.0364, 68.2893, -17.7947;

  const Mat b = m.B_p * m.Lambda;
  const Mat proj = b * pinv(b);
  m.A_m = m.A_p + proj * (m.A_m_printed - m.A_p);
  m.B_m = proj * m.B_m_printed.col(0);

  // Equilibrium of x' = A_m x + B_m r per unit r, rescaled to unit alpha.
  const Vec eq = -m.A_m.fullPivLu().solve(m.B_m.col(0));
  m.trim_direction = eq / eq(0);

  const Mat bn_pinv = pinv(m.B_p);
  m.theta_x_nominal = bn_pinv * (m.A_m - m.A_p_nominal);
  m.theta_r_nominal = bn_pinv * m.B_m;
  return m;
}

json preset_json(const std::string& name) {
  if (name == "obstacle") return obstacle_preset();
  if (name == "missile") return missile_preset();
  throw ConfigError("unknown scenario \"" + name + "\" (expected obstacle or missile)");
}

void deep_merge(json& base, const json& over, const std::string& path) {
  if (!over.is_object()) throw ConfigError("config" + (path.empty() ? "" : " at " + path) + " must be an object");
  for (const auto& [k, v] : over.items()) {
    const std::string p = path.empty() ? k : path + "." + k;
    if (!base.contains(k)) throw ConfigError("unknown key \"" + p + "\"");
    json& dst = base[k];
    if (dst.is_object() && v.is_object()) {
      deep_merge(dst, v, p);
    } else {
      dst = v;
    }
  }
}

SimConfig config_from_json(const json& j) {
  try {
    SimConfig c;
    c.name = j.at("scenario").get<std::string>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "orm") {
      c.mode = Mode::kOrm;
    } else if (mode == "ccrm") {
      c.mode = Mode::kCcrm;
    } else {
      throw ConfigError("mode must be \"orm\" or \"ccrm\", got \"" + mode + "\"");
    }
    c.ebr = j.at("ebr").get<bool>();
    c.dt = to_num(j.at("dt"), "dt");
    c.t_end = to_num(j.at("t_end"), "t_end");
    c.gamma0 = to_num(j.at("gamma0"), "gamma0");
    c.epsilon = to_num(j.at("epsilon"), "epsilon");
    if (!j.at("delta_buffer").is_null()) c.Delta = to_num(j["delta_buffer"], "delta_buffer");
    if (!j.at("r_max").is_null()) c.r_max = to_num(j["r_max"], "r_max");
    if (!j.at("K_max").is_null()) c.K_max = to_num(j["K_max"], "K_max");
    c.seed = j.at("seed").get<std::uint64_t>();

    const json& pj = j.at("plant");
    c.plant.A_p = to_mat(pj.at("A_p"), "plant.A_p");
    c.plant.B_p = to_mat(pj.at("B_p"), "plant.B_p");
    c.plant.Lambda = to_mat(pj.at("Lambda"), "plant.Lambda");
    if (!pj.at("u0_deg").is_null()) {
      c.plant.u0 = to_num(pj["u0_deg"], "plant.u0_deg") * kDegToRad;
    } else if (!pj.at("u0").is_null()) {
      c.plant.u0 = to_num(pj["u0"], "plant.u0");
    }
    const auto n = c.plant.A_p.rows();
    const auto m = c.plant.B_p.cols();

    const json& rj = j.at("refmodel");
    c.ref.A_m = to_mat(rj.at("A_m"), "refmodel.A_m");
    c.ref.B_m = to_mat(rj.at("B_m"), "refmodel.B_m");
    c.ref.L = to_mat(rj.at("L"), "refmodel.L");
    c.ref.e0 = to_num(rj.at("e0"), "refmodel.e0");
    c.ref.du0 = rj.at("du0").is_null() ? c.plant.u0 : to_num(rj["du0"], "refmodel.du0");
    const auto q = c.ref.B_m.cols();

    const json& gj = j.at("gains");
    c.Gamma_x = to_gain(gj.at("Gamma_x"), n, "gains.Gamma_x");
    c.Gamma_r = to_gain(gj.at("Gamma_r"), q, "gains.Gamma_r");
    c.Gamma_lambda = to_gain(gj.at("Gamma_lambda"), m, "gains.Gamma_lambda");
    c.Q = to_gain(gj.at("Q"), n, "gains.Q");

    const json& bj = j.at("barriers");
    if (!bj.is_array()) throw ConfigError("barriers: expected an array");
    for (std::size_t i = 0; i < bj.size(); ++i) c.barriers.push_back(barrier_from_json(bj[i], n, i));

    const json& xj = j.at("x_d");
    if (xj.is_array()) {
      c.traj.kind = TrajectoryKind::kConstant;
      c.traj.target = to_vec(xj, "x_d");
    } else {
      const std::string kind = xj.at("kind").get<std::string>();
      if (kind == "constant") {
        c.traj.kind = TrajectoryKind::kConstant;
      } else if (kind == "step") {
        c.traj.kind = TrajectoryKind::kStep;
      } else if (kind == "smoothed_step") {
        c.traj.kind = TrajectoryKind::kSmoothedStep;
      } else {
        throw ConfigError("x_d.kind must be constant, step or smoothed_step");
      }
      if (!xj.at("target").is_null()) {
        c.traj.target = to_vec(xj["target"], "x_d.target");
      } else if (!xj.at("alpha_deg").is_null()) {
        // Angle-of-attack command: x_d is the reference-model equilibrium for that command.
        const Vec eq = -c.ref.A_m.fullPivLu().solve(c.ref.B_m.col(0));
        if (std::abs(eq(0)) < 1e-12) throw ConfigError("x_d.alpha_deg: reference model has no alpha response");
        c.traj.target = (to_num(xj["alpha_deg"], "x_d.alpha_deg") * kDegToRad / eq(0)) * eq;
      } else {
        throw ConfigError("x_d needs target or alpha_deg");
      }
      c.traj.tau = xj.at("tau").is_null() ? 0.2 : to_num(xj["tau"], "x_d.tau");
      c.traj.t_step = xj.at("t_step").is_null() ? 0.0 : to_num(xj["t_step"], "x_d.t_step");
    }

    const json& ij = j.at("initial");
    c.x_p0 = ij.at("x_p").is_null() ? Vec::Zero(n) : to_vec(ij["x_p"], "initial.x_p");
    c.x_m0 = ij.at("x_m").is_null() ? c.x_p0 : to_vec(ij["x_m"], "initial.x_m");
    c.theta_x0 = ij.at("theta_x").is_null() ? Mat::Zero(m, n) : to_mat(ij["theta_x"], "initial.theta_x");
    c.theta_r0 = ij.at("theta_r").is_null() ? Mat::Zero(m, q) : to_mat(ij["theta_r"], "initial.theta_r");
    c.lambda_hat0 =
        ij.at("lambda_hat").is_null() ? Mat::Zero(m, m) : to_mat(ij["lambda_hat"], "initial.lambda_hat");

    c.validate();
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

SimConfig preset(const std::string& name) { return config_from_json(preset_json(name)); }

json merged_config_text(const std::string& text, const std::optional<std::string>& scenario) {
  json over;
  try {
    over = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!over.is_object()) throw ConfigError("config must be a JSON object");
  std::string name;
  if (scenario) {
    name = *scenario;
  } else if (over.contains("scenario") && over["scenario"].is_string()) {
    name = over["scenario"];
  } else {
    throw ConfigError("no scenario given (use --scenario or a \"scenario\" key)");
  }
  json base = preset_json(name);
  if (over.contains("scenario")) over.erase("scenario");
  try {
    deep_merge(base, over);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    const auto q1 = msg.find('"');
    const auto q2 = msg.find('"', q1 + 1);
    if (q1 != std::string::npos && q2 != std::string::npos) {
      std::string key = msg.substr(q1 + 1, q2 - q1 - 1);
      key = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
      const auto pos = text.find("\"" + key + "\"");
      if (pos != std::string::npos) msg += " at line " + std::to_string(line_of_offset(text, pos));
    }
    throw ConfigError(msg);
  }
  return base;
}

SimConfig config_load(const std::string& path, const std::optional<std::string>& scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(merged_config_text(ss.str(), scenario));
}

std::vector<InitialCondition> load_initial_conditions(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open initial-condition list " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (j.is_object() && j.contains("random")) {
    const json& r = j["random"];
    const Vec lo = to_vec(r.at("lo"), "random.lo");
    const Vec hi = to_vec(r.at("hi"), "random.hi");
    if (lo.size() != hi.size()) throw ConfigError("random: lo and hi differ in size");
    const int count = r.at("count").get<int>();
    std::mt19937_64 rng(seed);
    std::vector<InitialCondition> out;
    for (int k = 0; k < count; ++k) {
      Vec x(lo.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
      out.push_back(InitialCondition{x, std::nullopt});
    }
    return out;
  }
  if (j.is_object() && j.contains("initial_conditions")) j = j["initial_conditions"];
  if (!j.is_array()) throw ConfigError("initial-condition list must be an array");
  std::vector<InitialCondition> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = "initial_conditions[" + std::to_string(i) + "]";
    InitialCondition ic;
    if (j[i].is_array()) {
      ic.x_p = to_vec(j[i], name);
    } else if (j[i].is_object()) {
      for (const auto& [k, v] : j[i].items()) {
        if (k != "x_p" && k != "x_m") throw ConfigError("unknown key \"" + name + "." + k + "\"");
      }
      ic.x_p = to_vec(j[i].at("x_p"), name + ".x_p");
      if (j[i].contains("x_m")) ic.x_m = to_vec(j[i]["x_m"], name + ".x_m");
    } else {
      throw ConfigError(name + ": expected an array or an object");
    }
    out.push_back(std::move(ic));
  }
  return out;
}

std::vector<InitialCondition> ring_initial_conditions(double cx, double cy, double radius, int count) {
  std::vector<InitialCondition> out;
  for (int k = 0; k < count; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / count;
    Vec x(2);
    x << cx + radius * std::cos(a), cy + radius * std::sin(a);
    out.push_back(InitialCondition{x, std::nullopt});
  }
  return out;
}

}  // namespace safeadapt
