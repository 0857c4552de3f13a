#include "safeadapt/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace safeadapt {

using nlohmann::json;

namespace {

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put_vec(std::string& out, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += ',';
    put(out, v(i));
  }
}

void names(std::vector<std::string>& h, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i));
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<std::string> csv_header(const TrajectoryLog& log) {
  std::vector<std::string> h{"t"};
  if (log.rows.empty()) return h;
  const LogRow& r = log.rows.front();
  names(h, "x_p_", r.x_p.size());
  names(h, "x_m_", r.x_m.size());
  names(h, "x_d_", r.x_d.size());
  names(h, "u_", r.u.size());
  names(h, "u_sat_", r.u_sat.size());
  names(h, "r_star_", r.r_star.size());
  names(h, "r_s_", r.r_s.size());
  for (std::size_t j = 0; j < r.cert.h_p.size(); ++j) {
    const std::string s = std::to_string(j);
    h.insert(h.end(), {"h_p_" + s, "h_m_" + s, "gamma_" + s, "lambda_" + s});
  }
  h.insert(h.end(), {"V", "F_bar", "e_h", "filter_feasible", "safety_ok"});
  return h;
}

std::string csv_text(const TrajectoryLog& log) {
  std::string out;
  const auto header = csv_header(log);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const LogRow& r : log.rows) {
    put(out, r.t);
    put_vec(out, r.x_p);
    put_vec(out, r.x_m);
    put_vec(out, r.x_d);
    put_vec(out, r.u);
    put_vec(out, r.u_sat);
    put_vec(out, r.r_star);
    put_vec(out, r.r_s);
    const auto& c = r.cert;
    double f_max = 0.0;
    std::size_t worst = 0;
    for (std::size_t j = 0; j < c.h_p.size(); ++j) {
      for (double v : {c.h_p[j], c.h_m[j], c.gamma[j], r.lambdas(static_cast<Eigen::Index>(j))}) {
        out += ',';
        put(out, v);
      }
      if (j == 0 || c.F_bar[j] > f_max) f_max = c.F_bar[j];
      if (c.h_p[j] < c.h_p[worst]) worst = j;
    }
    out += ',';
    put(out, c.V);
    out += ',';
    put(out, f_max);
    out += ',';
    put(out, c.e_h.empty() ? 0.0 : c.e_h[worst]);
    out += c.filter_feasible ? ",1" : ",0";
    out += c.safety_ok ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

void write_csv(const TrajectoryLog& log, const std::string& path) { write_text(path, csv_text(log)); }

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw std::runtime_error("csv: row width does not match header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

json doa_json(const DoaReport& d) {
  return json{{"q_min", d.q_min},
              {"p_min", d.p_min},
              {"p_max", d.p_max},
              {"rho", d.rho},
              {"u_bar_max", d.u_bar_max},
              {"u_bar_min", d.u_bar_min},
              {"P_B", d.P_B},
              {"lambda_min", d.lambda_min},
              {"gamma_max", d.gamma_max},
              {"K_max", d.K_max},
              {"r_max", d.r_max},
              {"beta", d.beta},
              {"beta_note", "reported only; not used by either condition"},
              {"a0_sat", d.a0_sat},
              {"x_min", opt(d.x_min)},
              {"x_min_flag", d.x_min ? "ok" : "denominator nonpositive"},
              {"x_max", d.x_max},
              {"K_bar_max", opt(d.K_bar_max)},
              {"K_bar_max_reading", "numerator term read as 3*|theta_r*|*r_max + 2*u_bar_max"},
              {"norm_theta_x_star", d.norm_theta_x_star},
              {"norm_theta_r_star", d.norm_theta_r_star},
              {"V0", d.V0},
              {"x_p0_norm", d.x_p0_norm},
              {"condition1_ok", d.condition1_ok},
              {"condition2_ok", d.condition2_ok}};
}

json meta_json(const TrajectoryLog& log, const RunSummary& s, const json& config_echo) {
  json j;
  j["config"] = config_echo;
  j["dt"] = log.dt;
  j["delta_buffer"] = log.Delta;
  j["steps"] = log.rows.size();
  j["P"] = mat_json(log.P);
  j["theta_x_star"] = mat_json(log.gains.theta_x_star);
  j["theta_r_star"] = mat_json(log.gains.theta_r_star);
  j["infeasible_steps"] = log.infeasible_steps;
  j["clamped_reference_steps"] = log.clamped_steps;
  j["blew_up"] = log.blew_up;
  if (log.blew_up) {
    j["blowup_time"] = log.blowup_time;
    j["error"] = log.error;
  }
  j["summary"] = {{"min_h_p", s.min_h_p},
                  {"final_e_x", s.final_e_x},
                  {"final_e_u", s.final_e_u},
                  {"infeasible_steps", s.infeasible_steps},
                  {"v_descent_violations", s.v_descent_violations},
                  {"max_dV", s.max_dV},
                  {"max_error_dynamics_residual", s.max_err_dyn_residual}};
  j["notes"] = json::array({"r_s is held constant over each step (zero-order hold), so it is piecewise constant",
                            "F_bar is the maximum over barriers; e_h belongs to the barrier with the smallest h_p"});
  if (config_echo.is_object() && config_echo.value("scenario", "") == "missile") {
    j["notes"].push_back("angles in radians, rates in rad/s");
  }
  j["doa"] = log.doa ? doa_json(*log.doa) : json(nullptr);
  return j;
}

}  // namespace safeadapt
