#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "safeadapt/scenario.hpp"
#include "safeadapt/simulator.hpp"
#include "safeadapt/trajectory_io.hpp"

namespace sa = safeadapt;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitBlowup = 2;
constexpr int kExitInfeasible = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sa::ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe adaptive control simulator"};
  app.require_subcommand(1);
  auto* sim = app.add_subcommand("simulate", "run a scenario and write trajectory logs");

  std::string scenario;
  std::string config_path;
  std::string ebr;
  std::string mode;
  std::string out_dir;
  std::string sweep_path;
  bool strict = false;
  std::optional<std::uint64_t> seed;

  sim->add_option("--scenario", scenario, "preset name: obstacle or missile");
  sim->add_option("--config", config_path, "JSON overrides merged onto the preset");
  sim->add_option("--ebr", ebr, "error-based relaxation")->check(CLI::IsMember({"on", "off"}));
  sim->add_option("--mode", mode, "reference model")->check(CLI::IsMember({"orm", "ccrm"}));
  sim->add_option("--out", out_dir, "output directory (default $SAFEADAPT_OUT_DIR or runs)");
  sim->add_option("--sweep", sweep_path, "JSON list of initial conditions");
  sim->add_flag("--strict-safety", strict, "exit 3 if the safety filter is ever infeasible");
  sim->add_option("--seed", seed, "seed for randomly sampled initial conditions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("SAFEADAPT_OUT_DIR");
    out_dir = env != nullptr && *env != '\0' ? env : "runs";
  }

  json merged;
  sa::SimConfig cfg;
  std::vector<sa::InitialCondition> ics;
  try {
    const std::optional<std::string> name = scenario.empty() ? std::nullopt : std::optional<std::string>(scenario);
    if (!config_path.empty()) {
      merged = sa::merged_config_text(read_file(config_path), name);
    } else if (name) {
      merged = sa::preset_json(*name);
    } else {
      throw sa::ConfigError("--scenario or --config is required");
    }
    if (!ebr.empty()) merged["ebr"] = ebr == "on";
    if (!mode.empty()) merged["mode"] = mode;
    if (seed) merged["seed"] = *seed;
    cfg = sa::config_from_json(merged);
    if (!sweep_path.empty()) {
      ics = sa::load_initial_conditions(sweep_path, cfg.seed);
    } else {
      ics.push_back(sa::InitialCondition{cfg.x_p0, cfg.x_m0});
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  const auto results = sa::sweep(cfg, ics);
  const bool missile = cfg.name == "missile";
  bool blew_up = false;
  bool infeasible = false;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& res = results[k];
    if (!res.ok && res.log.rows.empty()) {
      std::cerr << "run " << k << ": " << res.error << '\n';
      if (res.error.find("blow-up") != std::string::npos) {
        blew_up = true;
        continue;
      }
      return kExitConfig;
    }
    const sa::RunSummary s = sa::summarize(res.log);
    json echo = merged;
    echo["initial"]["x_p"] = json(std::vector<double>(ics[k].x_p.data(), ics[k].x_p.data() + ics[k].x_p.size()));
    const std::string base = out_dir + "/";
    try {
      sa::write_csv(res.log, base + "run_" + std::to_string(k) + ".csv");
      sa::write_text(base + "meta_" + std::to_string(k) + ".json",
                     sa::meta_json(res.log, s, echo).dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return kExitConfig;
    }

    std::cout << "run " << k << ": min_h=" << fmt(s.min_h_p) << " final_e_x=" << fmt(s.final_e_x)
              << " infeasible_steps=" << s.infeasible_steps << " v_descent_violations=" << s.v_descent_violations;
    if (missile) {
      double a_max = -1e300;
      double d_max = 0.0;
      for (const auto& r : res.log.rows) {
        a_max = std::max(a_max, r.x_p(0));
        d_max = std::max(d_max, r.u_sat.lpNorm<Eigen::Infinity>());
      }
      std::cout << " max_alpha_deg=" << fmt(a_max / sa::kDegToRad) << " max_abs_delta_deg=" << fmt(d_max / sa::kDegToRad);
    }
    if (res.log.blew_up) std::cout << " blow_up_t=" << fmt(res.log.blowup_time);
    std::cout << '\n';
    blew_up = blew_up || res.log.blew_up;
    infeasible = infeasible || res.log.infeasible_steps > 0;
  }
  if (blew_up) return kExitBlowup;
  if (strict && infeasible) return kExitInfeasible;
  return 0;
}
