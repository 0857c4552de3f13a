#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "safeadapt/simulator.hpp"

namespace safeadapt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

/// Missile pitch model pieces. The reference model is the printed LQR model
/// projected onto the input range of the true plant so that matching holds
/// exactly; r is the scalar angle-of-attack command.
struct MissileModel {
  Mat A_p_nominal;
  Mat A_p;
  Mat B_p;
  Mat Lambda;
  Mat A_m_printed;
  Mat B_m_printed;
  Mat A_m;
  Mat B_m;
  Vec trim_direction;  // x_d per unit alpha command (alpha component = 1)
  Mat theta_x_nominal;  // gains matching the nominal plant
  Mat theta_r_nominal;
};

MissileModel missile_model(double delta_A = 1.2, double lambda_delta = 0.6);

/// Preset as a JSON document; every overridable key is present (null means
/// "derive the default"). Throws ConfigError for unknown names.
nlohmann::json preset_json(const std::string& name);

/// Recursively merges `over` into `base`. Keys absent from `base` objects are
/// rejected with their JSON path; arrays and scalars are replaced.
void deep_merge(nlohmann::json& base, const nlohmann::json& over, const std::string& path = "");

SimConfig config_from_json(const nlohmann::json& j);

SimConfig preset(const std::string& name);

/// Loads overrides onto a preset. `scenario` (when given) wins over the file's
/// "scenario" key. Parse and key errors report the offending line.
SimConfig config_load(const std::string& path, const std::optional<std::string>& scenario = std::nullopt);

/// Same as config_load, from text already in memory.
nlohmann::json merged_config_text(const std::string& text, const std::optional<std::string>& scenario);

/// Accepts an array of x_p arrays or {x_p, x_m} objects, optionally wrapped in
/// {"initial_conditions": [...]}, or {"random": {"count", "lo", "hi"}} sampled
/// uniformly with the given seed.
std::vector<InitialCondition> load_initial_conditions(const std::string& path, std::uint64_t seed = 0);

/// count points on a circle, the k-th at angle 2 pi k / count.
std::vector<InitialCondition> ring_initial_conditions(double cx, double cy, double radius, int count);

}  // namespace safeadapt
