#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "safeadapt/simulator.hpp"

namespace safeadapt {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> csv_header(const TrajectoryLog& log);

/// One row per log step, numbers in 17 significant digits.
std::string csv_text(const TrajectoryLog& log);
void write_csv(const TrajectoryLog& log, const std::string& path);

CsvTable parse_csv(const std::string& text);

nlohmann::json doa_json(const DoaReport& d);
nlohmann::json meta_json(const TrajectoryLog& log, const RunSummary& s, const nlohmann::json& config_echo);

void write_text(const std::string& path, const std::string& text);

}  // namespace safeadapt
