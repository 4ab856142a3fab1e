// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace osc::fixtures {

inline std::string data_path(const std::string& name) { return std::string(OSC_TEST_DATA) + "/" + name; }

inline std::vector<nlohmann::json> read_jsonl(const std::string& name) {
  std::ifstream in(data_path(name));
  std::vector<nlohmann::json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

inline nlohmann::json read_json(const std::string& name) {
  std::ifstream in(data_path(name));
  return nlohmann::json::parse(in);
}

inline std::vector<std::vector<std::string>> read_tsv(const std::string& name) {
  std::ifstream in(data_path(name));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (!line.empty() && line.back() == '\t') cells.emplace_back();
    if (line.empty()) cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace osc::fixtures
