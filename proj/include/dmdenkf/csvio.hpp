#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmdenkf/types.hpp"

namespace dmdenkf {

// Shortest decimal form that round-trips the double exactly.  Keeps output
// bytes deterministic across runs without printing 17 digits for 0.5.
std::string format_double(double v);

std::string csv_join(const std::vector<std::string>& fields);

// CSV file with a leading "# config: {...}" echo line so every artifact
// records the parameters that produced it.  Writes fail loudly.
class CsvFile {
 public:
  CsvFile(const std::string& path, const nlohmann::json& config_echo,
          const std::vector<std::string>& header);

  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t width_;
};

// JSON artifact carrying the config echo under a "config" key (a comment
// line would not survive a JSON parser).
void write_json_file(const std::string& path, const nlohmann::json& config_echo,
                     nlohmann::json payload);

}  // namespace dmdenkf
