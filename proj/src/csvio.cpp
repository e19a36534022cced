#include "dmdenkf/csvio.hpp"

#include <cmath>
#include <cstdio>

namespace dmdenkf {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += fields[i];
  }
  return line;
}

CsvFile::CsvFile(const std::string& path, const nlohmann::json& config_echo,
                 const std::vector<std::string>& header)
    : out_(path), path_(path), width_(header.size()) {
  if (!out_) throw DataError("cannot write '" + path + "'");
  out_ << "# config: " << config_echo.dump() << "\n";
  out_ << csv_join(header) << "\n";
}

void CsvFile::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw std::invalid_argument("csv row width " + std::to_string(fields.size()) +
                                " != header width " + std::to_string(width_));
  out_ << csv_join(fields) << "\n";
}

void CsvFile::close() {
  out_.close();
  if (out_.fail()) throw DataError("write failed for '" + path_ + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& config_echo,
                     nlohmann::json payload) {
  payload["config"] = config_echo;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << payload.dump(2) << "\n";
  out.close();
  if (out.fail()) throw DataError("write failed for '" + path + "'");
}

}  // namespace dmdenkf
