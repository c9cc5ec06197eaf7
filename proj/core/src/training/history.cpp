#include "srdiag/training/history.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "srdiag/error.hpp"
#include "srdiag/io/tensor_archive.hpp"

namespace srdiag {

void LossHistory::append(std::int64_t step, std::vector<double> values) {
  if (values.size() != columns.size()) throw InvalidArgument("loss history: row width does not match the columns");
  steps.push_back(step);
  rows.push_back(std::move(values));
}

std::vector<double> LossHistory::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("loss history: no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void LossHistory::write_csv(const std::filesystem::path& path, const std::string& step_name) const {
  std::ostringstream out;
  out << step_name;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << steps[i];
    for (double v : rows[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  write_file_bytes(path, out.str());
}

void to_json(nlohmann::json& j, const LossHistory& h) {
  j = {{"columns", h.columns}, {"steps", h.steps}, {"rows", h.rows}};
}

void from_json(const nlohmann::json& j, LossHistory& h) {
  h.columns = j.at("columns").get<std::vector<std::string>>();
  h.steps = j.at("steps").get<std::vector<std::int64_t>>();
  h.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  if (h.steps.size() != h.rows.size()) throw IoError("loss history: step and row counts differ");
}

}  // namespace srdiag
