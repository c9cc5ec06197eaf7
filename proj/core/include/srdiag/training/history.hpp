#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace srdiag {

/// Table of loss components indexed by step (iteration or epoch).
struct LossHistory {
  std::vector<std::string> columns;
  std::vector<std::int64_t> steps;
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  void append(std::int64_t step, std::vector<double> values);
  /// Column values in order of appearance.
  std::vector<double> column(const std::string& name) const;

  /// Header "<step_name>,<columns...>", one line per row, values printed with round-trip precision.
  void write_csv(const std::filesystem::path& path, const std::string& step_name = "iteration") const;

  bool operator==(const LossHistory&) const = default;
};

void to_json(nlohmann::json& j, const LossHistory& h);
void from_json(const nlohmann::json& j, LossHistory& h);

}  // namespace srdiag
