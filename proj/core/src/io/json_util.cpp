#include "srdiag/io/json_util.hpp"

namespace srdiag {

std::optional<std::string> first_differing_field(const nlohmann::json& expected, const nlohmann::json& actual,
                                                 const std::string& prefix) {
  if (expected.is_object() && actual.is_object()) {
    for (const auto& [key, value] : expected.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (!actual.contains(key)) return path;
      if (auto diff = first_differing_field(value, actual.at(key), path)) return diff;
    }
    for (const auto& [key, value] : actual.items()) {
      if (!expected.contains(key)) return prefix.empty() ? key : prefix + "." + key;
    }
    return std::nullopt;
  }
  if (expected != actual) return prefix.empty() ? std::string("<root>") : prefix;
  return std::nullopt;
}

}  // namespace srdiag
