#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace srdiag {

/// Dotted path of the first field where `actual` differs from `expected`, if any.
std::optional<std::string> first_differing_field(const nlohmann::json& expected, const nlohmann::json& actual,
                                                 const std::string& prefix = "");

}  // namespace srdiag
