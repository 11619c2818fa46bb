#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace cirsplit {

/// Parse the TOML subset used by the shipped configs into a JSON object:
/// dotted table headers, key = value lines with strings, numbers, booleans
/// and flat arrays, '#' comments. Throws config_error on anything else.
nlohmann::json parse_toml_lite(const std::string& text);

} // namespace cirsplit
