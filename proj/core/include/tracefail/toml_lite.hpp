#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace tracefail {

/// Parses the subset of TOML used by campaign spec files into a JSON object:
/// `key = value` pairs, `[table]` and `[[array.of.tables]]` headers (single
/// names only), basic strings, integers, floats, booleans, arrays (which may
/// span lines) and inline tables. Dotted keys, dates and literal strings are
/// rejected. Errors carry the line number.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);

}  // namespace tracefail
