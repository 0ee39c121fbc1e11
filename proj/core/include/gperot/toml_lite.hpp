#pragma once

#include <string>

#include <json.hpp>

namespace gperot::toml {

/// Parses the TOML subset used by configuration files: comments, [tables],
/// [[arrays of tables]], key = value pairs with strings, integers, floats,
/// booleans, (nested, multi-line) arrays and inline tables. Throws ConfigError
/// with the line number on malformed input.
nlohmann::json parse(const std::string& text);

/// Writes scalars first, then sub-tables as [name] and arrays of objects as
/// [[name]]. Deeper objects become inline tables. Floats use %.17g.
std::string emit(const nlohmann::json& doc);

}  // namespace gperot::toml
