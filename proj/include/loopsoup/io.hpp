#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopsoup/chain.hpp"
#include "loopsoup/loop.hpp"

namespace loopsoup {

using Json = nlohmann::json;

/// {"states": [...], "L": [[...], ...]}; origin is used in error messages.
Generator generator_from_json(const Json& j, const std::string& origin = "<inline>");
/// Accepts inline JSON text (starting with '{') or a file path.
Generator load_generator(const std::string& source);
Json generator_to_json(const Generator& g);

/// [[label, hold], ...] in pointed order.
Json loop_to_json(const Loop& l, const Generator& g);
Loop loop_from_json(const Json& j, const Generator& g);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
std::string csv_line(const std::vector<std::string>& fields);
std::string csv_line(const std::vector<double>& values);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace loopsoup
