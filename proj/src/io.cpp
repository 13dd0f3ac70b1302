#include "loopsoup/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace loopsoup {

namespace {

bool is_validation(Errc c) {
  switch (c) {
    case Errc::NonSquare:
    case Errc::NonFinite:
    case Errc::LabelMismatch:
    case Errc::PositiveDiagonal:
    case Errc::NegativeOffDiagonal:
    case Errc::RowSumPositive:
      return true;
    default:
      return false;
  }
}

}  // namespace

Generator generator_from_json(const Json& j, const std::string& origin) {
  if (!j.is_object() || !j.contains("L")) throw Error(Errc::ParseError, origin + ": expected an object with key \"L\"");
  const Json& rows = j.at("L");
  if (!rows.is_array() || rows.empty()) throw Error(Errc::ParseError, origin + ": \"L\" must be a non-empty array");
  const std::size_t n = rows.size();
  MatrixXd l(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n)
      throw Error(Errc::ParseError, origin + ": row " + std::to_string(i) + " of \"L\" does not have " +
                                        std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      if (!rows[i][k].is_number())
        throw Error(Errc::ParseError, origin + ": L[" + std::to_string(i) + "][" + std::to_string(k) + "] is not a number");
      l(Index(i), Index(k)) = rows[i][k].get<double>();
    }
  }
  std::vector<std::string> labels;
  if (j.contains("states")) {
    const Json& s = j.at("states");
    if (!s.is_array()) throw Error(Errc::ParseError, origin + ": \"states\" must be an array");
    for (const auto& v : s) labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  try {
    return Generator::validate(l, labels);
  } catch (const Error& e) {
    if (is_validation(e.code())) throw Error(Errc::ValidationError, origin + ": " + e.what());
    throw;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
}

Generator load_generator(const std::string& source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && source[first] == '{') {
    try {
      return generator_from_json(Json::parse(source));
    } catch (const Json::parse_error& e) {
      throw Error(Errc::ParseError, std::string("<inline>: ") + e.what());
    }
  }
  return generator_from_json(read_json_file(source), source);
}

Json generator_to_json(const Generator& g) {
  Json rows = Json::array();
  for (Index i = 0; i < g.size(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < g.size(); ++k) row.push_back(g.L()(i, k));
    rows.push_back(row);
  }
  return Json{{"states", g.labels()}, {"L", rows}};
}

Json loop_to_json(const Loop& l, const Generator& g) {
  Json out = Json::array();
  for (std::size_t i = 0; i < l.jumps(); ++i) out.push_back(Json::array({g.labels()[l.states()[i]], l.holds()[i]}));
  return out;
}

Loop loop_from_json(const Json& j, const Generator& g) {
  if (!j.is_array()) throw Error(Errc::ParseError, "loop must be an array of [label, hold] pairs");
  std::vector<Index> states;
  std::vector<double> holds;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[1].is_number())
      throw Error(Errc::ParseError, "loop entry must be [label, hold]");
    states.push_back(g.index_of(item[0].is_string() ? item[0].get<std::string>() : item[0].dump()));
    holds.push_back(item[1].get<double>());
  }
  return Loop(PointedLoop::make(std::move(states), std::move(holds)));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char c : f) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  return out + '\n';
}

std::string csv_line(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_double(v));
  return csv_line(fields);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
  out << text;
}

}  // namespace loopsoup
