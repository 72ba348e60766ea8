#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ks/cli.hpp"

namespace ks::cli {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(std::string_view origin, const std::string& what) {
  throw Error(ErrorKind::ParseError, std::string(origin) + ": " + what);
}

double number_at(const json& j, std::string_view origin, const std::string& field) {
  if (!j.is_number()) parse_fail(origin, "field '" + field + "' must be a number");
  return j.get<double>();
}

const json& require(const json& obj, const char* name, std::string_view origin,
                    const std::string& parent = "") {
  const std::string field = parent.empty() ? name : parent + "." + name;
  if (!obj.is_object() || !obj.contains(name)) parse_fail(origin, "missing field '" + field + "'");
  return obj.at(name);
}

std::vector<Vec3> parse_points(const json& j, std::string_view origin) {
  if (!j.is_array()) parse_fail(origin, "field 'points' must be an array");
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "points[" + std::to_string(i) + "]";
    const json& p = j[i];
    if (!p.is_array() || p.size() != 3) {
      throw Error(ErrorKind::DimensionMismatch,
                  std::string(origin) + ": field '" + field + "' must hold 3 coordinates");
    }
    Vec3 x;
    for (int k = 0; k < 3; ++k) {
      x(k) = number_at(p[static_cast<std::size_t>(k)], origin,
                       field + "[" + std::to_string(k) + "]");
    }
    points.push_back(x);
  }
  return points;
}

CouplingOperator parse_coupling(const json& j, std::string_view origin,
                                CouplingConvention convention) {
  if (!j.is_object()) parse_fail(origin, "field 'coupling' must be an object");
  const bool has_diag = j.contains("diagonal");
  const bool has_matrix = j.contains("matrix");
  if (has_diag == has_matrix) {
    parse_fail(origin, "field 'coupling' needs exactly one of 'diagonal' or 'matrix'");
  }
  if (has_diag) {
    const json& d = j.at("diagonal");
    if (!d.is_array()) parse_fail(origin, "field 'coupling.diagonal' must be an array");
    std::vector<double> w;
    for (std::size_t i = 0; i < d.size(); ++i) {
      w.push_back(number_at(d[i], origin, "coupling.diagonal[" + std::to_string(i) + "]"));
    }
    return CouplingOperator::diagonal(std::move(w), convention);
  }
  const json& m = j.at("matrix");
  if (!m.is_array()) parse_fail(origin, "field 'coupling.matrix' must be an array of rows");
  const auto n = static_cast<Eigen::Index>(m.size());
  CMatrix l(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = m[static_cast<std::size_t>(r)];
    const std::string field = "coupling.matrix[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorKind::DimensionMismatch,
                  std::string(origin) + ": field '" + field + "' must have " +
                      std::to_string(n) + " entries");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      const std::string ef = field + "[" + std::to_string(c) + "]";
      if (e.is_array()) {
        if (e.size() != 2) parse_fail(origin, "field '" + ef + "' must be [re, im]");
        l(r, c) = cplx(number_at(e[0], origin, ef), number_at(e[1], origin, ef));
      } else {
        l(r, c) = number_at(e, origin, ef);
      }
    }
  }
  return CouplingOperator::hermitian(std::move(l), convention);
}

double weight_law(const json& law, std::string_view origin, double n) {
  if (law.is_number()) return law.get<double>();
  if (!law.is_string()) {
    parse_fail(origin, "field 'generator.lattice_line.weight_law' must be \"n^p\" or a number");
  }
  const std::string s = law.get<std::string>();
  double p = 0.0;
  if (s.rfind("n^", 0) == 0) {
    const char* first = s.data() + 2;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, p);
    if (ec != std::errc() || ptr != last) {
      parse_fail(origin, "field 'generator.lattice_line.weight_law' has a bad exponent: " + s);
    }
    return std::pow(n, p);
  }
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, p);
  if (ec != std::errc() || ptr != last) {
    parse_fail(origin, "field 'generator.lattice_line.weight_law' is not \"n^p\" or a number: " + s);
  }
  return p;
}

void expand_generator(const json& gen, std::string_view origin, std::vector<Vec3>& points,
                      std::vector<double>& weights) {
  const json& line = require(gen, "lattice_line", origin, "generator");
  const std::string parent = "generator.lattice_line";
  const json& count_j = require(line, "count", origin, parent);
  if (!count_j.is_number_integer() || count_j.get<long long>() < 1) {
    parse_fail(origin, "field '" + parent + ".count' must be a positive integer");
  }
  const auto count = count_j.get<long long>();
  const double spacing =
      line.contains("spacing") ? number_at(line.at("spacing"), origin, parent + ".spacing") : 1.0;
  const json& law = require(line, "weight_law", origin, parent);
  for (long long n = 1; n <= count; ++n) {
    const auto nd = static_cast<double>(n);
    points.emplace_back(nd * spacing, 0.0, 0.0);
    weights.push_back(weight_law(law, origin, nd));
  }
}

}  // namespace

LoadedConfig parse_config(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    parse_fail(origin, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                           ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) parse_fail(origin, "top level must be an object");

  CouplingConvention convention = CouplingConvention::FourPi;
  if (doc.contains("convention")) {
    const json& c = doc.at("convention");
    const std::string s = c.is_string() ? c.get<std::string>() : c.is_number() ? c.dump() : "";
    if (s == "4pi") {
      convention = CouplingConvention::FourPi;
    } else if (s == "1") {
      convention = CouplingConvention::Unit;
    } else {
      parse_fail(origin, "field 'convention' must be \"4pi\" or \"1\"");
    }
  }

  if (doc.contains("generator")) {
    if (doc.contains("points") || doc.contains("coupling")) {
      parse_fail(origin, "field 'generator' excludes 'points' and 'coupling'");
    }
    std::vector<Vec3> points;
    std::vector<double> weights;
    expand_generator(doc.at("generator"), origin, points, weights);
    return {build_configuration(std::move(points),
                                CouplingOperator::diagonal(std::move(weights), convention)),
            FamilyExtent::Truncated};
  }

  std::vector<Vec3> points = parse_points(require(doc, "points", origin), origin);
  CouplingOperator coupling = parse_coupling(require(doc, "coupling", origin), origin, convention);
  return {build_configuration(std::move(points), std::move(coupling)), FamilyExtent::Finite};
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, path + ": cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace ks::cli
