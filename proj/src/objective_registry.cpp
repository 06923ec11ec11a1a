#include <algorithm>
#include <map>
#include <sstream>

#include "nagcert/objectives.hpp"

namespace nagcert {

namespace {

struct ParsedId {
  std::string name;
  std::vector<double> positional;
  std::map<std::string, double> named;
};

double parse_number(const std::string& s, const std::string& id) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("objective '" + id + "': bad number '" + s + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

ParsedId parse_id(const std::string& id) {
  ParsedId out;
  const auto open = id.find('{');
  if (open == std::string::npos) {
    out.name = trim(id);
    return out;
  }
  if (id.back() != '}') throw std::invalid_argument("objective '" + id + "': missing '}'");
  out.name = trim(id.substr(0, open));
  std::stringstream body(id.substr(open + 1, id.size() - open - 2));
  std::string item;
  while (std::getline(body, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (const auto eq = item.find('='); eq != std::string::npos) {
      out.named[trim(item.substr(0, eq))] = parse_number(trim(item.substr(eq + 1)), id);
    } else {
      if (!out.named.empty())
        throw std::invalid_argument("objective '" + id + "': positional argument after named one");
      out.positional.push_back(parse_number(item, id));
    }
  }
  return out;
}

/// Binds positional and named arguments to an ordered parameter list.
std::vector<double> bind(const ParsedId& p, const std::vector<std::string>& names, const std::string& id) {
  if (p.positional.size() > names.size())
    throw std::invalid_argument("objective '" + id + "': too many arguments");
  std::vector<std::optional<double>> vals(names.size());
  for (std::size_t i = 0; i < p.positional.size(); ++i) vals[i] = p.positional[i];
  for (const auto& [k, v] : p.named) {
    const auto it = std::find(names.begin(), names.end(), k);
    if (it == names.end()) throw std::invalid_argument("objective '" + id + "': unknown parameter '" + k + "'");
    vals[static_cast<std::size_t>(it - names.begin())] = v;
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!vals[i]) throw std::invalid_argument("objective '" + id + "': missing parameter '" + names[i] + "'");
    out.push_back(*vals[i]);
  }
  return out;
}

}  // namespace

Objective make_objective(const std::string& id) {
  const ParsedId p = parse_id(id);
  if (p.name == "oscillatory1d") {
    const auto v = bind(p, {"eps", "R"}, id);
    return make_oscillatory_1d(v[0], v[1]);
  }
  if (p.name == "quad") {
    if (!p.named.empty() || p.positional.empty())
      throw std::invalid_argument("objective '" + id + "': quad takes a list of eigenvalues");
    const Vector eigs = Eigen::Map<const Vector>(p.positional.data(), static_cast<Eigen::Index>(p.positional.size()));
    return make_quadratic(eigs.asDiagonal());
  }
  if (p.name == "sqdist-circle") {
    const auto v = bind(p, {"r", "mu"}, id);
    return make_squared_distance(CircleManifold{v[0]}, v[1]);
  }
  if (p.name == "sqdist-ellipse") {
    const auto v = bind(p, {"a", "b", "mu"}, id);
    return make_squared_distance(EllipseManifold{v[0], v[1]}, v[2]);
  }
  if (p.name == "product") {
    const auto v = bind(p, {"k", "d", "mu"}, id);
    const int k = static_cast<int>(v[0]), d = static_cast<int>(v[1]);
    if (k != v[0] || d != v[1]) throw std::invalid_argument("objective '" + id + "': k and d must be integers");
    return make_product_structure(k, d, sine_scale(k), v[2]);
  }
  if (p.name == "ellipse-quartic") {
    if (!p.positional.empty() || !p.named.empty())
      throw std::invalid_argument("objective '" + id + "': ellipse-quartic takes no parameters");
    return make_ellipse_quartic();
  }
  throw std::invalid_argument("unknown objective '" + p.name + "'");
}

}  // namespace nagcert
