#include "nagcert/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nagcert/csv.hpp"

namespace nagcert {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& field, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(field, "expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& field, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(field, "expected a nonnegative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(field, "integer out of range: '" + v + "'");
  }
}

int to_int(const std::string& field, const std::string& v) {
  const std::uint64_t x = to_u64(field, v);
  if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError(field, "value too large");
  return static_cast<int>(x);
}

std::vector<double> to_vector(const std::string& field, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(field, item));
  return out;
}

std::vector<std::uint64_t> to_seeds(const std::string& field, const std::string& v) {
  std::vector<std::uint64_t> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const std::uint64_t a = to_u64(field, trim(item.substr(0, dots)));
      const std::uint64_t b = to_u64(field, trim(item.substr(dots + 2)));
      if (b < a) throw ConfigError(field, "empty seed range '" + item + "'");
      if (b - a >= 10'000'000) throw ConfigError(field, "seed range too large");
      for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    } else {
      out.push_back(to_u64(field, item));
    }
  }
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
  return out;
}

// Contiguous runs collapse to first..last.
std::string join_seeds(const std::vector<std::uint64_t>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1] == s[j] + 1) ++j;
    if (!out.empty()) out += ",";
    out += std::to_string(s[i]);
    if (j > i) out += ".." + std::to_string(s[j]);
    i = j + 1;
  }
  return out;
}

template <class F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ReproduceTarget parse_reproduce_target(const std::string& s) {
  if (s == "fig2") return ReproduceTarget::Fig2;
  if (s == "fig4") return ReproduceTarget::Fig4;
  if (s == "example1-table") return ReproduceTarget::Example1Table;
  throw std::invalid_argument("unknown reproduction target '" + s + "' (expected fig2|fig4|example1-table)");
}

std::string to_string(ReproduceTarget t) {
  switch (t) {
    case ReproduceTarget::Fig2: return "fig2";
    case ReproduceTarget::Fig4: return "fig4";
    case ReproduceTarget::Example1Table: return "example1-table";
  }
  return "?";
}

const std::vector<std::string>& theorem_names() {
  static const std::vector<std::string> names{"continuous", "global", "discrete", "additive", "decreasing", "agnes"};
  return names;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"objective", [&](auto& k, auto& v) {
         if (v.empty()) throw ConfigError(k, "empty objective id");
         c.objective = v;
       }},
      {"opt.scheme", [&](auto& k, auto& v) { c.scheme = wrap(k, [&] { return parse_scheme(v); }); }},
      {"opt.eta", [&](auto& k, auto& v) { c.eta = to_double(k, v); }},
      {"opt.mu", [&](auto& k, auto& v) { c.mu = to_double(k, v); }},
      {"opt.sigma_m", [&](auto& k, auto& v) { c.sigma_m = to_double(k, v); }},
      {"opt.gamma", [&](auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"opt.dt", [&](auto& k, auto& v) { c.dt = to_double(k, v); }},
      {"opt.horizon", [&](auto& k, auto& v) { c.horizon = to_int(k, v); }},
      {"opt.final_time", [&](auto& k, auto& v) { c.final_time = to_double(k, v); }},
      {"opt.sample_every", [&](auto& k, auto& v) { c.sample_every = to_int(k, v); }},
      {"opt.x0", [&](auto& k, auto& v) { c.x0 = to_vector(k, v); }},
      {"opt.v0", [&](auto& k, auto& v) { c.v0 = to_vector(k, v); }},
      {"schedule.form", [&](auto& k, auto& v) { c.schedule_form = wrap(k, [&] { return parse_schedule_form(v); }); }},
      {"noise.kind", [&](auto& k, auto& v) { c.noise_kind = wrap(k, [&] { return parse_noise_kind(v); }); }},
      {"noise.sigma_a", [&](auto& k, auto& v) { c.noise_sigma_a = to_double(k, v); }},
      {"noise.sigma_m", [&](auto& k, auto& v) { c.noise_sigma_m = to_double(k, v); }},
      {"noise.seed", [&](auto& k, auto& v) { c.noise_seed = to_u64(k, v); }},
      {"seeds", [&](auto& k, auto& v) { c.seeds = to_seeds(k, v); }},
      {"output", [&](auto&, auto& v) { c.output = v; }},
      {"certify", [&](auto& k, auto& v) {
         c.certify.clear();
         if (v.empty()) return;
         for (const auto& name : split(v, ',')) {
           const auto& names = theorem_names();
           if (std::find(names.begin(), names.end(), name) == names.end())
             throw ConfigError(k, "unknown theorem '" + name + "'");
           c.certify.push_back(name);
         }
       }},
      {"reproduce", [&](auto& k, auto& v) {
         if (v.empty() || v == "none")
           c.reproduce.reset();
         else
           c.reproduce = wrap(k, [&] { return parse_reproduce_target(v); });
       }},
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key (line " + std::to_string(lineno) + ")");
    if (seen.count(key)) throw ConfigError(key, "duplicate key (lines " + std::to_string(seen[key]) + " and " +
                                                    std::to_string(lineno) + ")");
    seen[key] = lineno;
    it->second(key, value);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  auto opt = [&](const std::string& k, const std::optional<double>& v) {
    if (v) kv(k, format_double(*v));
  };
  kv("objective", c.objective);
  kv("opt.scheme", to_string(c.scheme));
  opt("opt.eta", c.eta);
  opt("opt.mu", c.mu);
  opt("opt.sigma_m", c.sigma_m);
  opt("opt.gamma", c.gamma);
  opt("opt.dt", c.dt);
  kv("opt.horizon", std::to_string(c.horizon));
  kv("opt.final_time", format_double(c.final_time));
  kv("opt.sample_every", std::to_string(c.sample_every));
  if (!c.x0.empty()) kv("opt.x0", join_doubles(c.x0));
  if (!c.v0.empty()) kv("opt.v0", join_doubles(c.v0));
  kv("schedule.form", to_string(c.schedule_form));
  kv("noise.kind", to_string(c.noise_kind));
  kv("noise.sigma_a", format_double(c.noise_sigma_a));
  kv("noise.sigma_m", format_double(c.noise_sigma_m));
  kv("noise.seed", std::to_string(c.noise_seed));
  if (!c.seeds.empty()) kv("seeds", join_seeds(c.seeds));
  kv("output", c.output);
  if (!c.certify.empty()) {
    std::string s;
    for (std::size_t i = 0; i < c.certify.size(); ++i) s += (i ? "," : "") + c.certify[i];
    kv("certify", s);
  }
  if (c.reproduce) kv("reproduce", to_string(*c.reproduce));
  return os.str();
}

}  // namespace nagcert
