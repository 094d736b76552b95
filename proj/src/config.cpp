#include "nlh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace nlh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + s + "' is not a number");
  }
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": '" + s + "' is not an integer");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::vector<double> doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<int> ints(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(to_int(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string one(const std::string& key, const std::string& value) {
  const auto items = split_list(value);
  if (items.size() != 1 || items[0].empty()) throw ConfigError(key + ": expected a single value");
  return items[0];
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"problem.k", [](RunConfig& c, auto& k, auto& v) { c.k = doubles(k, v); }},
      {"problem.epsilon", [](RunConfig& c, auto& k, auto& v) { c.epsilon = doubles(k, v); }},
      {"problem.source",
       [](RunConfig& c, auto& k, auto& v) {
         const auto s = one(k, v);
         if (s == "bump") c.source = SourceKind::Bump;
         else if (s == "constant") c.source = SourceKind::Constant;
         else if (s == "planewave") c.source = SourceKind::PlaneWave;
         else throw ConfigError(k + ": unknown source '" + s + "' (bump|constant|planewave)");
       }},
      {"problem.f", [](RunConfig& c, auto& k, auto& v) { c.f = doubles(k, v); }},
      {"problem.boundary",
       [](RunConfig& c, auto& k, auto& v) {
         const auto s = one(k, v);
         if (s == "zero") c.boundary = BoundaryKind::Zero;
         else if (s == "planewave") c.boundary = BoundaryKind::PlaneWave;
         else throw ConfigError(k + ": unknown boundary '" + s + "' (zero|planewave)");
       }},
      {"problem.direction",
       [](RunConfig& c, auto& k, auto& v) {
         const auto d = doubles(k, v);
         if (d.size() != 2) throw ConfigError(k + ": expected two components");
         const double n = std::hypot(d[0], d[1]);
         if (n == 0.0) throw ConfigError(k + ": zero direction");
         c.direction = {d[0] / n, d[1] / n};
       }},
      {"discretization.p", [](RunConfig& c, auto& k, auto& v) { c.p = ints(k, v); }},
      {"discretization.levels", [](RunConfig& c, auto& k, auto& v) { c.levels = ints(k, v); }},
      {"discretization.geometric_degree",
       [](RunConfig& c, auto& k, auto& v) {
         const auto s = one(k, v);
         c.geometric_degree = s == "auto" ? 0 : to_int(k, s);
       }},
      {"discretization.reference_level",
       [](RunConfig& c, auto& k, auto& v) { c.reference_level = to_int(k, one(k, v)); }},
      {"discretization.reference_p", [](RunConfig& c, auto& k, auto& v) { c.reference_p = to_int(k, one(k, v)); }},
      {"solver.scheme",
       [](RunConfig& c, auto& k, auto& v) {
         c.schemes.clear();
         for (const auto& s : split_list(v)) {
           try {
             c.schemes.push_back(parse_scheme(s));
           } catch (const std::exception&) {
             throw ConfigError(k + ": unknown scheme '" + s + "' (frozen|newtonlike)");
           }
         }
         if (c.schemes.empty()) throw ConfigError(k + ": empty list");
       }},
      {"solver.tol", [](RunConfig& c, auto& k, auto& v) { c.tol = to_double(k, one(k, v)); }},
      {"solver.max_iter", [](RunConfig& c, auto& k, auto& v) { c.max_iter = to_int(k, one(k, v)); }},
      {"solver.verify_linear_solves",
       [](RunConfig& c, auto& k, auto& v) { c.verify_linear_solves = to_bool(k, one(k, v)); }},
      {"output.directory", [](RunConfig& c, auto& k, auto& v) { c.directory = one(k, v); }},
      {"output.emit_svg", [](RunConfig& c, auto& k, auto& v) { c.emit_svg = to_bool(k, one(k, v)); }},
      {"output.wall_time", [](RunConfig& c, auto& k, auto& v) { c.wall_time = to_bool(k, one(k, v)); }},
      {"output.dof_target", [](RunConfig& c, auto& k, auto& v) { c.dof_target = to_double(k, one(k, v)); }},
  };
  return table;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(c, key, value);
}

void validate(const RunConfig& c) {
  for (double k : c.k) {
    if (!(k >= 1.0)) throw ConfigError("problem.k: wave numbers must be >= 1");
  }
  for (double e : c.epsilon) {
    if (!(e >= 0.0)) throw ConfigError("problem.epsilon: must be >= 0");
  }
  for (int p : c.p) {
    if (p < 1 || p > 4) throw ConfigError("discretization.p: degrees must lie in 1..4");
  }
  if (c.reference_p < 1 || c.reference_p > 4) throw ConfigError("discretization.reference_p: must lie in 1..4");
  for (int l : c.levels) {
    if (l < 2) throw ConfigError("discretization.levels: levels start at 2");
  }
  if (!std::is_sorted(c.levels.begin(), c.levels.end()) ||
      std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end()) {
    throw ConfigError("discretization.levels: must be strictly ascending");
  }
  if (c.reference_level < 2) throw ConfigError("discretization.reference_level: levels start at 2");
  if (c.geometric_degree < 0 || c.geometric_degree > 4) {
    throw ConfigError("discretization.geometric_degree: must be auto or lie in 1..4");
  }
  if (!(c.tol > 0.0)) throw ConfigError("solver.tol: must be > 0");
  if (c.max_iter < 1) throw ConfigError("solver.max_iter: must be >= 1");
  if (!(c.dof_target > 0.0)) throw ConfigError("output.dof_target: must be > 0");
  if (c.directory.empty()) throw ConfigError("output.directory: empty");
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

}  // namespace

ProblemSpec RunConfig::problem(double k_, double epsilon_, double f_, Scheme scheme) const {
  ProblemSpec s;
  s.k = k_;
  s.epsilon = epsilon_;
  switch (source) {
    case SourceKind::Bump:
      s.source = BumpSource{};
      break;
    case SourceKind::Constant:
      s.source = ConstantSource{f_};
      break;
    case SourceKind::PlaneWave:
      s.source = PlaneWaveSource{direction};
      break;
  }
  if (boundary == BoundaryKind::PlaneWave) s.boundary = PlaneWaveImpedance{direction};
  s.scheme = scheme;
  s.tol = tol;
  s.max_iter = max_iter;
  return s;
}

RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides) {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"problem", "discretization", "solver", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
    apply(c, section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected section.key=value");
    apply(c, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  validate(c);
  return c;
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  std::istringstream is(text);
  return parse_config(is, overrides);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, overrides);
}

void write_config(std::ostream& os, const RunConfig& c) {
  const char* source = c.source == SourceKind::Bump ? "bump" : c.source == SourceKind::Constant ? "constant" : "planewave";
  std::vector<std::string> schemes;
  for (Scheme s : c.schemes) schemes.push_back(to_string(s));
  std::ostringstream d;
  d.precision(17);
  d << c.direction.x << ", " << c.direction.y;
  std::ostringstream num;
  num.precision(17);
  num << c.tol;
  std::ostringstream target;
  target.precision(17);
  target << c.dof_target;

  os << "[problem]\n"
     << "k = " << join(c.k) << "\n"
     << "epsilon = " << join(c.epsilon) << "\n"
     << "source = " << source << "\n"
     << "f = " << join(c.f) << "\n"
     << "boundary = " << (c.boundary == BoundaryKind::Zero ? "zero" : "planewave") << "\n"
     << "direction = " << d.str() << "\n\n"
     << "[discretization]\n"
     << "p = " << join(c.p) << "\n"
     << "levels = " << join(c.levels) << "\n"
     << "geometric_degree = " << (c.geometric_degree == 0 ? std::string("auto") : std::to_string(c.geometric_degree))
     << "\n"
     << "reference_level = " << c.reference_level << "\n"
     << "reference_p = " << c.reference_p << "\n\n"
     << "[solver]\n"
     << "scheme = " << join(schemes) << "\n"
     << "tol = " << num.str() << "\n"
     << "max_iter = " << c.max_iter << "\n"
     << "verify_linear_solves = " << (c.verify_linear_solves ? "true" : "false") << "\n\n"
     << "[output]\n"
     << "directory = " << c.directory << "\n"
     << "emit_svg = " << (c.emit_svg ? "true" : "false") << "\n"
     << "wall_time = " << (c.wall_time ? "true" : "false") << "\n"
     << "dof_target = " << target.str() << "\n";
}

}  // namespace nlh
