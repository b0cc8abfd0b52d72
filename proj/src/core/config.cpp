#include "simpl/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "simpl/error.hpp"

namespace simpl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::string spaced = value;
  for (char& c : spaced) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(spaced);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

class Parser {
 public:
  Parser(std::string source, std::string base_dir) : source_(std::move(source)), base_(std::move(base_dir)) {}

  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorCode::Config, source_ + ":" + std::to_string(line_) + ": " + message);
  }

  double real(const std::string& v) const {
    const std::string t = trim(v);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x)) {
      error("expected a finite number, got '" + t + "'");
    }
    return x;
  }

  int integer(const std::string& v) const {
    const std::string t = trim(v);
    char* end = nullptr;
    errno = 0;
    const long x = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || x < -2147483647L || x > 2147483647L) {
      error("expected an integer, got '" + t + "'");
    }
    return static_cast<int>(x);
  }

  std::vector<double> reals(const std::string& v, std::size_t expected = 0) const {
    std::vector<double> out;
    for (const auto& tok : split_list(v)) out.push_back(real(tok));
    if (out.empty()) error("expected a list of numbers");
    if (expected && out.size() != expected) error("expected " + std::to_string(expected) + " numbers");
    return out;
  }

  Vector vec(const std::string& v) const {
    const auto xs = reals(v);
    return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }

  std::array<double, 2> pair(const std::string& v) const {
    const auto xs = reals(v, 2);
    return {xs[0], xs[1]};
  }

  // Rows separated by ';'.
  Matrix matrix(const std::string& v) const {
    std::vector<std::vector<double>> rows;
    std::stringstream in(v);
    std::string row;
    while (std::getline(in, row, ';')) rows.push_back(reals(row));
    if (rows.empty()) error("expected at least one row");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) error("matrix rows differ in length");
      for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  BoundarySelector edges(const std::string& v) const {
    BoundarySelector s;
    for (const auto& tok : split_list(v)) {
      if (tok == "left") s.left = true;
      else if (tok == "right") s.right = true;
      else if (tok == "bottom") s.bottom = true;
      else if (tok == "top") s.top = true;
      else if (tok != "none") error("unknown edge '" + tok + "' (left, right, bottom, top, none)");
    }
    return s;
  }

  std::string path(const std::string& v) const {
    const std::string t = trim(v);
    if (t.empty()) error("expected a path");
    const std::filesystem::path p(t);
    if (p.is_absolute() || base_.empty()) return t;
    return (std::filesystem::path(base_) / p).string();
  }

  void set_line(int line) { line_ = line; }

 private:
  std::string source_;
  std::string base_;
  int line_ = 0;
};

using Setter = std::function<void(RunConfig&, const Parser&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem.name", [](RunConfig& c, const Parser&, const std::string& v) { c.problem.name = trim(v); }},
      {"problem.nx", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.nx = p.integer(v); }},
      {"problem.ny", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.ny = p.integer(v); }},
      {"problem.lx", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.lx = p.real(v); }},
      {"problem.ly", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.ly = p.real(v); }},
      {"problem.filter_epsilon",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.filter_epsilon = p.real(v); }},
      {"problem.load_center",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.load_center = p.pair(v); }},
      {"problem.load_radius",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.load_radius = p.real(v); }},
      {"problem.load_vector",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.load_vector = p.pair(v); }},
      {"problem.clamped_edges",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.gamma_d = p.edges(v); }},
      {"problem.filter_edges",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.gamma_f = p.edges(v); }},
      {"problem.polytope_file",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.polytope_file = p.path(v); }},
      {"problem.constraint_weights",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.weights = p.matrix(v); }},
      {"problem.constraint_bounds",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.bounds = p.vec(v); }},
      {"problem.bounds", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.phase_bounds = p.reals(v); }},
      {"problem.void_fraction",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.void_fraction = p.real(v); }},
      {"problem.num_angles",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.num_angles = p.integer(v); }},
      {"problem.initial_latent",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.initial_latent = p.vec(v); }},
      {"problem.initial_latent_file",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.initial_latent_file = p.path(v); }},
      {"materials.E", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.youngs = p.reals(v); }},
      {"materials.nu", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.nu = p.real(v); }},
      {"materials.p", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.p = p.real(v); }},
      {"materials.Ex", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.ex = p.real(v); }},
      {"materials.Ey", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.ey = p.real(v); }},
      {"materials.nu_xy", [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.nu_xy = p.real(v); }},
      {"materials.floor_scale",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.problem.floor_scale = p.real(v); }},
      {"optimizer.c1", [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.c1 = p.real(v); }},
      {"optimizer.tol_abs", [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.tol_abs = p.real(v); }},
      {"optimizer.tol_rel", [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.tol_rel = p.real(v); }},
      {"optimizer.alpha0", [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.alpha0 = p.real(v); }},
      {"optimizer.alpha_min",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.alpha_min = p.real(v); }},
      {"optimizer.alpha_max",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.alpha_max = p.real(v); }},
      {"optimizer.max_iters",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.max_iters = p.integer(v); }},
      {"optimizer.max_backtracks",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.max_backtracks = p.integer(v); }},
      {"projection.tol",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.projection.tol = p.real(v); }},
      {"projection.max_sweeps",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.optimizer.projection.max_sweeps = p.integer(v); }},
      {"output.dir", [](RunConfig& c, const Parser&, const std::string& v) { c.output_dir = trim(v); }},
      {"output.snapshot_period",
       [](RunConfig& c, const Parser& p, const std::string& v) { c.snapshot_period = p.integer(v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  problem.validate();
  try {
    optimizer.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what(), e.data());
  }
  if (output_dir.empty()) fail(ErrorCode::Config, "output directory must not be empty");
  if (snapshot_period < 0) fail(ErrorCode::Config, "snapshot_period must be non-negative");
}

RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir) {
  RunConfig cfg;
  Parser parser(source, base_dir);
  std::set<std::string> seen;
  struct Assignment {
    int line;
    Setter setter;
    std::string value;
  };
  std::vector<Assignment> assignments;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    parser.set_line(lineno);
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parser.error("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections{"problem", "materials", "optimizer", "projection", "output"};
      if (!sections.count(section)) parser.error("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parser.error("expected 'key = value'");
    if (section.empty()) parser.error("key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) parser.error("unknown key '" + key + "'");
    if (!seen.insert(key).second) parser.error("duplicate key '" + key + "'");
    if (value.empty()) parser.error("missing value for '" + key + "'");
    it->second(cfg, parser, value);
    assignments.push_back({lineno, it->second, value});
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    // Replay the assignments to find the first line at which the
    // configuration stops validating, and report the error there.
    RunConfig partial;
    for (const auto& a : assignments) {
      parser.set_line(a.line);
      a.setter(partial, parser, a.value);
      try {
        partial.validate();
      } catch (const Error& first) {
        fail(ErrorCode::Config, source + ":" + std::to_string(a.line) + ": " + first.what(), first.data());
      }
    }
    fail(ErrorCode::Config, source + ": " + e.what(), e.data());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config '" + path + "'");
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(in, path, base);
}

}  // namespace simpl
