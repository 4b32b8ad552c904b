#include "smoke/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "smoke/errors.hpp"

namespace smoke {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T to_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw FormatError("config: bad value for " + key + ": '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw FormatError("config: bad boolean for " + key + ": '" + v + "'");
}

const char* b2s(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string to_string(SolverKind s) { return s == SolverKind::Admm ? "admm" : "lbfgs"; }

bool RunConfig::operator==(const RunConfig& o) const { return serialize(*this) == serialize(o); }

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  int dim = c.grid.dim;
  std::array<int, 3> res = c.grid.res;
  double h = c.grid.h;
  Boundary bnd = c.grid.boundary;
  bool have_h = false;

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    auto num = [&](auto& dst) { dst = to_number<std::remove_reference_t<decltype(dst)>>(full, val); };

    if (section == "keyframes") {
      c.keyframes[to_number<int>(full, key)] = val;
    } else if (full == "grid.dim") {
      num(dim);
    } else if (full == "grid.res") {
      std::istringstream rs(val);
      std::string tok;
      int a = 0;
      res = {1, 1, 1};
      while (rs >> tok) {
        if (a == 3) throw FormatError("config: too many grid.res entries");
        res[a++] = to_number<int>(full, tok);
      }
      if (a == 1) res[1] = res[0];
      if (a == 1 && dim == 3) res[2] = res[0];
    } else if (full == "grid.h") {
      num(h);
      have_h = true;
    } else if (full == "grid.boundary") {
      try {
        bnd = boundary_from_string(val);
      } catch (const InvalidArgument& e) {
        throw FormatError(std::string("config: ") + e.what());
      }
    } else if (full == "time.dt") {
      num(c.dt);
    } else if (full == "time.steps") {
      num(c.steps);
    } else if (full == "density.initial") {
      c.initial = val;
    } else if (full == "admm.K") {
      num(c.admm.K);
    } else if (full == "admm.r") {
      num(c.admm.r);
    } else if (full == "admm.beta") {
      num(c.admm.beta);
    } else if (full == "admm.ao_iters") {
      num(c.admm.ao_iters);
    } else if (full == "admm.eps_stfas") {
      num(c.admm.eps_stfas);
    } else if (full == "admm.eps_admm") {
      num(c.admm.eps_admm);
    } else if (full == "admm.max_outer") {
      num(c.admm.max_outer);
    } else if (full == "admm.nso_cycle_budget") {
      num(c.admm.nso_cycle_budget);
    } else if (full == "admm.fallback") {
      c.admm.fallback = to_bool(full, val);
    } else if (full == "admm.fallback_tol") {
      num(c.admm.fallback_tol);
    } else if (full == "admm.lm") {
      c.admm.lm = to_bool(full, val);
    } else if (full == "admm.safeguard") {
      c.admm.safeguard = to_bool(full, val);
    } else if (full == "admm.metric_levels") {
      num(c.admm.metric_levels);
    } else if (full == "run.solver") {
      if (val == "admm")
        c.solver = SolverKind::Admm;
      else if (val == "lbfgs")
        c.solver = SolverKind::Lbfgs;
      else
        throw FormatError("config: unknown solver '" + val + "'");
    } else if (full == "run.out") {
      c.out = val;
    } else if (full == "run.threads") {
      num(c.threads);
    } else if (full == "run.seed") {
      num(c.seed);
    } else if (full == "run.lbfgs_max_iters") {
      num(c.lbfgs_max_iters);
    } else {
      throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + full + "'");
    }
  }
  if (dim == 2) res[2] = 1;
  if (!have_h) h = 1.0 / res[0];
  try {
    c.grid = GridSpec::make(dim, res, h, bnd);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  c.admm.dt = c.dt;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig c = parse_config(ss.str());
  const auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.initial);
  for (auto& [i, p] : c.keyframes) resolve(p);
  return c;
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "[grid]\n";
  os << "dim = " << c.grid.dim << "\n";
  os << "res = " << c.grid.res[0] << " " << c.grid.res[1];
  if (c.grid.dim == 3) os << " " << c.grid.res[2];
  os << "\n";
  os << "h = " << fmt_double(c.grid.h) << "\n";
  os << "boundary = " << to_string(c.grid.boundary) << "\n\n";
  os << "[time]\n";
  os << "dt = " << fmt_double(c.dt) << "\n";
  os << "steps = " << c.steps << "\n\n";
  os << "[density]\n";
  os << "initial = " << c.initial << "\n\n";
  os << "[keyframes]\n";
  for (const auto& [i, p] : c.keyframes) os << i << " = " << p << "\n";
  os << "\n[admm]\n";
  os << "K = " << fmt_double(c.admm.K) << "\n";
  os << "r = " << fmt_double(c.admm.r) << "\n";
  os << "beta = " << fmt_double(c.admm.beta) << "\n";
  os << "ao_iters = " << c.admm.ao_iters << "\n";
  os << "eps_stfas = " << fmt_double(c.admm.eps_stfas) << "\n";
  os << "eps_admm = " << fmt_double(c.admm.eps_admm) << "\n";
  os << "max_outer = " << c.admm.max_outer << "\n";
  os << "nso_cycle_budget = " << c.admm.nso_cycle_budget << "\n";
  os << "fallback = " << b2s(c.admm.fallback) << "\n";
  os << "fallback_tol = " << fmt_double(c.admm.fallback_tol) << "\n";
  os << "lm = " << b2s(c.admm.lm) << "\n";
  os << "safeguard = " << b2s(c.admm.safeguard) << "\n";
  os << "metric_levels = " << c.admm.metric_levels << "\n\n";
  os << "[run]\n";
  os << "solver = " << to_string(c.solver) << "\n";
  os << "out = " << c.out << "\n";
  os << "threads = " << c.threads << "\n";
  os << "seed = " << c.seed << "\n";
  os << "lbfgs_max_iters = " << c.lbfgs_max_iters << "\n";
  return os.str();
}

void validate(const RunConfig& c) {
  if (!(c.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (c.steps < 1) throw InvalidArgument("steps must be >= 1");
  if (c.initial.empty()) throw InvalidArgument("density.initial is required");
  if (c.keyframes.empty()) throw InvalidArgument("at least one keyframe is required");
  for (const auto& [i, p] : c.keyframes)
    if (i < 1 || i > c.steps) throw InvalidArgument("keyframe step " + std::to_string(i) + " outside [1, N]");
  if (c.threads < 0) throw InvalidArgument("threads must be >= 0");
  if (c.lbfgs_max_iters < 1) throw InvalidArgument("lbfgs_max_iters must be >= 1");
  validate(c.admm);
}

}  // namespace smoke
