#include "smoke/log_io.hpp"

#include <cstdio>
#include <fstream>

#include "smoke/errors.hpp"
#include "smoke/field_io.hpp"

namespace smoke {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw FormatError("cannot write " + p.string());
  return os;
}

}  // namespace

void write_outer_csv(std::ostream& os, const ConvergenceLog& log) {
  os << "outer_iter,ao_obj,nso_resid,visual_diff,wall_s\n";
  for (const auto& r : log.outer)
    os << r.outer_iter << ',' << g17(r.ao_obj) << ',' << g17(r.nso_resid) << ',' << g17(r.visual_diff) << ','
       << g17(r.wall_s) << '\n';
}

void write_nso_csv(std::ostream& os, const ConvergenceLog& log) {
  os << "admm_iter,vcycle_index,residual_inf,residual_l2,wall_ms\n";
  for (const auto& r : log.nso)
    os << r.admm_iter << ',' << r.record.cycle << ',' << g17(r.record.residual_inf) << ','
       << g17(r.record.residual_l2) << ',' << g17(r.record.wall_ms) << '\n';
}

void write_outer_csv(const std::filesystem::path& path, const ConvergenceLog& log) {
  auto os = open(path);
  write_outer_csv(os, log);
}

void write_nso_csv(const std::filesystem::path& path, const ConvergenceLog& log) {
  auto os = open(path);
  write_nso_csv(os, log);
}

std::string frame_name(const std::string& stem, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.smkf", stem.c_str(), i);
  return buf;
}

void write_fields(const std::filesystem::path& dir, const ControlResult& res) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    save_smkf(dir / frame_name("rho", static_cast<int>(i)), res.trajectory[i].rho);
    save_smkf(dir / frame_name("v", static_cast<int>(i)), res.trajectory[i].v);
  }
  for (std::size_t i = 0; i < res.forces.size(); ++i) save_smkf(dir / frame_name("u", static_cast<int>(i)), res.forces[i]);
  for (std::size_t i = 0; i < res.vstar.size(); ++i)
    save_smkf(dir / frame_name("vstar", static_cast<int>(i)), res.vstar[i]);
}

}  // namespace smoke
