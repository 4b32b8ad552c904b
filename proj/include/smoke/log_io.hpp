#pragma once

#include <filesystem>
#include <ostream>

#include "smoke/admm.hpp"

namespace smoke {

// CSV schemas:
//   outer: outer_iter,ao_obj,nso_resid,visual_diff,wall_s
//   nso:   admm_iter,vcycle_index,residual_inf,residual_l2,wall_ms
void write_outer_csv(std::ostream& os, const ConvergenceLog& log);
void write_nso_csv(std::ostream& os, const ConvergenceLog& log);
void write_outer_csv(const std::filesystem::path& path, const ConvergenceLog& log);
void write_nso_csv(const std::filesystem::path& path, const ConvergenceLog& log);

/// rho_XXXX.smkf, v_XXXX.smkf, u_XXXX.smkf, vstar_XXXX.smkf in dir.
void write_fields(const std::filesystem::path& dir, const ControlResult& res);
std::string frame_name(const std::string& stem, int i);

}  // namespace smoke
