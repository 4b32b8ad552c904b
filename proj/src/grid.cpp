#include "smoke/grid.hpp"

#include <sstream>

#include "smoke/errors.hpp"

namespace smoke {

std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic" || s == "Periodic") return Boundary::Periodic;
  if (s == "neumann" || s == "Neumann") return Boundary::Neumann;
  throw InvalidArgument("unknown boundary '" + s + "'");
}

GridSpec GridSpec::make(int dim, std::array<int, 3> res, double h, Boundary boundary) {
  if (dim != 2 && dim != 3) throw InvalidArgument("grid dimension must be 2 or 3");
  if (!(h > 0.0)) throw InvalidArgument("cell size h must be positive");
  if (dim == 2) res[2] = 1;
  for (int a = 0; a < dim; ++a) {
    if (res[a] < 4) throw InvalidArgument("grid resolution must be at least 4 cells per axis");
    if (boundary == Boundary::Periodic && res[a] % 2 != 0)
      throw InvalidArgument("periodic grids need an even resolution for the cell colouring");
  }
  GridSpec s;
  s.dim = dim;
  s.res = res;
  s.h = h;
  s.boundary = boundary;
  return s;
}

bool GridSpec::can_coarsen() const {
  for (int a = 0; a < dim; ++a)
    if (res[a] % 2 != 0 || res[a] / 2 < 4) return false;
  return true;
}

GridSpec GridSpec::coarsened() const {
  if (!can_coarsen()) throw InvalidArgument("grid cannot be coarsened: " + describe(*this));
  GridSpec c = *this;
  for (int a = 0; a < dim; ++a) c.res[a] /= 2;
  c.h = 2.0 * h;
  return c;
}

std::string describe(const GridSpec& spec) {
  std::ostringstream os;
  os << spec.res[0];
  for (int a = 1; a < spec.dim; ++a) os << "x" << spec.res[a];
  os << " h=" << spec.h << " " << to_string(spec.boundary);
  return os.str();
}

FaceField::FaceField(const GridSpec& spec, double fill) : spec_(spec) {
  std::size_t off = 0;
  for (int a = 0; a < 3; ++a) {
    offset_[a] = off;
    if (a < spec.dim) off += spec.face_count(a);
  }
  offset_[3] = off;
  data_.assign(off, fill);
  if (fill != 0.0) enforce_walls(*this);
}

bool is_wall_face(const GridSpec& spec, int axis, const std::array<int, 3>& idx) {
  if (spec.periodic()) return false;
  return idx[axis] == 0 || idx[axis] == spec.res[axis];
}

void enforce_walls(FaceField& v) {
  const GridSpec& s = v.spec();
  if (s.periodic()) return;
  for (int a = 0; a < s.dim; ++a) {
    auto d = s.face_dims(a);
    auto comp = v.component(a);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          std::array<int, 3> idx{i, j, k};
          if (idx[a] == 0 || idx[a] == s.res[a]) comp[v.face_index(a, i, j, k)] = 0.0;
        }
  }
}

}  // namespace smoke
