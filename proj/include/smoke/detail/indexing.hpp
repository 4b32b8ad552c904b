#pragma once

#include <array>
#include <cstddef>

#include "smoke/grid.hpp"

namespace smoke::detail {

using Idx = std::array<int, 3>;

inline std::size_t linear(const std::array<int, 3>& dims, const Idx& p) {
  return static_cast<std::size_t>(p[0]) +
         static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(p[1]) + static_cast<std::size_t>(dims[1]) * p[2]);
}

inline Idx unlinear(const std::array<int, 3>& dims, std::size_t n) {
  Idx p;
  p[0] = static_cast<int>(n % dims[0]);
  n /= dims[0];
  p[1] = static_cast<int>(n % dims[1]);
  p[2] = static_cast<int>(n / dims[1]);
  return p;
}

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

/// Cell neighbour along `axis` at offset `d`; returns false when it falls
/// outside a Neumann domain.
inline bool cell_neighbor(const GridSpec& s, const Idx& c, int axis, int d, Idx& out) {
  out = c;
  out[axis] += d;
  if (out[axis] < 0 || out[axis] >= s.res[axis]) {
    if (!s.periodic()) return false;
    out[axis] = wrap(out[axis], s.res[axis]);
  }
  return true;
}

/// Face (in the layout of `axis`) on the low side of cell c.
inline Idx low_face(const GridSpec&, const Idx& c, int) { return c; }

/// Face on the high side of cell c along `axis`.
inline Idx high_face(const GridSpec& s, const Idx& c, int axis) {
  Idx f = c;
  f[axis] += 1;
  if (s.periodic() && f[axis] == s.res[axis]) f[axis] = 0;
  return f;
}

}  // namespace smoke::detail
