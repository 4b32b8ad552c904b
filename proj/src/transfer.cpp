#include "smoke/transfer.hpp"

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"

namespace smoke {

using detail::Idx;

namespace {

void check_pair(const GridSpec& fine, const GridSpec& coarse) {
  if (!fine.can_coarsen() || fine.coarsened() != coarse)
    throw SpecMismatch("transfer between incompatible grids " + describe(fine) + " and " + describe(coarse));
}

// Bilinear 1D stencil of a fine cell-centred index onto coarse cells:
// returns the two coarse indices and their weights.
struct Pair1D {
  int i0, i1;
  double w0, w1;
};

inline Pair1D cell_weights(int fine_i, int coarse_n, bool periodic) {
  const int I = fine_i / 2;
  int J = (fine_i % 2 == 0) ? I - 1 : I + 1;
  if (J < 0 || J >= coarse_n) J = periodic ? detail::wrap(J, coarse_n) : I;
  return {I, J, 0.75, 0.25};
}

}  // namespace

void restrict_cells(const ScalarField& fine, ScalarField& coarse) {
  const GridSpec& fs = fine.spec();
  const GridSpec& cs = coarse.spec();
  check_pair(fs, cs);
  const double w = 1.0 / (1 << fs.dim);
  const int n = static_cast<int>(cs.cell_count());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    const Idx C = detail::unlinear(cs.res, c);
    double acc = 0.0;
    const int kz = fs.dim == 3 ? 2 : 1;
    for (int dz = 0; dz < kz; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          acc += fine.data()[detail::linear(fs.res, {2 * C[0] + dx, 2 * C[1] + dy, fs.dim == 3 ? 2 * C[2] + dz : 0})];
    coarse.data()[c] = w * acc;
  }
}

void prolong_cells_add(const ScalarField& coarse, ScalarField& fine, double alpha) {
  const GridSpec& fs = fine.spec();
  const GridSpec& cs = coarse.spec();
  check_pair(fs, cs);
  const int n = static_cast<int>(fs.cell_count());
#pragma omp parallel for schedule(static)
  for (int f = 0; f < n; ++f) {
    const Idx F = detail::unlinear(fs.res, f);
    Pair1D p[3];
    for (int a = 0; a < 3; ++a)
      p[a] = a < fs.dim ? cell_weights(F[a], cs.res[a], fs.periodic()) : Pair1D{0, 0, 1.0, 0.0};
    double acc = 0.0;
    for (int bz = 0; bz < (fs.dim == 3 ? 2 : 1); ++bz)
      for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx) {
          const double w = (bx ? p[0].w1 : p[0].w0) * (by ? p[1].w1 : p[1].w0) * (bz ? p[2].w1 : p[2].w0);
          const Idx C{bx ? p[0].i1 : p[0].i0, by ? p[1].i1 : p[1].i0, bz ? p[2].i1 : p[2].i0};
          acc += w * coarse.data()[detail::linear(cs.res, C)];
        }
    fine.data()[f] += alpha * acc;
  }
}

void restrict_faces(const FaceField& fine, FaceField& coarse) {
  const GridSpec& fs = fine.spec();
  const GridSpec& cs = coarse.spec();
  check_pair(fs, cs);
  const double perp_w = 1.0 / (1 << (fs.dim - 1));
  for (int a = 0; a < fs.dim; ++a) {
    const auto fd = fs.face_dims(a);
    const auto cd = cs.face_dims(a);
    const auto fc = fine.component(a);
    auto cc = coarse.component(a);
    const int n = static_cast<int>(cc.size());
#pragma omp parallel for schedule(static)
    for (int c = 0; c < n; ++c) {
      const Idx C = detail::unlinear(cd, c);
      if (!cs.periodic() && (C[a] == 0 || C[a] == cs.res[a])) {
        cc[c] = 0.0;
        continue;
      }
      double acc = 0.0;
      // Enumerate perpendicular children.
      const int nperp = 1 << (fs.dim - 1);
      for (int m = 0; m < nperp; ++m) {
        Idx base{0, 0, 0};
        int bit = 0;
        for (int b = 0; b < fs.dim; ++b) {
          if (b == a) continue;
          base[b] = 2 * C[b] + ((m >> bit) & 1);
          ++bit;
        }
        for (int off = -1; off <= 1; ++off) {
          Idx f = base;
          f[a] = 2 * C[a] + off;
          if (fs.periodic()) f[a] = detail::wrap(f[a], fs.res[a]);
          const double w = off == 0 ? 0.5 : 0.25;
          acc += w * fc[detail::linear(fd, f)];
        }
      }
      cc[c] = perp_w * acc;
    }
  }
}

void prolong_faces_add(const FaceField& coarse, FaceField& fine, double alpha) {
  const GridSpec& fs = fine.spec();
  const GridSpec& cs = coarse.spec();
  check_pair(fs, cs);
  for (int a = 0; a < fs.dim; ++a) {
    const auto fd = fs.face_dims(a);
    const auto cd = cs.face_dims(a);
    auto fc = fine.component(a);
    const auto cc = coarse.component(a);
    const int n = static_cast<int>(fc.size());
#pragma omp parallel for schedule(static)
    for (int f = 0; f < n; ++f) {
      const Idx F = detail::unlinear(fd, f);
      if (!fs.periodic() && (F[a] == 0 || F[a] == fs.res[a])) continue;
      // Per-axis (index, weight) pairs.
      int idx[3][2];
      double wt[3][2];
      for (int b = 0; b < 3; ++b) {
        if (b >= fs.dim) {
          idx[b][0] = idx[b][1] = 0;
          wt[b][0] = 1.0;
          wt[b][1] = 0.0;
        } else if (b == a) {
          const int I = F[a] / 2;
          if (F[a] % 2 == 0) {
            idx[b][0] = idx[b][1] = I;
            wt[b][0] = 1.0;
            wt[b][1] = 0.0;
          } else {
            idx[b][0] = I;
            idx[b][1] = I + 1;
            if (cs.periodic()) idx[b][1] = detail::wrap(idx[b][1], cs.res[a]);
            wt[b][0] = wt[b][1] = 0.5;
          }
        } else {
          const Pair1D p = cell_weights(F[b], cs.res[b], fs.periodic());
          idx[b][0] = p.i0;
          idx[b][1] = p.i1;
          wt[b][0] = p.w0;
          wt[b][1] = p.w1;
        }
      }
      double acc = 0.0;
      for (int bz = 0; bz < 2; ++bz)
        for (int by = 0; by < 2; ++by)
          for (int bx = 0; bx < 2; ++bx) {
            const double w = wt[0][bx] * wt[1][by] * wt[2][bz];
            if (w == 0.0) continue;
            acc += w * cc[detail::linear(cd, {idx[0][bx], idx[1][by], idx[2][bz]})];
          }
      fc[f] += alpha * acc;
    }
  }
}

ScalarField restrict_cells(const ScalarField& fine) {
  ScalarField c(fine.spec().coarsened());
  restrict_cells(fine, c);
  return c;
}

FaceField restrict_faces(const FaceField& fine) {
  FaceField c(fine.spec().coarsened());
  restrict_faces(fine, c);
  return c;
}

}  // namespace smoke
