#include "smoke/nso.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <exception>
#include <limits>

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/self_advection.hpp"

namespace smoke {

SpacetimeFields SpacetimeFields::zeros(const GridSpec& spec, int steps) {
  if (steps < 1) throw InvalidArgument("spacetime state needs N >= 1");
  SpacetimeFields x;
  x.v.assign(steps + 1, FaceField(spec));
  x.pbar.assign(steps + 1, ScalarField(spec));
  x.u.assign(steps, FaceField(spec));
  x.p.assign(steps, ScalarField(spec));
  return x;
}

double norm_inf(const SpacetimeFields& x) {
  double m = 0.0;
  for (const auto& f : x.v) m = std::max(m, norm_inf(f.values()));
  for (const auto& f : x.pbar) m = std::max(m, norm_inf(f.values()));
  for (const auto& f : x.u) m = std::max(m, norm_inf(f.values()));
  for (const auto& f : x.p) m = std::max(m, norm_inf(f.values()));
  return m;
}

double norm2(const SpacetimeFields& x) {
  double s = 0.0;
  for (const auto& f : x.v) s += dot(f, f);
  for (const auto& f : x.pbar) s += dot(f, f);
  for (const auto& f : x.u) s += dot(f, f);
  for (const auto& f : x.p) s += dot(f, f);
  return std::sqrt(s);
}

void axpy(double alpha, const SpacetimeFields& x, SpacetimeFields& y) {
  for (std::size_t i = 0; i < x.v.size(); ++i) axpy(alpha, x.v[i].values(), y.v[i].values());
  for (std::size_t i = 0; i < x.pbar.size(); ++i) axpy(alpha, x.pbar[i].values(), y.pbar[i].values());
  for (std::size_t i = 0; i < x.u.size(); ++i) axpy(alpha, x.u[i].values(), y.u[i].values());
  for (std::size_t i = 0; i < x.p.size(); ++i) axpy(alpha, x.p[i].values(), y.p[i].values());
}

void scale(SpacetimeFields& x, double alpha) {
  for (auto& f : x.v) scale(f.values(), alpha);
  for (auto& f : x.pbar) scale(f.values(), alpha);
  for (auto& f : x.u) scale(f.values(), alpha);
  for (auto& f : x.p) scale(f.values(), alpha);
}

void remove_pressure_means(SpacetimeFields& x) {
  for (auto& f : x.pbar) remove_mean(f);
  for (auto& f : x.p) remove_mean(f);
}

namespace {

bool same_shape(const SpacetimeFields& a, const SpacetimeFields& b) {
  return a.v.size() == b.v.size() && a.u.size() == b.u.size() && a.pbar.size() == b.pbar.size() &&
         a.p.size() == b.p.size() && !a.v.empty() && a.spec() == b.spec();
}

void check_state(const SpacetimeState& x, const std::vector<FaceField>& vstar) {
  const int N = x.steps();
  if (N < 1 || static_cast<int>(x.v.size()) != N + 1 || static_cast<int>(x.pbar.size()) != N + 1 ||
      static_cast<int>(x.p.size()) != N)
    throw InvalidArgument("inconsistent spacetime state lengths");
  if (static_cast<int>(vstar.size()) != N) throw InvalidArgument("guiding field count must equal N");
  const GridSpec& s = x.spec();
  for (const auto& f : vstar)
    if (f.spec() != s) throw SpecMismatch("guiding field on a different grid");
}

}  // namespace

void kkt_residual_into(const SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                       SpacetimeResidual& out, const Damping& damp) {
  check_state(x, vstar);
  const int N = x.steps();
  const GridSpec& s = x.spec();
  if (out.v.empty() || !same_shape(x, out)) out = SpacetimeFields::zeros(s, N);
  const double kr = prm.K / prm.r;
  const double idt = 1.0 / prm.dt;

#pragma omp parallel for schedule(static)
  for (int i = 0; i <= N; ++i) {
    // stationarity
    FaceField& st = out.v[i];
    fill(st.values(), 0.0);
    if (i < N) {
      axpy(kr, x.v[i].values(), st.values());
      axpy(-kr, vstar[i].values(), st.values());
      axpy(-idt, x.u[i].values(), st.values());
    }
    if (i >= 1) {
      axpy(idt, x.u[i - 1].values(), st.values());
      self_advection_vjp_add(x.v[i], x.u[i - 1], st, 1.0);
    }
    if (damp.sigma != 0.0) {
      axpy(damp.sigma, x.v[i].values(), st.values());
      axpy(-damp.sigma, (*damp.anchor)[i].values(), st.values());
    }
    add_gradient(x.pbar[i], 1.0, st);
    enforce_walls(st);
    divergence_into(x.v[i], out.pbar[i]);
    if (i < N) {
      FaceField& dy = out.u[i];
      copy(x.v[i + 1].values(), dy.values());
      axpy(-1.0, x.v[i].values(), dy.values());
      scale(dy.values(), idt);
      axpy(-1.0, x.u[i].values(), dy.values());
      self_advection_add(x.v[i + 1], dy, 1.0);
      add_gradient(x.p[i], 1.0, dy);
      enforce_walls(dy);
      divergence_into(x.u[i], out.p[i]);
    }
  }
}

SpacetimeResidual kkt_residual(const SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                               const Damping& damp) {
  SpacetimeResidual out;
  kkt_residual_into(x, vstar, prm, out, damp);
  return out;
}

int color_count(const GridSpec& spec, int stride) {
  int n = 1;
  for (int a = 0; a < spec.dim; ++a) n *= stride;
  return n;
}

int cell_color(const GridSpec& spec, std::size_t cell, int stride) {
  const detail::Idx c = detail::unlinear(spec.res, cell);
  int col = 0;
  for (int a = spec.dim - 1; a >= 0; --a) col = col * stride + c[a] % stride;
  return col;
}

namespace {

struct CellFaces {
  int nf = 0;
  std::size_t cell = 0;
  std::array<std::size_t, 6> flat{};
  std::array<bool, 6> wall{};
  std::array<double, 6> grad{};  // d (grad q)_face / d q_cell; div uses -grad
};

CellFaces cell_faces(const FaceField& layout, std::size_t cell) {
  const GridSpec& s = layout.spec();
  CellFaces cf;
  cf.nf = 2 * s.dim;
  cf.cell = cell;
  const detail::Idx c = detail::unlinear(s.res, cell);
  for (int a = 0; a < s.dim; ++a) {
    const detail::Idx hi = detail::high_face(s, c, a);
    cf.flat[2 * a] = layout.offset(a) + layout.face_index(a, c[0], c[1], c[2]);
    cf.flat[2 * a + 1] = layout.offset(a) + layout.face_index(a, hi[0], hi[1], hi[2]);
    cf.wall[2 * a] = !s.periodic() && c[a] == 0;
    cf.wall[2 * a + 1] = !s.periodic() && hi[a] == s.res[a];
    cf.grad[2 * a] = 1.0 / s.h;
    cf.grad[2 * a + 1] = -1.0 / s.h;
  }
  return cf;
}

// Gauss-Jordan with partial pivoting; returns the smallest pivot magnitude.
template <class Mat>
double invert_small(Mat a, Mat& inv) {
  constexpr int M = Mat::RowsAtCompileTime;
  inv.setIdentity();
  double minpiv = std::numeric_limits<double>::infinity();
  for (int k = 0; k < M; ++k) {
    int p = k;
    for (int i = k + 1; i < M; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    minpiv = std::min(minpiv, std::abs(a(p, k)));
    if (a(p, k) == 0.0) return 0.0;
    if (p != k) {
      a.row(p).swap(a.row(k));
      inv.row(p).swap(inv.row(k));
    }
    const double d = 1.0 / a(k, k);
    a.row(k) *= d;
    inv.row(k) *= d;
    for (int i = 0; i < M; ++i) {
      if (i == k || a(i, k) == 0.0) continue;
      const double f = a(i, k);
      a.row(i) -= f * a.row(k);
      inv.row(i) -= f * inv.row(k);
    }
  }
  return minpiv;
}

// Cyclic Jacobi: replaces symmetric h by its positive semidefinite part.
template <class Mat>
void clip_negative(Mat& h) {
  constexpr int n = Mat::RowsAtCompileTime;
  Mat a = h, v = Mat::Identity();
  for (int sweep = 0; sweep < 12; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0), sn = t * cs;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
  }
  h = v * a.diagonal().cwiseMax(0.0).asDiagonal() * v.transpose();
}

template <int M>
void local_solve(const SpacetimeState& x, const SpacetimeResidual& r, const NsoParams& prm, const CellFaces& cf,
                 const AdvectionEntries& adv, double sigma, LocalHessian hess, double* delta) {
  using Mat = Eigen::Matrix<double, M, M>;
  using Vec = Eigen::Matrix<double, M, 1>;
  constexpr int nf = M - 1;
  const int N = x.steps();
  const int nb = 2 * N + 1;
  const double kr = prm.K / prm.r;
  const double idt = 1.0 / prm.dt;
  const std::size_t c = cf.cell;

  // per-thread scratch, reused across cells
  thread_local std::vector<Mat> D, Lo, Up, T, Inv;
  thread_local std::vector<Vec> b, y;
  D.assign(nb, Mat::Zero());
  Lo.assign(nb, Mat::Zero());
  Up.assign(nb, Mat::Zero());
  b.assign(nb, Vec::Zero());
  y.resize(nb);
  Inv.resize(nb);

  // T_i = I/dt + J_Adv(v_i) restricted to the cell's faces, i = 1..N.
  T.assign(N + 1, Mat::Zero());
  double blk[nf * nf];
  auto masked = [&](int q, int g) { return cf.wall[q] || cf.wall[g]; };
  for (int i = 1; i <= N; ++i) {
    adv.partial_block(x.v[i], cf.flat.data(), nf, blk);
    for (int q = 0; q < nf; ++q)
      for (int g = 0; g < nf; ++g)
        if (!masked(q, g)) T[i](q, g) = blk[q * nf + g] + (q == g ? idt : 0.0);
  }

  for (int k = 0; k < nb; ++k) {
    const bool vblock = (k % 2) == 0;
    const int i = k / 2;
    Mat& A = D[k];
    for (int q = 0; q < nf; ++q) {
      if (cf.wall[q]) {
        A(q, q) = 1.0;
        continue;
      }
      A(q, q) = vblock ? kr + sigma : -1.0;
      A(q, nf) = cf.grad[q];
      A(nf, q) = -cf.grad[q];
    }
    if (vblock) {
      if (hess != LocalHessian::None && i >= 1) {
        Eigen::Matrix<double, M - 1, M - 1> H = Eigen::Matrix<double, M - 1, M - 1>::Zero();
        adv.hessian_block(x.u[i - 1], cf.flat.data(), nf, blk);
        for (int q = 0; q < nf; ++q)
          for (int g = 0; g < nf; ++g)
            if (!masked(q, g)) H(q, g) = blk[q * nf + g];
        if (hess == LocalHessian::Positive && !H.isZero(0.0)) {
          // keep only the positive curvature so the velocity block stays SPD
          clip_negative(H);
        }
        A.template topLeftCorner<M - 1, M - 1>() += H;
      }
      for (int q = 0; q < nf; ++q) b[k](q) = cf.wall[q] ? 0.0 : r.v[i][cf.flat[q]];
      b[k](nf) = r.pbar[i][c];
      if (i >= 1) Lo[k] = T[i].transpose();
      if (i < N)
        for (int q = 0; q < nf; ++q)
          if (!cf.wall[q]) Up[k](q, q) = -idt;
    } else {
      for (int q = 0; q < nf; ++q) b[k](q) = cf.wall[q] ? 0.0 : r.u[i][cf.flat[q]];
      b[k](nf) = r.p[i][c];
      for (int q = 0; q < nf; ++q)
        if (!cf.wall[q]) Lo[k](q, q) = -idt;
      Up[k] = T[i + 1];
    }
  }

  // Block Thomas elimination with explicit 5x5 / 7x7 inverses.
  auto invert = [&](int k, const Mat& S) {
    if (invert_small(S, Inv[k]) < 1e-12)
      throw SingularBlock("cell " + std::to_string(c) + ": block pivot below 1e-12 at block " + std::to_string(k));
  };
  invert(0, D[0]);
  y[0] = b[0];
  for (int k = 1; k < nb; ++k) {
    const Mat L = Lo[k] * Inv[k - 1];
    invert(k, D[k] - L * Up[k - 1]);
    y[k] = b[k] - L * y[k - 1];
  }
  Vec nxt = Inv[nb - 1] * y[nb - 1];
  Eigen::Map<Vec>(delta + (nb - 1) * M) = nxt;
  for (int k = nb - 2; k >= 0; --k) {
    nxt = Inv[k] * (y[k] - Up[k] * nxt);
    Eigen::Map<Vec>(delta + k * M) = nxt;
  }
}

void cell_delta(const SpacetimeState& x, const SpacetimeResidual& r, const NsoParams& prm, const CellFaces& cf,
                const AdvectionEntries& adv, double sigma, LocalHessian hess, double* delta) {
  if (cf.nf == 4)
    local_solve<5>(x, r, prm, cf, adv, sigma, hess, delta);
  else
    local_solve<7>(x, r, prm, cf, adv, sigma, hess, delta);
}

// y <- b - y (b empty means zero)
void negate_add(std::span<double> y, std::span<const double> b) {
  scale(y, -1.0);
  if (!b.empty()) axpy(1.0, b, y);
}

}  // namespace

std::vector<double> scgs_cell_delta(const SpacetimeState& x, const SpacetimeResidual& r, const NsoParams& prm,
                                    std::size_t cell, double sigma, LocalHessian hess) {
  const CellFaces cf = cell_faces(x.v.front(), cell);
  std::vector<double> d(static_cast<std::size_t>(2 * x.steps() + 1) * (cf.nf + 1));
  cell_delta(x, r, prm, cf, AdvectionEntries(x.spec()), sigma, hess, d.data());
  return d;
}

void scgs_smooth(SpacetimeState& x, const std::vector<FaceField>& vstar, const SpacetimeResidual* rhs,
                 const NsoParams& prm, SpacetimeResidual& work, const SmootherOptions& opt, const Damping& damp) {
  const GridSpec& s = x.spec();
  const int N = x.steps();
  const int ncell = static_cast<int>(s.cell_count());
  const int m = 2 * s.dim + 1;
  const int ncol = color_count(s, opt.color_stride);
  const AdvectionEntries adv(s);
  for (int cc = 0; cc < ncol; ++cc) {
    const int col = opt.reverse ? ncol - 1 - cc : cc;
    kkt_residual_into(x, vstar, prm, work, damp);
    // work <- rhs - f(x)
    for (int i = 0; i <= N; ++i) {
      negate_add(work.v[i].values(), rhs ? rhs->v[i].values() : std::span<const double>{});
      negate_add(work.pbar[i].values(), rhs ? rhs->pbar[i].values() : std::span<const double>{});
      if (i < N) {
        negate_add(work.u[i].values(), rhs ? rhs->u[i].values() : std::span<const double>{});
        negate_add(work.p[i].values(), rhs ? rhs->p[i].values() : std::span<const double>{});
      }
    }

    // Phase 1: every cell of this colour solves against the residual taken
    // at the start of the colour and stores its update in place of its own
    // residual entries (same-colour cells share no unknowns).
    std::exception_ptr failure;
#pragma omp parallel if (opt.parallel)
    {
      std::vector<double> delta(static_cast<std::size_t>(2 * N + 1) * m);
#pragma omp for schedule(static)
      for (int c = 0; c < ncell; ++c) {
        if (cell_color(s, c, opt.color_stride) != col) continue;
        const CellFaces cf = cell_faces(x.v.front(), c);
        try {
          cell_delta(x, work, prm, cf, adv, damp.sigma, opt.hessian, delta.data());
        } catch (...) {
#pragma omp critical(scgs_failure)
          if (!failure) failure = std::current_exception();
          continue;
        }
        for (int k = 0; k < 2 * N + 1; ++k) {
          const int i = k / 2;
          const double* d = delta.data() + static_cast<std::size_t>(k) * m;
          FaceField& fv = (k % 2 == 0) ? work.v[i] : work.u[i];
          ScalarField& fc = (k % 2 == 0) ? work.pbar[i] : work.p[i];
          for (int q = 0; q < cf.nf; ++q)
            if (!cf.wall[q]) fv[cf.flat[q]] = d[q];
          fc[c] = d[cf.nf];
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
    // Phase 2: apply the damped updates.
#pragma omp parallel for schedule(static) if (opt.parallel)
    for (int c = 0; c < ncell; ++c) {
      if (cell_color(s, c, opt.color_stride) != col) continue;
      const CellFaces cf = cell_faces(x.v.front(), c);
      for (int i = 0; i <= N; ++i) {
        for (int q = 0; q < cf.nf; ++q) {
          if (cf.wall[q]) continue;
          x.v[i][cf.flat[q]] += opt.omega * work.v[i][cf.flat[q]];
          if (i < N) x.u[i][cf.flat[q]] += opt.omega * work.u[i][cf.flat[q]];
        }
        x.pbar[i][c] += opt.omega * work.pbar[i][c];
        if (i < N) x.p[i][c] += opt.omega * work.p[i][c];
      }
    }
  }
}

}  // namespace smoke
