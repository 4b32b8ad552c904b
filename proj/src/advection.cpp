#include "smoke/advection.hpp"

#include <cmath>

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"

namespace smoke {

AdvectionOperator::AdvectionOperator(const FaceField& v, AdvectionOptions opt)
    : v_(v), opt_(opt), stencil_(&TransportStencil::get(v.spec(), -1)) {
  if (!(opt_.truncation_tol > 0.0)) throw InvalidArgument("truncation tolerance must be positive");
  if (opt_.max_terms < 1) throw InvalidArgument("term cap must be >= 1");
  w_ = stencil_->link_speeds(v_);
}

ScalarField AdvectionOperator::apply_stencil(const ScalarField& rho) const {
  if (rho.spec() != spec()) throw SpecMismatch("advection of a field on a different grid");
  ScalarField out(spec());
  stencil_->apply(w_, rho.values(), out.values());
  return out;
}

std::pair<ScalarField, TruncationReport> AdvectionOperator::advect(const ScalarField& rho, double dt) const {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (rho.spec() != spec()) throw SpecMismatch("advection of a field on a different grid");
  ScalarField acc(rho);
  ScalarField term(rho);
  ScalarField next(spec());
  for (int j = 1; j <= opt_.max_terms; ++j) {
    stencil_->apply(w_, term.values(), next.values(), dt / j);
    std::swap(term, next);
    axpy(1.0, term.values(), acc.values());
    const double tn = norm_inf(term.values());
    if (tn < opt_.truncation_tol) return {std::move(acc), TruncationReport{j, tn}};
  }
  throw TruncationOverflow("Taylor series of the advection exponential exceeded " + std::to_string(opt_.max_terms) +
                           " terms; reduce dt*|v|/h");
}

ScalarField AdvectionOperator::advect_fixed(const ScalarField& rho, double dt, int k) const {
  ScalarField acc(rho);
  ScalarField term(rho);
  ScalarField next(spec());
  for (int j = 1; j <= k; ++j) {
    stencil_->apply(w_, term.values(), next.values(), dt / j);
    std::swap(term, next);
    axpy(1.0, term.values(), acc.values());
  }
  return acc;
}

ScalarField AdvectionOperator::jacobian_rho_T(const ScalarField& mu, double dt, int k) const {
  // T^T = -T, so the transposed polynomial is the series in -dt.
  ScalarField acc(mu);
  ScalarField term(mu);
  ScalarField next(spec());
  for (int j = 1; j <= k; ++j) {
    stencil_->apply(w_, term.values(), next.values(), -dt / j);
    std::swap(term, next);
    axpy(1.0, term.values(), acc.values());
  }
  return acc;
}

std::pair<ScalarField, TruncationReport> AdvectionOperator::jacobian_rho_T(const ScalarField& mu, double dt) const {
  ScalarField acc(mu);
  ScalarField term(mu);
  ScalarField next(spec());
  for (int j = 1; j <= opt_.max_terms; ++j) {
    stencil_->apply(w_, term.values(), next.values(), -dt / j);
    std::swap(term, next);
    axpy(1.0, term.values(), acc.values());
    const double tn = norm_inf(term.values());
    if (tn < opt_.truncation_tol) return {std::move(acc), TruncationReport{j, tn}};
  }
  throw TruncationOverflow("Taylor series of the transposed advection exceeded the term cap");
}

std::vector<ScalarField> AdvectionOperator::powers(const ScalarField& x, int count, double sign) const {
  std::vector<ScalarField> p;
  p.reserve(count);
  if (count == 0) return p;
  p.push_back(x);
  for (int n = 1; n < count; ++n) {
    ScalarField y(spec());
    stencil_->apply(w_, p.back().values(), y.values(), sign);
    p.push_back(std::move(y));
  }
  return p;
}

FaceField AdvectionOperator::jacobian_v_T(const ScalarField& rho, const ScalarField& mu, double dt, int k) const {
  FaceField g(spec());
  if (k <= 0) return g;
  // d/dv of sum_j c_j T^j rho = sum_j c_j sum_{n+m=j-1} T^m dT T^n rho.
  // Pairing a_n = T^n rho with b_m = (T^T)^m mu:
  //   g = sum_n contract(a_n, sum_m c_{n+m+1} b_m).
  std::vector<double> c(k + 1);
  c[0] = 1.0;
  for (int j = 1; j <= k; ++j) c[j] = c[j - 1] * dt / j;
  const auto a = powers(rho, k, 1.0);
  const auto b = powers(mu, k, -1.0);
  ScalarField wn(spec());
  for (int n = 0; n < k; ++n) {
    fill(wn.values(), 0.0);
    for (int m = 0; m + n + 1 <= k; ++m) axpy(c[n + m + 1], b[m].values(), wn.values());
    stencil_->contract_add(a[n].values(), wn.values(), g);
  }
  return g;
}

ScalarField AdvectionOperator::jacobian_v(const ScalarField& rho, const FaceField& dv, double dt, int k) const {
  ScalarField out(spec());
  if (k <= 0) return out;
  std::vector<double> c(k + 1);
  c[0] = 1.0;
  for (int j = 1; j <= k; ++j) c[j] = c[j - 1] * dt / j;
  const auto wd = stencil_->link_speeds(dv);
  const auto a = powers(rho, k, 1.0);
  // sum_j c_j sum_{m+n=j-1} T^m dT a_n = sum_m T^m (sum_n c_{m+n+1} dT a_n).
  // Horner in T over m.
  std::vector<ScalarField> s;
  s.reserve(k);
  for (int m = 0; m < k; ++m) {
    ScalarField acc(spec());
    for (int n = 0; m + n + 1 <= k; ++n) {
      ScalarField t(spec());
      stencil_->apply(wd, a[n].values(), t.values());
      axpy(c[m + n + 1], t.values(), acc.values());
    }
    s.push_back(std::move(acc));
  }
  for (int m = k - 1; m >= 0; --m) {
    ScalarField t(spec());
    stencil_->apply(w_, out.values(), t.values());
    axpy(1.0, s[m].values(), t.values());
    out = std::move(t);
  }
  return out;
}

std::array<double, 3> velocity_at_cell(const FaceField& v, int i, int j, int k) {
  const GridSpec& s = v.spec();
  std::array<double, 3> u{0.0, 0.0, 0.0};
  const detail::Idx c{i, j, k};
  for (int a = 0; a < s.dim; ++a) {
    const detail::Idx hi = detail::high_face(s, c, a);
    u[a] = 0.5 * (v.at(a, c[0], c[1], c[2]) + v.at(a, hi[0], hi[1], hi[2]));
  }
  return u;
}

ScalarField semi_lagrangian(const ScalarField& rho, const FaceField& v, double dt) {
  const GridSpec& s = rho.spec();
  if (v.spec() != s) throw SpecMismatch("semi-Lagrangian velocity on a different grid");
  ScalarField out(s);
  const int n = static_cast<int>(s.cell_count());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    const detail::Idx C = detail::unlinear(s.res, c);
    const auto u = velocity_at_cell(v, C[0], C[1], C[2]);
    int i0[3] = {0, 0, 0}, i1[3] = {0, 0, 0};
    double fr[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < s.dim; ++a) {
      // Back-traced position in cell-index units.
      double x = C[a] - dt * u[a] / s.h;
      if (!s.periodic()) x = std::clamp(x, 0.0, static_cast<double>(s.res[a] - 1));
      const double fl = std::floor(x);
      fr[a] = x - fl;
      int lo = static_cast<int>(fl);
      int hi = lo + 1;
      if (s.periodic()) {
        lo = detail::wrap(lo, s.res[a]);
        hi = detail::wrap(hi, s.res[a]);
      } else {
        hi = std::min(hi, s.res[a] - 1);
      }
      i0[a] = lo;
      i1[a] = hi;
    }
    double acc = 0.0;
    for (int bz = 0; bz < (s.dim == 3 ? 2 : 1); ++bz)
      for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx) {
          const double w = (bx ? fr[0] : 1.0 - fr[0]) * (by ? fr[1] : 1.0 - fr[1]) *
                           (s.dim == 3 ? (bz ? fr[2] : 1.0 - fr[2]) : 1.0);
          if (w == 0.0) continue;
          acc += w * rho.at(bx ? i1[0] : i0[0], by ? i1[1] : i0[1], bz ? i1[2] : i0[2]);
        }
    out.data()[c] = acc;
  }
  return out;
}

}  // namespace smoke
