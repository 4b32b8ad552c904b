#include "smoke/self_advection.hpp"

#include <vector>

#include "smoke/stencil.hpp"

namespace smoke {

void self_advection_add(const FaceField& v, FaceField& out, double alpha) {
  const GridSpec& s = v.spec();
  for (int a = 0; a < s.dim; ++a) {
    const auto& st = TransportStencil::get(s, a);
    const auto w = st.link_speeds(v);
    st.apply_add(w, v.component(a), out.component(a), -alpha);
  }
}

FaceField self_advection(const FaceField& v) {
  FaceField out(v.spec());
  self_advection_add(v, out);
  return out;
}

FaceField self_advection_jvp(const FaceField& v, const FaceField& dv) {
  const GridSpec& s = v.spec();
  FaceField out(s);
  for (int a = 0; a < s.dim; ++a) {
    const auto& st = TransportStencil::get(s, a);
    const auto w = st.link_speeds(v);
    const auto wd = st.link_speeds(dv);
    st.apply_add(wd, v.component(a), out.component(a), -1.0);
    st.apply_add(w, dv.component(a), out.component(a), -1.0);
  }
  return out;
}

void self_advection_vjp_add(const FaceField& v, const FaceField& y, FaceField& out, double alpha) {
  const GridSpec& s = v.spec();
  for (int a = 0; a < s.dim; ++a) {
    const auto& st = TransportStencil::get(s, a);
    const auto w = st.link_speeds(v);
    // (-T_a(v))^T = T_a(v)
    st.apply_add(w, y.component(a), out.component(a), alpha);
    st.contract_add(v.component(a), y.component(a), out, -alpha);
  }
}

FaceField self_advection_vjp(const FaceField& v, const FaceField& y) {
  FaceField out(v.spec());
  self_advection_vjp_add(v, y, out);
  return out;
}

AdvectionEntries::AdvectionEntries(const GridSpec& spec) : spec_(spec) {
  for (int a = 0; a < spec.dim; ++a) st_[a] = &TransportStencil::get(spec, a);
}

double AdvectionEntries::partial(const FaceField& v, std::size_t f, std::size_t g) const {
  int a = 0;
  while (a + 1 < spec_.dim && f >= v.offset(a + 1)) ++a;
  const auto& st = *st_[a];
  const std::size_t off = v.offset(a);
  const std::size_t n = f - off;
  const auto vals = v.values();
  const double c = 0.5 / spec_.h;
  double d = 0.0;
  for (std::uint32_t l : st.node_links(n)) {
    const bool left = st.link_left(l) == n;
    const double sgn = left ? 1.0 : -1.0;
    const std::size_t other = left ? st.link_right(l) : st.link_left(l);
    double w = 0.0, wg = 0.0;
    for (const FaceRef& r : st.link_refs(l)) {
      w += r.weight * vals[r.flat];
      if (r.flat == g) wg += r.weight;
    }
    if (off + other == g) d += sgn * c * w;
    d += sgn * c * wg * vals[off + other];
  }
  return d;
}

// sum over links l touching node `g` of d/dv_f of the link term
//   c * w_l(v) * (u_L v_R - u_R v_L)
// differentiated once in v_g (through the transported value).
double AdvectionEntries::hessian_half(const FaceField& u, std::size_t f, std::size_t g) const {
  int a = 0;
  while (a + 1 < spec_.dim && g >= u.offset(a + 1)) ++a;
  const auto& st = *st_[a];
  const std::size_t off = u.offset(a);
  const std::size_t n = g - off;
  const auto uv = u.values();
  const double c = 0.5 / spec_.h;
  double d = 0.0;
  for (std::uint32_t l : st.node_links(n)) {
    double alpha = 0.0;
    for (const FaceRef& r : st.link_refs(l))
      if (r.flat == f) alpha += r.weight;
    if (alpha == 0.0) continue;
    if (st.link_right(l) == n) d += c * alpha * uv[off + st.link_left(l)];
    if (st.link_left(l) == n) d -= c * alpha * uv[off + st.link_right(l)];
  }
  return d;
}

double AdvectionEntries::hessian(const FaceField& u, std::size_t f, std::size_t g) const {
  return hessian_half(u, f, g) + hessian_half(u, g, f);
}

void AdvectionEntries::partial_block(const FaceField& v, const std::size_t* faces, int nf, double* out) const {
  const double c = 0.5 / spec_.h;
  const auto vals = v.values();
  for (int q = 0; q < nf; ++q) {
    double* row = out + q * nf;
    for (int g = 0; g < nf; ++g) row[g] = 0.0;
    const std::size_t f = faces[q];
    int a = 0;
    while (a + 1 < spec_.dim && f >= v.offset(a + 1)) ++a;
    const auto& st = *st_[a];
    const std::size_t off = v.offset(a);
    const std::size_t n = f - off;
    for (std::uint32_t l : st.node_links(n)) {
      const bool left = st.link_left(l) == n;
      const double sc = left ? c : -c;
      const std::size_t other = off + (left ? st.link_right(l) : st.link_left(l));
      double w = 0.0;
      for (const FaceRef& r : st.link_refs(l)) {
        w += r.weight * vals[r.flat];
        for (int g = 0; g < nf; ++g)
          if (faces[g] == r.flat) row[g] += sc * r.weight * vals[other];
      }
      for (int g = 0; g < nf; ++g)
        if (faces[g] == other) row[g] += sc * w;
    }
  }
}

void AdvectionEntries::hessian_block(const FaceField& u, const std::size_t* faces, int nf, double* out) const {
  const double c = 0.5 / spec_.h;
  const auto uv = u.values();
  for (int i = 0; i < nf * nf; ++i) out[i] = 0.0;
  // out(q, g) += hessian_half(faces[q], faces[g]) and its mirror
  for (int g = 0; g < nf; ++g) {
    const std::size_t fg = faces[g];
    int a = 0;
    while (a + 1 < spec_.dim && fg >= u.offset(a + 1)) ++a;
    const auto& st = *st_[a];
    const std::size_t off = u.offset(a);
    const std::size_t n = fg - off;
    for (std::uint32_t l : st.node_links(n)) {
      double t = 0.0;
      if (st.link_right(l) == n) t += c * uv[off + st.link_left(l)];
      if (st.link_left(l) == n) t -= c * uv[off + st.link_right(l)];
      for (const FaceRef& r : st.link_refs(l))
        for (int q = 0; q < nf; ++q)
          if (faces[q] == r.flat) {
            out[q * nf + g] += r.weight * t;
            out[g * nf + q] += r.weight * t;
          }
    }
  }
}

double self_advection_partial(const FaceField& v, std::size_t f, std::size_t g) {
  return AdvectionEntries(v.spec()).partial(v, f, g);
}

double self_advection_hessian(const FaceField& u, std::size_t f, std::size_t g) {
  return AdvectionEntries(u.spec()).hessian(u, f, g);
}

}  // namespace smoke
