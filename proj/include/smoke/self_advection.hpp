#pragma once

#include <array>

#include "smoke/grid.hpp"

namespace smoke {

class TransportStencil;

// Momentum transport Adv(v): each velocity component a is carried by the
// skew-symmetric transport stencil on the faces of axis a,
//   Adv(v)_a = -T_a(v) v_a,
// which is bilinear in v and satisfies <Adv(v), v> = 0.

FaceField self_advection(const FaceField& v);
/// J_Adv(v) dv = -T_a(dv) v_a - T_a(v) dv_a
FaceField self_advection_jvp(const FaceField& v, const FaceField& dv);
/// J_Adv(v)^T y
FaceField self_advection_vjp(const FaceField& v, const FaceField& y);
/// out += alpha * J_Adv(v)^T y
void self_advection_vjp_add(const FaceField& v, const FaceField& y, FaceField& out, double alpha = 1.0);
/// out += alpha * Adv(v)
void self_advection_add(const FaceField& v, FaceField& out, double alpha = 1.0);

/// Entry d Adv(v)_f / d v_g for flat face indices f, g (used for local
/// block assembly; cost is proportional to the stencil width).
double self_advection_partial(const FaceField& v, std::size_t f, std::size_t g);

/// Entry d^2 <u, Adv(v)> / dv_f dv_g, i.e. d (J_Adv(v)^T u)_f / dv_g.
/// Independent of v since Adv is bilinear; symmetric in (f, g).
double self_advection_hessian(const FaceField& u, std::size_t f, std::size_t g);

/// The two entry queries above with the stencils looked up once; for hot
/// loops over many entries on one grid.
class AdvectionEntries {
 public:
  explicit AdvectionEntries(const GridSpec& spec);
  double partial(const FaceField& v, std::size_t f, std::size_t g) const;
  double hessian(const FaceField& u, std::size_t f, std::size_t g) const;
  /// Dense nf x nf blocks (row-major) over the faces listed.
  void partial_block(const FaceField& v, const std::size_t* faces, int nf, double* out) const;
  void hessian_block(const FaceField& u, const std::size_t* faces, int nf, double* out) const;

 private:
  double hessian_half(const FaceField& u, std::size_t f, std::size_t g) const;
  GridSpec spec_;
  std::array<const TransportStencil*, 3> st_{};
};

}  // namespace smoke
