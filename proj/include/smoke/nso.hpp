#pragma once

#include <vector>

#include "smoke/grid.hpp"

namespace smoke {

struct NsoParams {
  double K = 1e3;
  double r = 1e3;
  double dt = 0.4;
};

/// Spacetime unknowns of the Navier-Stokes subproblem.
///   v[i], pbar[i]  i = 0..N   velocity and its divergence multiplier
///   u[i], p[i]     i = 0..N-1 control force and pressure p_{i+1}
/// The residual uses the same layout, slot by slot:
///   v    <- stationarity rows
///   pbar <- div v_i
///   u    <- dynamics rows (v_{i+1} - v_i)/dt + Adv(v_{i+1}) - u_i + grad p_{i+1}
///   p    <- div u_i
struct SpacetimeFields {
  std::vector<FaceField> v;
  std::vector<ScalarField> pbar;
  std::vector<FaceField> u;
  std::vector<ScalarField> p;

  static SpacetimeFields zeros(const GridSpec& spec, int steps);
  int steps() const { return static_cast<int>(u.size()); }
  const GridSpec& spec() const { return v.front().spec(); }
};
using SpacetimeState = SpacetimeFields;
using SpacetimeResidual = SpacetimeFields;

double norm_inf(const SpacetimeFields& x);
double norm2(const SpacetimeFields& x);
/// y += alpha * x
void axpy(double alpha, const SpacetimeFields& x, SpacetimeFields& y);
void scale(SpacetimeFields& x, double alpha);
/// Subtract the per-timestep mean of p and pbar.
void remove_pressure_means(SpacetimeFields& x);

/// Proximal shift sigma * (v_i - anchor_i) added to the stationarity rows.
struct Damping {
  double sigma = 0.0;
  const std::vector<FaceField>* anchor = nullptr;  // N + 1 fields
};

/// KKT residual f(x); vstar holds N guiding fields.
void kkt_residual_into(const SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                       SpacetimeResidual& out, const Damping& damp = {});
SpacetimeResidual kkt_residual(const SpacetimeState& x, const std::vector<FaceField>& vstar, const NsoParams& prm,
                               const Damping& damp = {});

/// Cells are coloured by (i mod stride, j mod stride, k mod stride); stride 2
/// gives the 4-/8-colour tagging where no two face neighbours share a colour.
int color_count(const GridSpec& spec, int stride = 2);
int cell_color(const GridSpec& spec, std::size_t cell, int stride = 2);

/// Curvature of the stationarity rows, d(J_Adv(v_i)^T u_{i-1})/dv_i, in the
/// local velocity blocks: dropped (Gauss-Newton), exact, or its positive
/// semidefinite part. Only the local solve changes; the residual is exact.
enum class LocalHessian { None, Exact, Positive };

struct SmootherOptions {
  double omega = 0.8;
  bool parallel = true;
  int color_stride = 2;
  LocalHessian hessian = LocalHessian::Positive;
  /// Visit the colours in reverse order.
  bool reverse = false;
};

/// One SCGS sweep over all colours towards f(x) = rhs (rhs == nullptr
/// means zero). `work` is scratch storage with the spacetime layout.
void scgs_smooth(SpacetimeState& x, const std::vector<FaceField>& vstar, const SpacetimeResidual* rhs,
                 const NsoParams& prm, SpacetimeResidual& work, const SmootherOptions& opt = {},
                 const Damping& damp = {});

/// Local update of one cell: solves the block tridiagonal system of the
/// cell's unknowns across all timesteps against residual r = rhs - f(x).
/// Returned layout is V_0, U_0, V_1, ..., U_{N-1}, V_N with each block the
/// 2d cell faces (low/high per axis) followed by the centre value.
std::vector<double> scgs_cell_delta(const SpacetimeState& x, const SpacetimeResidual& r, const NsoParams& prm,
                                    std::size_t cell, double sigma = 0.0,
                                    LocalHessian hess = LocalHessian::Positive);

}  // namespace smoke
