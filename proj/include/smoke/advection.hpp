#pragma once

#include <utility>
#include <vector>

#include "smoke/grid.hpp"
#include "smoke/stencil.hpp"

namespace smoke {

struct TruncationReport {
  int k_used = 0;
  double last_term_norm = 0.0;
};

struct AdvectionOptions {
  double truncation_tol = 1e-5;
  int max_terms = 128;
};

/// Passive scalar transport rho -> exp(dt T(v)) rho with T(v) the
/// skew-symmetric central stencil, evaluated by a truncated Taylor series.
/// The number of terms k is chosen adaptively (the first term whose
/// inf-norm drops below truncation_tol ends the series); the Jacobian
/// applications take k explicitly so forward and adjoint use the same
/// polynomial.
class AdvectionOperator {
 public:
  explicit AdvectionOperator(const FaceField& v, AdvectionOptions opt = {});

  const GridSpec& spec() const { return stencil_->spec(); }
  const FaceField& velocity() const { return v_; }
  const AdvectionOptions& options() const { return opt_; }

  /// T(v) rho
  ScalarField apply_stencil(const ScalarField& rho) const;

  std::pair<ScalarField, TruncationReport> advect(const ScalarField& rho, double dt) const;
  /// Sum of the first k+1 Taylor terms.
  ScalarField advect_fixed(const ScalarField& rho, double dt, int k) const;

  /// (d advect / d rho)^T mu for the degree-k polynomial.
  ScalarField jacobian_rho_T(const ScalarField& mu, double dt, int k) const;
  /// Adaptive variant (k chosen on mu with the same rule as advect).
  std::pair<ScalarField, TruncationReport> jacobian_rho_T(const ScalarField& mu, double dt) const;

  /// (d advect / d v)^T mu, differentiating every Taylor term of the
  /// degree-k polynomial.
  FaceField jacobian_v_T(const ScalarField& rho, const ScalarField& mu, double dt, int k) const;
  /// (d advect / d v) dv, the forward linearisation of the same polynomial.
  ScalarField jacobian_v(const ScalarField& rho, const FaceField& dv, double dt, int k) const;

 private:
  std::vector<ScalarField> powers(const ScalarField& x, int count, double sign) const;

  FaceField v_;
  AdvectionOptions opt_;
  const TransportStencil* stencil_;
  std::vector<double> w_;
};

/// Reference semi-Lagrangian operator: backtrace each cell centre by
/// dt * v(x) and sample rho bilinearly (wrap for periodic, clamp for
/// Neumann).
ScalarField semi_lagrangian(const ScalarField& rho, const FaceField& v, double dt);

/// Velocity sampled at cell centres (average of the two faces per axis).
std::array<double, 3> velocity_at_cell(const FaceField& v, int i, int j, int k);

}  // namespace smoke
