#pragma once

#include <Eigen/Dense>
#include <vector>

#include "smoke/field_ops.hpp"
#include "smoke/nso.hpp"
#include "smoke/self_advection.hpp"

namespace smoke::test {

// Dense Newton solve of the Navier-Stokes subproblem's optimality system,
// assembled here from the primitive operators (not from kkt_residual).
// Unknown order per step: v_i, pbar_i, u_i, p_i (wall faces dropped).
class DenseKkt {
 public:
  DenseKkt(const GridSpec& s, int N, std::vector<FaceField> vstar, NsoParams prm)
      : s_(s), N_(N), vstar_(std::move(vstar)), prm_(prm) {
    FaceField probe(s, 1.0);
    enforce_walls(probe);
    for (std::size_t f = 0; f < probe.size(); ++f)
      if (probe[f] != 0.0) open_.push_back(f);
    nf_ = static_cast<int>(open_.size());
    nc_ = static_cast<int>(s.cell_count());
  }

  int size() const { return (N_ + 1) * (nf_ + nc_) + N_ * (nf_ + nc_); }

  SpacetimeFields unpack(const Eigen::VectorXd& z) const {
    auto x = SpacetimeFields::zeros(s_, N_);
    int o = 0;
    for (int i = 0; i <= N_; ++i) {
      for (int k = 0; k < nf_; ++k) x.v[i][open_[k]] = z[o++];
      for (int k = 0; k < nc_; ++k) x.pbar[i][k] = z[o++];
      if (i < N_) {
        for (int k = 0; k < nf_; ++k) x.u[i][open_[k]] = z[o++];
        for (int k = 0; k < nc_; ++k) x.p[i][k] = z[o++];
      }
    }
    return x;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& z) const {
    const auto x = unpack(z);
    const double kr = prm_.K / prm_.r, idt = 1.0 / prm_.dt;
    Eigen::VectorXd out(size());
    int o = 0;
    for (int i = 0; i <= N_; ++i) {
      // d/dv_i of the scaled Lagrangian
      FaceField st(s_);
      if (i < N_) {
        for (std::size_t f = 0; f < st.size(); ++f)
          st[f] = kr * (x.v[i][f] - vstar_[i][f]) - idt * x.u[i][f];
      }
      if (i >= 1) {
        axpy(idt, x.u[i - 1].values(), st.values());
        auto jt = self_advection_vjp(x.v[i], x.u[i - 1]);
        axpy(1.0, jt.values(), st.values());
      }
      auto g = gradient(x.pbar[i]);
      axpy(1.0, g.values(), st.values());
      for (int k = 0; k < nf_; ++k) out[o++] = st[open_[k]];
      auto d = divergence(x.v[i]);
      for (int k = 0; k < nc_; ++k) out[o++] = d[k];
      if (i < N_) {
        FaceField dyn(s_);
        for (std::size_t f = 0; f < dyn.size(); ++f) dyn[f] = (x.v[i + 1][f] - x.v[i][f]) * idt - x.u[i][f];
        auto adv = self_advection(x.v[i + 1]);
        axpy(1.0, adv.values(), dyn.values());
        auto gp = gradient(x.p[i]);
        axpy(1.0, gp.values(), dyn.values());
        for (int k = 0; k < nf_; ++k) out[o++] = dyn[open_[k]];
        auto du = divergence(x.u[i]);
        for (int k = 0; k < nc_; ++k) out[o++] = du[k];
      }
    }
    return out;
  }

  // Newton from zero with a central-difference Jacobian (exact for this
  // quadratic residual) and minimum-norm steps for the pressure null space.
  SpacetimeFields solve(double tol = 1e-12, int max_iter = 30) const {
    const int n = size();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < max_iter; ++it) {
      Eigen::VectorXd F = residual(z);
      if (F.cwiseAbs().maxCoeff() < tol) break;
      Eigen::MatrixXd J(n, n);
      for (int c = 0; c < n; ++c) {
        Eigen::VectorXd zp = z, zm = z;
        zp[c] += 0.5;
        zm[c] -= 0.5;
        J.col(c) = residual(zp) - residual(zm);
      }
      z -= J.completeOrthogonalDecomposition().solve(F);
    }
    auto x = unpack(z);
    remove_pressure_means(x);
    return x;
  }

 private:
  GridSpec s_;
  int N_;
  std::vector<FaceField> vstar_;
  NsoParams prm_;
  std::vector<std::size_t> open_;
  int nf_ = 0, nc_ = 0;
};

}  // namespace smoke::test
