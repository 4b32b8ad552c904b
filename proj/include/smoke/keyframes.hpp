#pragma once

#include <vector>

#include "smoke/grid.hpp"

namespace smoke {

/// Target densities rho*_i at selected timesteps i in [0, N].
class KeyframeSet {
 public:
  KeyframeSet() = default;
  explicit KeyframeSet(int steps);

  void set(int i, ScalarField target);
  int steps() const { return steps_; }
  bool has(int i) const { return i >= 0 && i <= steps_ && flags_[i]; }
  const ScalarField& target(int i) const;
  std::vector<int> indices() const;
  /// Throws InvalidArgument: no keyframe, negative targets or mixed grids.
  void validate() const;

 private:
  int steps_ = 0;
  std::vector<bool> flags_;
  std::vector<ScalarField> targets_;
};

/// Multi-scale density metric C = sum_j w_j G_j^T G_j, G_j a separable
/// Gaussian blur with sigma_j = sigma0 * 2^j. Padding wraps on periodic
/// grids and reflects on Neumann grids.
class GaussianMetric {
 public:
  /// levels <= 0 picks log2(min res) - 1 (at least 1).
  GaussianMetric(const GridSpec& spec, int levels = 0, double sigma0 = 1.0, std::vector<double> weights = {});

  const GridSpec& spec() const { return spec_; }
  int levels() const { return static_cast<int>(kernels_.size()); }
  double sigma(int j) const { return sigma_[j]; }
  double weight(int j) const { return weights_[j]; }

  /// c * sum_j w_j G_j^T G_j x
  ScalarField apply(const ScalarField& x, double c = 1.0) const;
  /// x^T C x / 2
  double energy(const ScalarField& x) const;

  ScalarField blur(const ScalarField& x, int level) const;
  ScalarField blur_transpose(const ScalarField& x, int level) const;

  static int default_levels(const GridSpec& spec);

 private:
  void pass(const ScalarField& in, ScalarField& out, int axis, int level, bool transpose) const;
  int source(int i, int n) const;

  GridSpec spec_;
  std::vector<double> sigma_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> kernels_;  // taps -r..r
};

}  // namespace smoke
