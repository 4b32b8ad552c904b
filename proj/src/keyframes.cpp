#include "smoke/keyframes.hpp"

#include <algorithm>
#include <cmath>

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"

namespace smoke {

KeyframeSet::KeyframeSet(int steps) : steps_(steps), flags_(steps + 1, false), targets_(steps + 1) {
  if (steps < 1) throw InvalidArgument("keyframe set needs at least one timestep");
}

void KeyframeSet::set(int i, ScalarField target) {
  if (i < 0 || i > steps_) throw InvalidArgument("keyframe index " + std::to_string(i) + " outside [0, N]");
  flags_[i] = true;
  targets_[i] = std::move(target);
}

const ScalarField& KeyframeSet::target(int i) const {
  if (!has(i)) throw InvalidArgument("no keyframe at timestep " + std::to_string(i));
  return targets_[i];
}

std::vector<int> KeyframeSet::indices() const {
  std::vector<int> out;
  for (int i = 0; i <= steps_; ++i)
    if (flags_[i]) out.push_back(i);
  return out;
}

void KeyframeSet::validate() const {
  const auto idx = indices();
  if (idx.empty()) throw InvalidArgument("keyframe set is empty");
  const GridSpec& s = targets_[idx.front()].spec();
  for (int i : idx) {
    if (targets_[i].spec() != s) throw SpecMismatch("keyframes on different grids");
    for (double x : targets_[i].values())
      if (!(x >= 0.0)) throw InvalidArgument("keyframe " + std::to_string(i) + " has negative density");
  }
}

int GaussianMetric::default_levels(const GridSpec& spec) {
  int m = spec.res[0];
  for (int a = 1; a < spec.dim; ++a) m = std::min(m, spec.res[a]);
  const int l = static_cast<int>(std::floor(std::log2(static_cast<double>(m)))) - 1;
  return std::max(1, l);
}

GaussianMetric::GaussianMetric(const GridSpec& spec, int levels, double sigma0, std::vector<double> weights)
    : spec_(spec), weights_(std::move(weights)) {
  if (!(sigma0 > 0.0)) throw InvalidArgument("metric sigma0 must be positive");
  if (levels <= 0) levels = default_levels(spec);
  if (weights_.empty()) weights_.assign(levels, 1.0);
  if (static_cast<int>(weights_.size()) != levels) throw InvalidArgument("metric weight count != level count");
  for (double w : weights_)
    if (w < 0.0) throw InvalidArgument("metric weights must be nonnegative");
  for (int j = 0; j < levels; ++j) {
    const double sg = sigma0 * std::ldexp(1.0, j);
    sigma_.push_back(sg);
    const int r = static_cast<int>(std::ceil(3.0 * sg));
    std::vector<double> k(2 * r + 1);
    double tot = 0.0;
    for (int t = -r; t <= r; ++t) tot += k[t + r] = std::exp(-0.5 * t * t / (sg * sg));
    for (double& x : k) x /= tot;
    kernels_.push_back(std::move(k));
  }
}

int GaussianMetric::source(int i, int n) const {
  if (spec_.periodic()) return detail::wrap(i, n);
  // Half-sample symmetric reflection: -1 -> 0, n -> n-1.
  int m = detail::wrap(i, 2 * n);
  return m < n ? m : 2 * n - 1 - m;
}

void GaussianMetric::pass(const ScalarField& in, ScalarField& out, int axis, int level, bool transpose) const {
  const auto& k = kernels_[level];
  const int r = static_cast<int>(k.size() / 2);
  const auto& res = spec_.res;
  const int n = res[axis];
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? res[0] : static_cast<std::size_t>(res[0]) * res[1]);
  const std::size_t lines = spec_.cell_count() / n;
  fill(out.values(), 0.0);
#pragma omp parallel for schedule(static)
  for (long long ln = 0; ln < static_cast<long long>(lines); ++ln) {
    // Base index of this line: drop the `axis` coordinate from ln.
    std::size_t base;
    const std::size_t q = static_cast<std::size_t>(ln);
    if (axis == 0) base = q * res[0];
    else if (axis == 1) base = (q % res[0]) + (q / res[0]) * res[0] * res[1];
    else base = q;
    const double* x = in.data() + base;
    double* y = out.data() + base;
    if (!transpose) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int t = -r; t <= r; ++t) acc += k[t + r] * x[source(i + t, n) * stride];
        y[i * stride] = acc;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        const double xi = x[i * stride];
        for (int t = -r; t <= r; ++t) y[source(i + t, n) * stride] += k[t + r] * xi;
      }
    }
  }
}

ScalarField GaussianMetric::blur(const ScalarField& x, int level) const {
  ScalarField a(x), b(spec_);
  for (int ax = 0; ax < spec_.dim; ++ax) {
    pass(a, b, ax, level, false);
    std::swap(a, b);
  }
  return a;
}

ScalarField GaussianMetric::blur_transpose(const ScalarField& x, int level) const {
  ScalarField a(x), b(spec_);
  for (int ax = spec_.dim - 1; ax >= 0; --ax) {
    pass(a, b, ax, level, true);
    std::swap(a, b);
  }
  return a;
}

ScalarField GaussianMetric::apply(const ScalarField& x, double c) const {
  if (x.spec() != spec_) throw SpecMismatch("metric applied to a field on a different grid");
  ScalarField out(spec_);
  if (c == 0.0) return out;
  for (int j = 0; j < levels(); ++j) {
    if (weights_[j] == 0.0) continue;
    const ScalarField g = blur_transpose(blur(x, j), j);
    axpy(c * weights_[j], g.values(), out.values());
  }
  return out;
}

double GaussianMetric::energy(const ScalarField& x) const {
  double e = 0.0;
  for (int j = 0; j < levels(); ++j) {
    if (weights_[j] == 0.0) continue;
    const ScalarField g = blur(x, j);
    e += 0.5 * weights_[j] * dot(g, g);
  }
  return e;
}

}  // namespace smoke
