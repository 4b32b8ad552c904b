#include "smoke/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "smoke/detail/indexing.hpp"

namespace smoke {

namespace {

constexpr std::size_t kChunk = 4096;

template <class F>
double chunked_sum(std::size_t n, F&& term) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[c] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return chunked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double sum(std::span<const double> a) {
  return chunked_sum(a.size(), [&](std::size_t i) { return a[i]; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(y.size()); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i) x[i] *= alpha;
}

void fill(std::span<double> x, double value) { std::fill(x.begin(), x.end(), value); }

void copy(std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); }

void divergence_into(const FaceField& v, ScalarField& out) {
  const GridSpec& s = v.spec();
  const double inv_h = 1.0 / s.h;
  const int plane = s.res[0] * s.res[1];
  const int ncell = static_cast<int>(s.cell_count());
  double* o = out.data();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < ncell; ++n) {
    const detail::Idx c{n % s.res[0], (n / s.res[0]) % s.res[1], n / plane};
    double acc = 0.0;
    for (int a = 0; a < s.dim; ++a) {
      const auto d = s.face_dims(a);
      const auto comp = v.component(a);
      acc += comp[detail::linear(d, detail::high_face(s, c, a))] - comp[detail::linear(d, c)];
    }
    o[n] = acc * inv_h;
  }
}

ScalarField divergence(const FaceField& v) {
  ScalarField out(v.spec());
  divergence_into(v, out);
  return out;
}

void add_gradient(const ScalarField& p, double alpha, FaceField& out) {
  const GridSpec& s = p.spec();
  const double coef = alpha / s.h;
  for (int a = 0; a < s.dim; ++a) {
    const auto d = s.face_dims(a);
    auto comp = out.component(a);
    const int plane = d[0] * d[1];
    const int nf = static_cast<int>(comp.size());
#pragma omp parallel for schedule(static)
    for (int n = 0; n < nf; ++n) {
      detail::Idx f{n % d[0], (n / d[0]) % d[1], n / plane};
      if (!s.periodic() && (f[a] == 0 || f[a] == s.res[a])) continue;
      detail::Idx lo = f;
      lo[a] = f[a] - 1;
      if (lo[a] < 0) lo[a] += s.res[a];
      comp[n] += coef * (p.data()[detail::linear(s.res, f)] - p.data()[detail::linear(s.res, lo)]);
    }
  }
}

void gradient_into(const ScalarField& p, FaceField& out) {
  fill(out.values(), 0.0);
  add_gradient(p, 1.0, out);
}

FaceField gradient(const ScalarField& p) {
  FaceField out(p.spec());
  add_gradient(p, 1.0, out);
  return out;
}

void remove_mean(ScalarField& p) {
  const double m = sum(p.values()) / static_cast<double>(p.size());
  for (double& x : p.values()) x -= m;
}

namespace serial {

ScalarField divergence(const FaceField& v) {
  const GridSpec& s = v.spec();
  ScalarField out(s);
  for (int k = 0; k < s.res[2]; ++k)
    for (int j = 0; j < s.res[1]; ++j)
      for (int i = 0; i < s.res[0]; ++i) {
        const detail::Idx c{i, j, k};
        double acc = 0.0;
        for (int a = 0; a < s.dim; ++a) {
          detail::Idx hi = c;
          hi[a] += 1;
          if (s.periodic() && hi[a] == s.res[a]) hi[a] = 0;
          acc += v.at(a, hi[0], hi[1], hi[2]) - v.at(a, i, j, k);
        }
        out.at(i, j, k) = acc * (1.0 / s.h);
      }
  return out;
}

FaceField gradient(const ScalarField& p) {
  const GridSpec& s = p.spec();
  FaceField out(s);
  for (int a = 0; a < s.dim; ++a) {
    const auto d = s.face_dims(a);
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          detail::Idx f{i, j, k};
          if (!s.periodic() && (f[a] == 0 || f[a] == s.res[a])) continue;
          detail::Idx lo = f;
          lo[a] = (f[a] - 1 + s.res[a]) % s.res[a];
          out.at(a, i, j, k) = (1.0 / s.h) * (p.at(f[0], f[1], f[2]) - p.at(lo[0], lo[1], lo[2]));
        }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  // Same chunked order as the parallel version.
  double total = 0.0;
  for (std::size_t lo = 0; lo < a.size(); lo += kChunk) {
    const std::size_t hi = std::min(a.size(), lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

}  // namespace serial

}  // namespace smoke
