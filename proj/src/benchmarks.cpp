#include "smoke/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "smoke/errors.hpp"

namespace smoke {

namespace {

// Signed distance (negative inside) sampled at cell centres, mapped to a
// smooth [0, 1] profile.
ScalarField shape(const GridSpec& spec, const std::function<double(double, double)>& sdf, double value = 1.0) {
  ScalarField f(spec);
  const int n0 = spec.res[0], n1 = spec.res[1];
  const double w = 0.05;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      const double x = (i + 0.5) * spec.h, y = (j + 0.5) * spec.h;
      const double t = std::clamp(0.5 - sdf(x, y) / (2.0 * w), 0.0, 1.0);
      f.at(i, j) = value * t * t * (3.0 - 2.0 * t);
    }
  return f;
}

double sd_disc(double x, double y, double cx, double cy, double r) { return std::hypot(x - cx, y - cy) - r; }

double sd_box(double x, double y, double x0, double y0, double x1, double y1) {
  const double dx = std::max(x0 - x, x - x1), dy = std::max(y0 - y, y - y1);
  if (dx <= 0.0 && dy <= 0.0) return std::max(dx, dy);
  return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
}

double sd_ellipse(double x, double y, double cx, double cy, double a, double b) {
  // first-order approximation, good enough for a soft edge
  const double q = std::hypot((x - cx) / a, (y - cy) / b);
  return (q - 1.0) * std::min(a, b);
}

struct Jitter {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> d{-0.02, 0.02};
  explicit Jitter(std::uint64_t seed) : rng(seed) {}
  double operator()() { return d(rng); }
};

GridSpec unit_square(int n, Boundary b) { return GridSpec::square(n, 1.0 / n, b); }

}  // namespace

std::vector<std::string> benchmark_names() { return {"blob", "letter", "bunny"}; }

ScalarField disc(const GridSpec& spec, double cx, double cy, double rad, double value) {
  return shape(spec, [=](double x, double y) { return sd_disc(x, y, cx, cy, rad); }, value);
}

Benchmark translated_blob(int n, int N, Boundary b, std::uint64_t seed) {
  Jitter j(seed);
  const GridSpec s = unit_square(n, b);
  Benchmark bm{"blob", disc(s, 0.4 + j(), 0.5 + j(), 0.15), KeyframeSet(N)};
  bm.keyframes.set(N, disc(s, 0.6 + j(), 0.5 + j(), 0.15));
  return bm;
}

Benchmark circle_to_letter(int n, int N, Boundary b, std::uint64_t seed) {
  Jitter j(seed);
  const GridSpec s = unit_square(n, b);
  Benchmark bm{"letter", disc(s, 0.5 + j(), 0.5 + j(), 0.2), KeyframeSet(N)};
  // block letter F
  const double ox = j(), oy = j();
  bm.keyframes.set(N, shape(s, [=](double x, double y) {
    x -= ox;
    y -= oy;
    const double stem = sd_box(x, y, 0.32, 0.22, 0.44, 0.78);
    const double top = sd_box(x, y, 0.32, 0.66, 0.70, 0.78);
    const double mid = sd_box(x, y, 0.32, 0.45, 0.62, 0.56);
    return std::min({stem, top, mid});
  }));
  return bm;
}

Benchmark circle_to_bunny(int n, int N, Boundary b, std::uint64_t seed) {
  if (N < 2) throw InvalidArgument("bunny benchmark needs N >= 2");
  Jitter j(seed);
  const GridSpec s = unit_square(n, b);
  Benchmark bm{"bunny", disc(s, 0.5 + j(), 0.5 + j(), 0.2), KeyframeSet(N)};
  const double a = j(), c = j();
  bm.keyframes.set(N / 2, shape(s, [=](double x, double y) {
    return std::min(sd_disc(x, y, 0.32 + a, 0.5 + c, 0.14), sd_disc(x, y, 0.68 + a, 0.5 + c, 0.14));
  }));
  const double ox = j(), oy = j();
  bm.keyframes.set(N, shape(s, [=](double x, double y) {
    x -= ox;
    y -= oy;
    const double body = sd_ellipse(x, y, 0.5, 0.38, 0.2, 0.14);
    const double head = sd_disc(x, y, 0.62, 0.56, 0.08);
    const double ear1 = sd_ellipse(x, y, 0.60, 0.72, 0.03, 0.1);
    const double ear2 = sd_ellipse(x, y, 0.67, 0.71, 0.03, 0.09);
    const double tail = sd_disc(x, y, 0.3, 0.42, 0.04);
    return std::min({body, head, ear1, ear2, tail});
  }));
  return bm;
}

Benchmark make_benchmark(const std::string& name, int n, int N, Boundary b, std::uint64_t seed) {
  if (name == "blob") return translated_blob(n, N, b, seed);
  if (name == "letter") return circle_to_letter(n, N, b, seed);
  if (name == "bunny") return circle_to_bunny(n, N, b, seed);
  throw InvalidArgument("unknown benchmark '" + name + "'");
}

}  // namespace smoke
