#include "smoke/poisson.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_ops.hpp"
#include "smoke/transfer.hpp"

namespace smoke {

using detail::Idx;

namespace {

// Direct neighbour list of a cell for the 5/7-point Laplacian.
template <class F>
inline void for_each_neighbor(const GridSpec& s, const Idx& c, F&& f) {
  for (int a = 0; a < s.dim; ++a)
    for (int d = -1; d <= 1; d += 2) {
      Idx nb;
      if (detail::cell_neighbor(s, c, a, d, nb)) f(detail::linear(s.res, nb));
    }
}

void laplacian(const GridSpec& s, const double* x, double* out) {
  const double ih2 = 1.0 / (s.h * s.h);
  const int n = static_cast<int>(s.cell_count());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    const Idx C = detail::unlinear(s.res, c);
    double acc = 0.0;
    int cnt = 0;
    for_each_neighbor(s, C, [&](std::size_t nb) {
      acc += x[nb];
      ++cnt;
    });
    out[c] = ih2 * (acc - cnt * x[c]);
  }
}

double residual(const GridSpec& s, const double* b, const double* x, double* r) {
  laplacian(s, x, r);
  const int n = static_cast<int>(s.cell_count());
  double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
  for (int c = 0; c < n; ++c) {
    r[c] = b[c] - r[c];
    m = std::max(m, std::abs(r[c]));
  }
  return m;
}

}  // namespace

struct PoissonSolver::Impl {
  std::vector<GridSpec> levels;
  std::vector<std::vector<double>> diag;  // per level, per cell
  Eigen::PartialPivLU<Eigen::MatrixXd> coarse_lu;
  double omega = 0.8;

  void smooth(int l, const double* b, double* x, double* tmp, int iters) const {
    const GridSpec& s = levels[l];
    const int n = static_cast<int>(s.cell_count());
    const auto& dg = diag[l];
    for (int it = 0; it < iters; ++it) {
      laplacian(s, x, tmp);
#pragma omp parallel for schedule(static)
      for (int c = 0; c < n; ++c) x[c] += omega * (b[c] - tmp[c]) / dg[c];
    }
  }

  void vcycle(int l, std::vector<ScalarField>& b, std::vector<ScalarField>& x, std::vector<ScalarField>& r) const {
    const GridSpec& s = levels[l];
    if (l + 1 == static_cast<int>(levels.size())) {
      Eigen::Map<const Eigen::VectorXd> rhs(b[l].data(), static_cast<Eigen::Index>(s.cell_count()));
      Eigen::VectorXd centered = rhs.array() - rhs.mean();
      Eigen::Map<Eigen::VectorXd>(x[l].data(), static_cast<Eigen::Index>(s.cell_count())) = coarse_lu.solve(centered);
      return;
    }
    smooth(l, b[l].data(), x[l].data(), r[l].data(), 2);
    residual(s, b[l].data(), x[l].data(), r[l].data());
    restrict_cells(r[l], b[l + 1]);
    fill(x[l + 1].values(), 0.0);
    vcycle(l + 1, b, x, r);
    prolong_cells_add(x[l + 1], x[l]);
    smooth(l, b[l].data(), x[l].data(), r[l].data(), 2);
  }
};

PoissonSolver::PoissonSolver(const GridSpec& spec) : impl_(std::make_unique<Impl>()) {
  impl_->levels.push_back(spec);
  while (impl_->levels.back().can_coarsen()) impl_->levels.push_back(impl_->levels.back().coarsened());
  impl_->omega = spec.dim == 2 ? 0.8 : 6.0 / 7.0;
  for (const GridSpec& s : impl_->levels) {
    std::vector<double> d(s.cell_count());
    const double ih2 = 1.0 / (s.h * s.h);
    for (std::size_t c = 0; c < d.size(); ++c) {
      int cnt = 0;
      for_each_neighbor(s, detail::unlinear(s.res, c), [&](std::size_t) { ++cnt; });
      d[c] = -cnt * ih2;
    }
    impl_->diag.push_back(std::move(d));
  }
  const GridSpec& cs = impl_->levels.back();
  const auto n = static_cast<Eigen::Index>(cs.cell_count());
  if (n > 8192) throw InvalidArgument("coarsest Poisson level too large for a direct solve: " + describe(cs));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double ih2 = 1.0 / (cs.h * cs.h);
  for (Eigen::Index c = 0; c < n; ++c) {
    int cnt = 0;
    for_each_neighbor(cs, detail::unlinear(cs.res, c), [&](std::size_t nb) {
      A(c, static_cast<Eigen::Index>(nb)) += ih2;
      ++cnt;
    });
    A(c, c) -= cnt * ih2;
  }
  // Shifting by a rank-one term pins the mean to zero.
  A.array() -= ih2 / static_cast<double>(n);
  impl_->coarse_lu.compute(A);
}

PoissonSolver::~PoissonSolver() = default;

const GridSpec& PoissonSolver::spec() const { return impl_->levels.front(); }
int PoissonSolver::level_count() const { return static_cast<int>(impl_->levels.size()); }

PoissonReport PoissonSolver::solve(const ScalarField& rhs, ScalarField& phi, double tol, int max_cycles) const {
  if (!(tol > 0.0)) throw InvalidArgument("Poisson tolerance must be positive");
  const GridSpec& s = spec();
  if (rhs.spec() != s || phi.spec() != s) throw SpecMismatch("Poisson solve on mismatched grid");
  const auto L = impl_->levels.size();
  // Level 0 of (b, e, r) holds the residual equation for the correction.
  std::vector<ScalarField> b, e, r;
  b.reserve(L);
  e.reserve(L);
  r.reserve(L);
  for (const GridSpec& ls : impl_->levels) {
    b.emplace_back(ls);
    e.emplace_back(ls);
    r.emplace_back(ls);
  }
  ScalarField target(rhs);
  remove_mean(target);
  ScalarField x(phi);

  PoissonReport rep;
  rep.residual_inf = residual(s, target.data(), x.data(), b[0].data());
  while (rep.residual_inf > tol) {
    if (rep.cycles >= max_cycles) throw NonConvergence("Poisson multigrid did not reach tolerance", rep.residual_inf);
    fill(e[0].values(), 0.0);
    impl_->vcycle(0, b, e, r);
    axpy(1.0, e[0].values(), x.values());
    ++rep.cycles;
    rep.residual_inf = residual(s, target.data(), x.data(), b[0].data());
    if (L == 1 && rep.residual_inf > tol && rep.cycles >= 2)
      throw NonConvergence("Poisson direct solve above tolerance", rep.residual_inf);
  }
  remove_mean(x);
  copy(x.values(), phi.values());
  return rep;
}

const PoissonSolver& PoissonSolver::for_spec(const GridSpec& spec) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int, double, int>, std::unique_ptr<PoissonSolver>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(spec.dim, spec.res[0], spec.res[1], spec.res[2], spec.h, static_cast<int>(spec.boundary));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<PoissonSolver>(spec)).first;
  return *it->second;
}

void apply_laplacian(const ScalarField& phi, ScalarField& out) { laplacian(phi.spec(), phi.data(), out.data()); }

ProjectionResult project_solenoidal_full(const FaceField& v, double tol, int max_cycles) {
  const GridSpec& s = v.spec();
  ProjectionResult res{FaceField(v), ScalarField(s), {}};
  ScalarField div = divergence(v);
  res.report = PoissonSolver::for_spec(s).solve(div, res.potential, tol, max_cycles);
  add_gradient(res.potential, -1.0, res.field);
  return res;
}

FaceField project_solenoidal(const FaceField& v, double tol, int max_cycles) {
  return std::move(project_solenoidal_full(v, tol, max_cycles).field);
}

}  // namespace smoke
