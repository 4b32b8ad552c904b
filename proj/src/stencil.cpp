#include "smoke/stencil.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "smoke/detail/indexing.hpp"
#include "smoke/errors.hpp"

namespace smoke {

using detail::Idx;

namespace {

std::array<std::size_t, 3> face_offsets(const GridSpec& s) {
  std::array<std::size_t, 3> off{0, 0, 0};
  std::size_t acc = 0;
  for (int a = 0; a < s.dim; ++a) {
    off[a] = acc;
    acc += s.face_count(a);
  }
  return off;
}

}  // namespace

TransportStencil::TransportStencil(const GridSpec& spec, int node_axis) : spec_(spec), node_axis_(node_axis) {
  const GridSpec& s = spec_;
  const auto nd = node_axis < 0 ? s.res : s.face_dims(node_axis);
  node_count_ = static_cast<std::size_t>(nd[0]) * nd[1] * nd[2];
  const auto foff = face_offsets(s);
  auto face_flat = [&](int b, Idx f) -> std::uint32_t {
    for (int c = 0; c < s.dim; ++c)
      if (s.periodic()) f[c] = detail::wrap(f[c], s.res[c]);
    return static_cast<std::uint32_t>(foff[b] + detail::linear(s.face_dims(b), f));
  };

  unknown_.assign(node_count_, 1);
  if (node_axis >= 0 && !s.periodic()) {
    for (std::size_t n = 0; n < node_count_; ++n) {
      const Idx p = detail::unlinear(nd, n);
      if (p[node_axis] == 0 || p[node_axis] == s.res[node_axis]) unknown_[n] = 0;
    }
  }

  ref_start_.push_back(0);
  for (std::size_t n = 0; n < node_count_; ++n) {
    if (!unknown_[n]) continue;
    const Idx p = detail::unlinear(nd, n);
    for (int b = 0; b < s.dim; ++b) {
      Idx q = p;
      q[b] += 1;
      if (q[b] >= nd[b]) {
        if (!s.periodic()) continue;
        q[b] = 0;
      }
      const std::size_t m = detail::linear(nd, q);
      if (!unknown_[m] || m == n) continue;
      left_.push_back(static_cast<std::uint32_t>(n));
      right_.push_back(static_cast<std::uint32_t>(m));
      if (node_axis < 0) {
        refs_.push_back({face_flat(b, q), 1.0});
      } else if (b == node_axis) {
        refs_.push_back({face_flat(b, p), 0.5});
        refs_.push_back({face_flat(b, q), 0.5});
      } else {
        Idx f0 = p;
        f0[b] = p[b] + 1;
        Idx f1 = f0;
        f1[node_axis] = p[node_axis] - 1;
        refs_.push_back({face_flat(b, f0), 0.5});
        refs_.push_back({face_flat(b, f1), 0.5});
      }
      ref_start_.push_back(static_cast<std::uint32_t>(refs_.size()));
    }
  }

  // node -> links
  std::vector<std::uint32_t> count(node_count_ + 1, 0);
  for (std::size_t l = 0; l < left_.size(); ++l) {
    ++count[left_[l] + 1];
    ++count[right_[l] + 1];
  }
  node_start_.assign(node_count_ + 1, 0);
  for (std::size_t n = 0; n < node_count_; ++n) node_start_[n + 1] = node_start_[n] + count[n + 1];
  node_link_.resize(node_start_.back());
  std::vector<std::uint32_t> cursor(node_start_.begin(), node_start_.end() - 1);
  for (std::size_t l = 0; l < left_.size(); ++l) {
    node_link_[cursor[left_[l]]++] = static_cast<std::uint32_t>(l);
    node_link_[cursor[right_[l]]++] = static_cast<std::uint32_t>(l);
  }

  // velocity face -> links
  const std::size_t nfaces = s.total_face_count();
  std::vector<std::uint32_t> fcount(nfaces + 1, 0);
  for (const FaceRef& r : refs_) ++fcount[r.flat + 1];
  face_start_.assign(nfaces + 1, 0);
  for (std::size_t f = 0; f < nfaces; ++f) face_start_[f + 1] = face_start_[f] + fcount[f + 1];
  face_links_.resize(face_start_.back());
  std::vector<std::uint32_t> fcur(face_start_.begin(), face_start_.end() - 1);
  for (std::size_t l = 0; l < left_.size(); ++l)
    for (const FaceRef& r : link_refs(l)) face_links_[fcur[r.flat]++] = {static_cast<std::uint32_t>(l), r.weight};
}

void TransportStencil::link_speeds(const FaceField& v, std::span<double> w) const {
  const auto vals = v.values();
  const int nl = static_cast<int>(left_.size());
#pragma omp parallel for schedule(static)
  for (int l = 0; l < nl; ++l) {
    double acc = 0.0;
    for (const FaceRef& r : link_refs(l)) acc += r.weight * vals[r.flat];
    w[l] = acc;
  }
}

std::vector<double> TransportStencil::link_speeds(const FaceField& v) const {
  std::vector<double> w(left_.size());
  link_speeds(v, w);
  return w;
}

void TransportStencil::apply_add(std::span<const double> w, std::span<const double> x, std::span<double> y,
                                 double alpha) const {
  const double c = alpha * 0.5 / spec_.h;
  const int nn = static_cast<int>(node_count_);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < nn; ++n) {
    double acc = 0.0;
    for (std::uint32_t k = node_start_[n]; k < node_start_[n + 1]; ++k) {
      const std::uint32_t l = node_link_[k];
      if (left_[l] == static_cast<std::uint32_t>(n))
        acc -= w[l] * x[right_[l]];
      else
        acc += w[l] * x[left_[l]];
    }
    y[n] += c * acc;
  }
}

void TransportStencil::apply(std::span<const double> w, std::span<const double> x, std::span<double> y,
                             double alpha) const {
  std::fill(y.begin(), y.end(), 0.0);
  apply_add(w, x, y, alpha);
}

void TransportStencil::contract_add(std::span<const double> a, std::span<const double> b, FaceField& g,
                                    double alpha) const {
  const double c = alpha * 0.5 / spec_.h;
  const int nl = static_cast<int>(left_.size());
  std::vector<double> t(left_.size());
#pragma omp parallel for schedule(static)
  for (int l = 0; l < nl; ++l) {
    const auto L = left_[l], R = right_[l];
    t[l] = b[R] * a[L] - b[L] * a[R];
  }
  auto gv = g.values();
  const int nf = static_cast<int>(gv.size());
#pragma omp parallel for schedule(static)
  for (int f = 0; f < nf; ++f) {
    double acc = 0.0;
    for (std::uint32_t k = face_start_[f]; k < face_start_[f + 1]; ++k) acc += face_links_[k].second * t[face_links_[k].first];
    gv[f] += c * acc;
  }
}

const TransportStencil& TransportStencil::get(const GridSpec& spec, int node_axis) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int, double, int, int>, std::unique_ptr<TransportStencil>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(spec.dim, spec.res[0], spec.res[1], spec.res[2], spec.h, static_cast<int>(spec.boundary),
                             node_axis);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<TransportStencil>(spec, node_axis)).first;
  return *it->second;
}

}  // namespace smoke
