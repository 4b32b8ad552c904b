#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "smoke/grid.hpp"

namespace smoke {

/// Reference to a velocity face used to build a link's advecting speed.
struct FaceRef {
  std::uint32_t flat = 0;  // index into FaceField::values()
  double weight = 0.0;
};

/// Skew-symmetric central transport stencil on one node grid (cell centres,
/// or the faces of one axis). Every pair of adjacent unknown nodes (L, R)
/// along axis b forms a link carrying an advecting speed w interpolated from
/// the velocity faces. The operator is
///
///   (T x)_L -= w x_R / 2h,   (T x)_R += w x_L / 2h,
///
/// so T(v) is exactly skew-symmetric for every v and T(v) x is bilinear in
/// (v, x). For a divergence-free v it is the energy-conserving flux form of
/// -v . grad x.
class TransportStencil {
 public:
  /// node_axis < 0 selects the cell-centred grid, otherwise the faces of
  /// that axis.
  TransportStencil(const GridSpec& spec, int node_axis);

  const GridSpec& spec() const { return spec_; }
  int node_axis() const { return node_axis_; }
  std::size_t node_count() const { return node_count_; }
  std::size_t link_count() const { return left_.size(); }
  bool is_unknown(std::size_t node) const { return unknown_[node] != 0; }

  /// Per-link advecting speeds for velocity v.
  void link_speeds(const FaceField& v, std::span<double> w) const;
  std::vector<double> link_speeds(const FaceField& v) const;

  /// y = alpha * T(w) x  (overwrites y)
  void apply(std::span<const double> w, std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
  /// y += alpha * T(w) x
  void apply_add(std::span<const double> w, std::span<const double> x, std::span<double> y, double alpha = 1.0) const;

  /// g += alpha * d/dv <b, T(v) a>, scattered onto the velocity faces.
  void contract_add(std::span<const double> a, std::span<const double> b, FaceField& g, double alpha = 1.0) const;

  // Link topology, exposed for local (per-cell) Jacobian assembly.
  std::uint32_t link_left(std::size_t l) const { return left_[l]; }
  std::uint32_t link_right(std::size_t l) const { return right_[l]; }
  std::span<const FaceRef> link_refs(std::size_t l) const {
    return {refs_.data() + ref_start_[l], ref_start_[l + 1] - ref_start_[l]};
  }
  /// Links touching a node (both sides).
  std::span<const std::uint32_t> node_links(std::size_t node) const {
    return {node_link_.data() + node_start_[node], node_start_[node + 1] - node_start_[node]};
  }

  /// Cached stencil for (spec, node_axis).
  static const TransportStencil& get(const GridSpec& spec, int node_axis);

 private:
  GridSpec spec_;
  int node_axis_;
  std::size_t node_count_ = 0;
  std::vector<std::uint8_t> unknown_;
  std::vector<std::uint32_t> left_, right_;
  std::vector<std::uint32_t> ref_start_;
  std::vector<FaceRef> refs_;
  std::vector<std::uint32_t> node_start_, node_link_;
  // Reverse map: velocity face -> (link, weight) for gather-style contraction.
  std::vector<std::uint32_t> face_start_;
  std::vector<std::pair<std::uint32_t, double>> face_links_;
};

}  // namespace smoke
