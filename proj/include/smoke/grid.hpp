#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "smoke/memory.hpp"

namespace smoke {

enum class Boundary : int { Neumann = 0, Periodic = 1 };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform 2D/3D MAC grid. Cells are indexed x-fastest; for 2D grids
/// res[2] == 1. Face arrays of axis a hold res[a]+1 entries along a for
/// Neumann domains (faces 0 and res[a] are walls with zero normal
/// velocity) and res[a] entries for periodic domains.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> res{4, 4, 1};
  double h = 1.0;
  Boundary boundary = Boundary::Periodic;

  /// Validates and builds a spec; throws InvalidArgument.
  static GridSpec make(int dim, std::array<int, 3> res, double h, Boundary boundary);
  static GridSpec square(int n, double h, Boundary boundary) {
    return make(2, {n, n, 1}, h, boundary);
  }

  bool periodic() const { return boundary == Boundary::Periodic; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(res[0]) * res[1] * res[2];
  }
  std::array<int, 3> face_dims(int axis) const {
    std::array<int, 3> d = res;
    if (!periodic()) d[axis] += 1;
    return d;
  }
  std::size_t face_count(int axis) const {
    auto d = face_dims(axis);
    return static_cast<std::size_t>(d[0]) * d[1] * d[2];
  }
  std::size_t total_face_count() const {
    std::size_t n = 0;
    for (int a = 0; a < dim; ++a) n += face_count(a);
    return n;
  }

  /// True when every axis can be halved and stays >= 4 cells.
  bool can_coarsen() const;
  GridSpec coarsened() const;

  std::size_t cell_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(res[0]) * (j + static_cast<std::size_t>(res[1]) * k);
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && res == o.res && h == o.h && boundary == o.boundary;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

std::string describe(const GridSpec& spec);

/// Cell-centred scalar (density, pressure, multipliers).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& spec, double fill = 0.0)
      : spec_(spec), data_(spec.cell_count(), fill) {}

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return {data_.data(), data_.size()}; }
  std::span<const double> values() const { return {data_.data(), data_.size()}; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(int i, int j, int k = 0) { return data_[spec_.cell_index(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return data_[spec_.cell_index(i, j, k)]; }

 private:
  GridSpec spec_{};
  FieldBuffer data_;
};

/// Face-centred (staggered) vector field: component a lives on the faces
/// normal to axis a. All components share one contiguous buffer so the
/// field can be treated as a flat vector.
class FaceField {
 public:
  FaceField() = default;
  explicit FaceField(const GridSpec& spec, double fill = 0.0);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return {data_.data(), data_.size()}; }
  std::span<const double> values() const { return {data_.data(), data_.size()}; }
  std::span<double> component(int axis) {
    return {data_.data() + offset_[axis], offset_[axis + 1] - offset_[axis]};
  }
  std::span<const double> component(int axis) const {
    return {data_.data() + offset_[axis], offset_[axis + 1] - offset_[axis]};
  }
  std::size_t offset(int axis) const { return offset_[axis]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Face index along `axis` for face position (i, j, k) in that axis'
  /// face layout.
  std::size_t face_index(int axis, int i, int j, int k = 0) const {
    auto d = spec_.face_dims(axis);
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(d[0]) * (j + static_cast<std::size_t>(d[1]) * k);
  }
  double& at(int axis, int i, int j, int k = 0) { return data_[offset_[axis] + face_index(axis, i, j, k)]; }
  double at(int axis, int i, int j, int k = 0) const { return data_[offset_[axis] + face_index(axis, i, j, k)]; }

 private:
  GridSpec spec_{};
  FieldBuffer data_;
  std::array<std::size_t, 4> offset_{0, 0, 0, 0};
};

using StaggeredVectorField = FaceField;

/// Zero out wall faces (Neumann). No-op for periodic grids.
void enforce_walls(FaceField& v);
/// True when face `idx` (in the face layout of `axis`) is a wall face.
bool is_wall_face(const GridSpec& spec, int axis, const std::array<int, 3>& idx);

}  // namespace smoke
