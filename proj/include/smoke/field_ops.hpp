#pragma once

#include <span>

#include "smoke/grid.hpp"

namespace smoke {

// Flat-vector algebra. Reductions use a fixed chunking that does not depend
// on the thread count, so results are bitwise reproducible.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
double sum(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);
void fill(std::span<double> x, double value);
void copy(std::span<const double> x, std::span<double> y);

inline double dot(const ScalarField& a, const ScalarField& b) { return dot(a.values(), b.values()); }
inline double dot(const FaceField& a, const FaceField& b) { return dot(a.values(), b.values()); }

/// Central difference divergence per cell: sum_a (v_a[right] - v_a[left]) / h.
ScalarField divergence(const FaceField& v);
void divergence_into(const FaceField& v, ScalarField& out);

/// Face difference (p[c] - p[c - e_a]) / h; wall faces get zero.
/// Satisfies <gradient(p), v> == -<p, divergence(v)> whenever v has zero
/// wall faces.
FaceField gradient(const ScalarField& p);
void gradient_into(const ScalarField& p, FaceField& out);
/// out += alpha * gradient(p)
void add_gradient(const ScalarField& p, double alpha, FaceField& out);

/// Subtract the mean (removes the constant null mode of pressure-like fields).
void remove_mean(ScalarField& p);

/// Single-threaded reference kernels; the OpenMP kernels above must agree
/// with these bit for bit.
namespace serial {
ScalarField divergence(const FaceField& v);
FaceField gradient(const ScalarField& p);
double dot(std::span<const double> a, std::span<const double> b);
}  // namespace serial

}  // namespace smoke
