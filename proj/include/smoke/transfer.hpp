#pragma once

#include "smoke/grid.hpp"

namespace smoke {

// Grid transfer operators between a spec and its coarsened() spec.
//
// Cell-centred data: restriction averages the 2^d children (interpolation
// to the coarse centre, which is the shared corner of the children);
// prolongation is bilinear/trilinear with per-axis weights (3/4, 1/4) and
// constant extrapolation at Neumann walls.
//
// Face-centred data (component a): restriction uses (1/4, 1/2, 1/4) along a
// and averages the two children across each other axis; prolongation is
// linear along a and (3/4, 1/4) across. Wall faces stay zero.

void restrict_cells(const ScalarField& fine, ScalarField& coarse);
/// fine += alpha * P(coarse)
void prolong_cells_add(const ScalarField& coarse, ScalarField& fine, double alpha = 1.0);

void restrict_faces(const FaceField& fine, FaceField& coarse);
/// fine += alpha * P(coarse)
void prolong_faces_add(const FaceField& coarse, FaceField& fine, double alpha = 1.0);

ScalarField restrict_cells(const ScalarField& fine);
FaceField restrict_faces(const FaceField& fine);

}  // namespace smoke
