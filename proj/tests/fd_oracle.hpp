#pragma once

#include <vector>

// Coarse finite-difference reference for the TE band structure: a variational
// P1-triangle discretization of the rhombic unit cell with Bloch phases,
// solved by Lanczos iteration.  Deliberately shares no code with the library
// it checks: dense/sparse algebra, eigensolver and RNG are all local.
namespace fd_oracle {

struct Problem {
    int grid = 64;                  // nodes per lattice direction
    int subsamples = 6;             // 1/eps midpoint subsampling per cell edge
    double hole_radius_ratio = 0.3; // r/a
    double eps_background = 8.12;
    double eps_hole = 1.0;
};

// Cell-averaged inverse permittivity on the grid (row-major, grid x grid).
std::vector<double> inverse_eps_grid(const Problem& p);

// Lowest n_eigs TE frequencies in a/lambda units at Bloch vector
// (kx, ky) given in fractional reciprocal coordinates (the high-symmetry
// points are Gamma = (0,0), M = (0, 1/sqrt 3), K = (1/3, 1/sqrt 3)).
std::vector<double> te_frequencies(const Problem& p, const std::vector<double>& inv_eps,
                                   double kx_frac, double ky_frac, int n_eigs);

}
