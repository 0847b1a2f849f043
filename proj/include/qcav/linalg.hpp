#pragma once

#include <vector>

namespace qcav {

// Solve A x = b for dense row-major A (n x n) in place; b receives x.
// Gaussian elimination with partial pivoting.  Returns false if singular.
bool solve_linear(double* a, double* b, int n);

// In-place inverse by Gauss-Jordan with partial pivoting; false if singular.
bool invert_matrix(double* a, int n);

// Cholesky factorization of a symmetric positive-definite matrix (row-major,
// lower triangle filled on success).  Returns false if not positive definite.
bool cholesky(double* a, int n);

// Inverse of an SPD matrix through its Cholesky factor; false if not SPD.
bool invert_spd(double* a, int n);

// Eigenvalues of a real symmetric matrix (row-major, destroyed), ascending.
// Cyclic Jacobi rotations; converges to machine precision for any symmetric
// input of moderate size.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n);

}
