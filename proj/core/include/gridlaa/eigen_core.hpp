#pragma once

#include "gridlaa/model.hpp"
#include "gridlaa/types.hpp"

namespace gridlaa {

/// Finite spectrum of the pencil (lambda A + B) z = 0 with bi-orthonormalized
/// left/right eigenvector pairs: left_j^T * A * right_k = delta_jk (plain
/// transpose, no conjugation). Eigenvectors carry the companion structure
/// z_j = [u_j; lambda_j u_j], y_j = [b_j; lambda_j b_j] and conjugate
/// eigenvalues own conjugate vectors. Modes are sorted by decreasing real
/// part, ties by increasing imaginary part. Each right vector has unit norm
/// before scaling its phase so the largest-magnitude component is real
/// positive; the left vector absorbs the normalization.
struct EigenSolution {
    VectorXc lambda;   // n_f
    MatrixXc right;    // 2N x n_f
    MatrixXc left;     // 2N x n_f
    int n_gen = 0;
    int n_load = 0;
    double ortho_residual = 0.0;  // max |left^T A right - I|
    StatePencil pencil;           // the pencil that was solved

    int n() const { return n_gen + n_load; }
    int dim() const { return 2 * n(); }
    int n_finite() const { return static_cast<int>(lambda.size()); }
};

/// QZ solve of the descriptor pencil. The structurally null load-frequency
/// rows/columns are deflated before calling LAPACK dggev (the full pencil is
/// singular as a matrix pencil, the deflated one is regular), eigenvalues
/// with |beta| < 1e-10 * ||A|| are classified infinite and discarded, and
/// eigenvectors are re-embedded into the full state via the companion block
/// identity. Throws NumericalError on a singular deflated pencil, a QZ
/// failure, or a clustered spectrum (pairwise gap < 1e-7, which downstream
/// perturbation formulas cannot survive).
EigenSolution eigensolve(const StatePencil& pencil);

/// Residue-expansion transfer map: sum_j right_j (left_j^T p) / (s - lambda_j).
/// Exact on the deflated coordinates for any p supported on the dynamic rows.
/// Throws NumericalError when s is within 1e-9 of an eigenvalue.
VectorXc transfer_apply(const EigenSolution& sol, Complex s, const VectorXc& p);

}  // namespace gridlaa
