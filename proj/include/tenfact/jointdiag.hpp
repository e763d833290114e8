#pragma once

#include <vector>

#include "tenfact/tensor.hpp"

namespace tenfact {

enum class DiagMode { Orthogonal, NonOrthogonal };

/// Starting transform. Identity suits generic matrix sets; the eigenbasis of
/// the largest-norm matrix escapes the shear saddle on hollow (zero-diagonal)
/// sets such as the asymmetric block embedding.
enum class DiagInit { Identity, PrincipalEigenbasis };

struct DiagOptions {
    DiagMode mode = DiagMode::Orthogonal;
    double tol = 1e-12;   // relative objective decrease per sweep
    int max_sweeps = 100;
    bool record_trace = false;
    DiagInit init = DiagInit::Identity;
};

/// Result of simultaneously diagonalizing a matrix set. `inverse` (rows are
/// the inverse factors v_i) is the transform W with W M_l W^T nearly
/// diagonal; `mixing` = W^{-1} holds the estimated factor columns.
struct DiagonalizationResult {
    Matrix mixing;
    Matrix inverse;
    Matrix diagonals;  // d x L, diagonals(i, l) = (W M_l W^T)_ii
    double objective = 0.0;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> trace;  // per-sweep objective, trace[0] = initial
    long pair_visits = 0;       // elementary pair updates attempted
};

/// Sum over the set of off(W M_l W^T), off(A) = sum_{i != j} A_ij^2.
double off_objective(const std::vector<Matrix>& ms, const Matrix& inverse);

/// Orthogonal simultaneous diagonalization by Jacobi sweeps of Givens
/// rotations, angle per pair minimizing the objective in closed form.
/// Matrices are symmetrized on entry.
DiagonalizationResult jacobi_diagonalize(const std::vector<Matrix>& ms,
                                         const DiagOptions& opts);

/// Non-orthogonal simultaneous diagonalization by alternating lower/upper
/// unit-triangular sweeps (QRJ1D style), exact coordinate minimization of the
/// objective per elementary shear. Rows of the accumulated inverse are
/// rescaled to unit norm after each sweep.
DiagonalizationResult qrj1d_diagonalize(const std::vector<Matrix>& ms,
                                        const DiagOptions& opts);

/// Dispatch on opts.mode.
DiagonalizationResult diagonalize(const std::vector<Matrix>& ms, const DiagOptions& opts);

}  // namespace tenfact
