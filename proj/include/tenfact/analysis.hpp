#pragma once

#include <vector>

#include "tenfact/tensor.hpp"

namespace tenfact {

/// Permutation-and-sign matching of estimated factor columns against truth.
struct Alignment {
    std::vector<int> permutation;  // truth column i matches estimate column permutation[i]
    std::vector<int> signs;        // +1 / -1 per matched pair
    Vector per_factor_error;       // ||u_i - s_i * u~_{perm(i)}||_2
    double mean_error = 0.0;
};

/// Exact minimum-cost assignment (Hungarian algorithm) for an n x m cost
/// matrix with n <= m; returns the matched column per row.
std::vector<int> min_cost_assignment(const Matrix& cost);

/// Matches estimate columns to truth columns maximizing total |cosine|,
/// then fixes signs to minimize the Euclidean distances.
Alignment align_columns(const Matrix& truth, const Matrix& estimate);

/// Copy with every nonzero column scaled to unit norm.
Matrix normalize_columns(const Matrix& m);

/// Alignment of the leading factor matrices of two models (A against A).
Alignment align_factors(const CPModel& truth, const CPModel& estimate);

/// max_{i != j} |u_i^T u_j| over unit columns; 0 when k < 2.
double incoherence(const Matrix& factors);

struct ModulusOfUniqueness {
    Matrix rho;       // k x k, unit diagonal
    bool degenerate = false;  // some diagonal row had zero norm
    /// Largest |rho_ij| over i != j (0 for k < 2).
    double max_off_diagonal() const;
};

/// rho_ij = lambda_i . lambda_j / (|lambda_i| |lambda_j|) from the rows of a
/// d x L diagonal-value matrix. Zero-norm rows give rho = 0 and set the flag.
ModulusOfUniqueness modulus_of_uniqueness(const Matrix& diagonals);

/// First-order perturbation data for a projected-matrix set.
struct PerturbationEstimate {
    Matrix E;               // d x k, E(j, j) = 0
    Vector predicted_error; // per factor j: sqrt(sum_i E_ij^2), per unit epsilon
    Matrix rho;             // modulus of uniqueness of the noiseless projections
    Vector lambda_norms;    // ||lambda_i||_2 per extended factor
    bool degenerate = false;  // some entry was flagged infinite
};

/// Cardoso first-order error matrix for an orthogonal symmetric model:
/// E_ij = sum_l (w_l . p_ij)(r_ij . w_l) / sum_l (w_l . p_ij)^2 with
/// p_ij = pi_i u_i - pi_j u_j and r_ij = R(u_i, u_j, I), factors extended to
/// a full basis with zero weights. Degenerate denominators flag the entry.
PerturbationEstimate cardoso_error_prediction(const CPModel& truth, const Tensor3& R,
                                              const std::vector<Vector>& directions);

/// Afsari upper bound on |E_ij| for a (generally non-orthogonal) symmetric
/// model: (1/(1-rho_ij^2)) (1/|lambda_i|^2 + 1/|lambda_j|^2)
/// (|sum_l v_i R_l v_j lambda_jl| + |sum_l v_i R_l v_j lambda_il|).
PerturbationEstimate afsari_error_bound(const CPModel& truth, const Tensor3& R,
                                        const std::vector<Vector>& directions);

enum class ProjectionRegime { OrthoRandom, NonOrthoRandom };

/// Smallest L satisfying the projection-count requirement:
/// ortho-random      L >= 16 ln(2 d (k-1) / delta)^2
/// nonortho-random   L >= (50 / (1 - mu^2))^2 ln(15 d (k-1) / delta)^2
long min_projection_count(int d, int k, double delta, double mu, ProjectionRegime regime);

enum class BoundRegime { OrthoRandom, OrthoPlugin, NonOrthoRandom, NonOrthoPlugin };

/// Evaluates the per-factor error bounds of the factorization theorems with
/// their explicit constants (natural logs throughout). The non-orthogonal
/// bounds are uniform over factors and are repeated k times.
Vector theorem_error_bound(const CPModel& truth, double eps, long L, double delta,
                           BoundRegime regime);

/// Extends d x k factor columns to a full d x d basis; the added columns are
/// an orthonormal basis of the complement.
Matrix full_rank_extension(const Matrix& factors);

}  // namespace tenfact
