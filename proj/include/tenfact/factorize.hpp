#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tenfact/jointdiag.hpp"
#include "tenfact/tensor.hpp"

namespace tenfact {

enum class FactorizeMode { Orthogonal, NonOrthogonal };
enum class DirectionLaw { UnitSphere, Gaussian };
enum class WeightMethod { Contraction, DiagonalRead };

struct FactorizeOptions {
    int rank = 1;
    FactorizeMode mode = FactorizeMode::Orthogonal;
    /// Stage-0 projection count L0; 0 selects the default
    /// min(max(rank + 2, 10), 4 * rank).
    int projections = 0;
    DirectionLaw direction_law = DirectionLaw::UnitSphere;
    bool plugin = true;  // run the second (plugin) stage
    std::uint64_t seed = 0;
    DiagOptions diag;
    WeightMethod weight_method = WeightMethod::Contraction;

    int effective_projections() const {
        if (projections > 0) return projections;
        int l0 = rank + 2 > 10 ? rank + 2 : 10;
        if (l0 > 4 * rank) l0 = 4 * rank;
        return l0 < 2 ? 2 : l0;
    }
};

struct ProjectionSet {
    std::vector<Matrix> matrices;
    std::vector<Vector> directions;
};

struct FactorizeDiagnostics {
    double rho_max = 0.0;     // max off-diagonal modulus of uniqueness, final stage
    double mu = 0.0;          // incoherence of the estimated factors
    double objective0 = 0.0;
    double objective1 = 0.0;  // 0 when no stage 1 ran
    std::uint64_t seed = 0;
    bool weight_degenerate = false;  // some recovered weight was flagged
    bool pairing_failed = false;     // asymmetric reduction could not pair columns
};

struct FactorizationReport {
    CPModel estimate;
    DiagonalizationResult stage0;
    std::optional<DiagonalizationResult> stage1;
    FactorizeDiagnostics diagnostics;
};

struct WeightRecovery {
    Vector weights;
    std::vector<bool> degenerate;  // per weight: inverse row nearly orthogonal to factor
    bool any_degenerate = false;
};

/// Projects the tensor along each direction: matrices[l] = T(I, I, w_l).
ProjectionSet make_projection_set(const Tensor3& T, const std::vector<Vector>& directions);

/// Weight recovery by trilinear contraction. In non-orthogonal mode
/// pi_i = T(v_i, v_i, v_i) / (v_i . u_i)^3 with v_i the unit-normalized
/// inverse row; orthogonal mode uses pi_i = T(u_i, u_i, u_i). Exact on
/// noiseless CP input. |v_i . u_i| < 1e-8 flags the weight degenerate (0).
WeightRecovery recover_weights(const Tensor3& T, const Matrix& factors,
                               const Matrix& inverse_rows, FactorizeMode mode);

/// Two-stage factorization: stage 0 diagonalizes projections along random
/// directions; stage 1 (plugin) re-projects along the unit-normalized
/// inverse-factor rows of the stage-0 estimate and diagonalizes again.
/// Deterministic in opts.seed.
FactorizationReport two_stage_factorize(const Tensor3& T, const FactorizeOptions& opts);

/// Asymmetric factorization via the symmetric block embedding
/// N_l = [[0, M_l^T], [M_l, 0]] and non-orthogonal joint diagonalization;
/// recovered column pairs carry the b (top) and a (bottom) factors, and the
/// third mode comes from contracting with the dual columns.
FactorizationReport factorize_asymmetric(const Tensor3& T, const FactorizeOptions& opts);

struct FourthOrderReport {
    CPModel estimate;  // order-4 model
    FactorizationReport stage_a;
    bool rank1_degenerate = false;  // near-equal top singular values in stage B
};

/// Fourth-order factorization: recover (a_i, b_i) from projections
/// T(I, I, w, u) through the asymmetric pipeline, then (c_i, d_i) from the
/// leading singular pair of T(vA_i, vB_i, I, I).
FourthOrderReport factorize_fourth_order(const Tensor4& T, const FactorizeOptions& opts);

}  // namespace tenfact
