#pragma once

#include <cstdint>
#include <vector>

#include "tenfact/tensor.hpp"

namespace tenfact {

struct TpmResult {
    CPModel model;
    bool zero_deflation = false;  // deflated tensor vanished before k components
    Vector fixed_point_residual;  // ||T(I,u,u) - pi u|| per component at convergence
};

/// Robust tensor power method: per component, `restarts` random starts of the
/// map u <- T(I,u,u)/||.|| run for `iters` steps, the candidate with the
/// largest |T(u,u,u)| refined for `iters` more steps, then deflation.
TpmResult tensor_power_method(const Tensor3& T, int k, int restarts, int iters,
                              std::uint64_t seed);

struct AlsResult {
    CPModel model;
    std::vector<double> objective_trace;  // ||T - cp||_F^2 after each round
    bool ridge_used = false;              // a normal-equation solve needed the ridge
};

/// Alternating least squares with Khatri-Rao structured normal equations,
/// ridge fallback 1e-12 on rank-deficient systems.
AlsResult als(const Tensor3& T, int k, int iters, std::uint64_t seed);

}  // namespace tenfact
