#pragma once

#include <cstdint>

#include "tenfact/tensor.hpp"

namespace tenfact {

class Rng;

// Random ground-truth generators used by the CLI, the benchmark harness and
// the tests. Weights are uniform in [0.5, 1.5]; factors are canonicalized so
// generation is reproducible byte for byte.

/// Orthonormal factors from the QR of a Gaussian matrix.
CPModel random_orthogonal_model(int d, int k, Rng& rng);

/// Gaussian unit columns, redrawn until incoherence <= mu_max and the factor
/// matrix condition number is < cond_max. Throws after 10000 failed draws.
CPModel random_nonorthogonal_model(int d, int k, double mu_max, double cond_max, Rng& rng);

/// Independent well-conditioned factors per mode.
CPModel random_asymmetric_model(int d, int k, double cond_max, Rng& rng);

/// Symmetric orthogonal order-4 model.
CPModel random_order4_model(int d, int k, Rng& rng);

/// Condition number (sigma_max / sigma_min) of a factor matrix.
double factor_condition(const Matrix& factors);

}  // namespace tenfact
