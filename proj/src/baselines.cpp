#include "tenfact/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tenfact/rng.hpp"

namespace tenfact {

namespace {

void subtract_rank1(Tensor3& T, double pi, const Vector& u) {
    const int d = T.d1();
    for (int i = 0; i < d; ++i) {
        const double ai = pi * u[i];
        if (ai == 0.0) continue;
        for (int j = 0; j < d; ++j) {
            const double aij = ai * u[j];
            for (int k = 0; k < d; ++k) T(i, j, k) -= aij * u[k];
        }
    }
}

}  // namespace

TpmResult tensor_power_method(const Tensor3& T, int k, int restarts, int iters,
                              std::uint64_t seed) {
    if (!T.is_cube()) throw std::invalid_argument("tensor_power_method: tensor not cube");
    const int d = T.d1();
    if (k < 1 || k > d) throw std::invalid_argument("tensor_power_method: bad rank");
    if (restarts < 1 || iters < 1)
        throw std::invalid_argument("tensor_power_method: bad iteration counts");

    Rng rng = Rng(seed).derive(0x79a0);
    Tensor3 work = T;
    TpmResult out;
    Matrix U(d, k);
    Vector weights(k);
    out.fixed_point_residual = Vector::Zero(k);

    for (int comp = 0; comp < k; ++comp) {
        if (work.frobenius_norm() < 1e-300) {
            out.zero_deflation = true;
            for (int rest = comp; rest < k; ++rest) {
                U.col(rest) = Vector::Unit(d, rest % d);
                weights[rest] = 0.0;
            }
            break;
        }
        Vector best;
        double best_value = -1.0;
        for (int r = 0; r < restarts; ++r) {
            Vector u = rng.unit_vector(d);
            for (int it = 0; it < iters; ++it) {
                Vector next = contract23(work, u, u);
                double n = next.norm();
                if (n < 1e-300) break;
                u = next / n;
            }
            double value = std::abs(apply3(work, u, u, u));
            if (value > best_value) {
                best_value = value;
                best = u;
            }
        }
        for (int it = 0; it < iters; ++it) {
            Vector next = contract23(work, best, best);
            double n = next.norm();
            if (n < 1e-300) break;
            best = next / n;
        }
        double pi = apply3(work, best, best, best);
        out.fixed_point_residual[comp] = (contract23(work, best, best) - pi * best).norm();
        U.col(comp) = best;
        weights[comp] = pi;
        subtract_rank1(work, pi, best);
    }

    out.model = CPModel::make_symmetric(weights, U);
    out.model.canonicalize();
    return out;
}

namespace {

// Khatri-Rao product with column-wise Kronecker blocks ordered to match the
// row-major matricization used below.
Matrix khatri_rao(const Matrix& X, const Matrix& Y) {
    const int k = static_cast<int>(X.cols());
    Matrix out(X.rows() * Y.rows(), k);
    for (int c = 0; c < k; ++c)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out.block(i * Y.rows(), c, Y.rows(), 1) = X(i, c) * Y.col(c);
    return out;
}

// Mode-n matricization T_(n): rows index mode n, columns iterate the other
// two modes with the earlier mode varying slower.
Matrix matricize(const Tensor3& T, int mode) {
    const int d1 = T.d1(), d2 = T.d2(), d3 = T.d3();
    Matrix out;
    if (mode == 0) {
        out = Matrix(d1, static_cast<Eigen::Index>(d2) * d3);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d2; ++j)
                for (int k = 0; k < d3; ++k)
                    out(i, static_cast<Eigen::Index>(j) * d3 + k) = T(i, j, k);
    } else if (mode == 1) {
        out = Matrix(d2, static_cast<Eigen::Index>(d1) * d3);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d2; ++j)
                for (int k = 0; k < d3; ++k)
                    out(j, static_cast<Eigen::Index>(i) * d3 + k) = T(i, j, k);
    } else {
        out = Matrix(d3, static_cast<Eigen::Index>(d1) * d2);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d2; ++j)
                for (int k = 0; k < d3; ++k)
                    out(k, static_cast<Eigen::Index>(i) * d2 + j) = T(i, j, k);
    }
    return out;
}

}  // namespace

AlsResult als(const Tensor3& T, int k, int iters, std::uint64_t seed) {
    if (!T.is_cube()) throw std::invalid_argument("als: tensor not cube");
    const int d = T.d1();
    if (k < 1 || k > d) throw std::invalid_argument("als: bad rank");
    if (iters < 1) throw std::invalid_argument("als: bad iteration count");

    Rng rng = Rng(seed).derive(0xa15a);
    Matrix A(d, k), B(d, k), C(d, k);
    for (int c = 0; c < k; ++c) {
        A.col(c) = rng.unit_vector(d);
        B.col(c) = rng.unit_vector(d);
        C.col(c) = rng.unit_vector(d);
    }

    const Matrix T0 = matricize(T, 0);
    const Matrix T1 = matricize(T, 1);
    const Matrix T2 = matricize(T, 2);
    const double t_norm2 = T.frobenius_norm() * T.frobenius_norm();

    AlsResult out;
    auto solve_mode = [&](const Matrix& unfolding, const Matrix& X, const Matrix& Y) {
        // rows of `unfolding` indexed by the solved mode; columns pair (X, Y)
        Matrix kr = khatri_rao(X, Y);
        Matrix gram = (X.transpose() * X).cwiseProduct(Y.transpose() * Y);
        Eigen::LDLT<Matrix> ldlt(gram);
        Matrix rhs = (unfolding * kr).transpose();
        const double dmax = ldlt.vectorD().maxCoeff();
        if (ldlt.info() != Eigen::Success || dmax <= 0.0 ||
            ldlt.vectorD().minCoeff() < 1e-12 * dmax) {
            out.ridge_used = true;
            gram += 1e-12 * Matrix::Identity(k, k);
            ldlt.compute(gram);
        }
        return Matrix(ldlt.solve(rhs).transpose());
    };

    for (int round = 0; round < iters; ++round) {
        A = solve_mode(T0, B, C);
        B = solve_mode(T1, A, C);
        C = solve_mode(T2, A, B);
        // ||T - [[A,B,C]]||^2 via the Gram identity, no dense reconstruction
        Matrix gram = (A.transpose() * A)
                          .cwiseProduct(B.transpose() * B)
                          .cwiseProduct(C.transpose() * C);
        double cross = (T2 * khatri_rao(A, B)).cwiseProduct(C).sum();
        double objective = t_norm2 - 2.0 * cross + gram.sum();
        out.objective_trace.push_back(std::max(objective, 0.0));
    }

    // normalize columns, fold scales into the weights
    Vector weights(k);
    for (int c = 0; c < k; ++c) {
        double na = A.col(c).norm(), nb = B.col(c).norm(), nc = C.col(c).norm();
        weights[c] = na * nb * nc;
        if (na > 1e-300) A.col(c) /= na; else A.col(c) = Vector::Unit(d, c % d);
        if (nb > 1e-300) B.col(c) /= nb; else B.col(c) = Vector::Unit(d, c % d);
        if (nc > 1e-300) C.col(c) /= nc; else C.col(c) = Vector::Unit(d, c % d);
    }
    out.model = CPModel::make_asymmetric(weights, A, B, C);
    out.model.canonicalize();
    return out;
}

}  // namespace tenfact
