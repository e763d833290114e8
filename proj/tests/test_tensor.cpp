#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tenfact/rng.hpp"
#include "tenfact/tensor.hpp"

using namespace tenfact;

namespace {

Vector e(int d, int i) { return Vector::Unit(d, i); }

CPModel rank1(double pi, const Vector& a, const Vector& b, const Vector& c) {
    Vector w(1);
    w[0] = pi;
    Matrix A = a, B = b, C = c;
    return CPModel::make_asymmetric(w, A, B, C);
}

}  // namespace

TEST_CASE("cp_to_tensor rank-1 indicator") {
    Matrix U = e(3, 0);
    Vector w(1);
    w[0] = 2.0;
    Tensor3 T = cp_to_tensor(CPModel::make_symmetric(w, U));
    CHECK(T(0, 0, 0) == 2.0);
    double rest = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                if (i + j + k > 0) rest += std::abs(T(i, j, k));
    CHECK(rest == 0.0);
}

TEST_CASE("cp_to_tensor orthogonal indicators and empty model") {
    Matrix U(2, 2);
    U << 1, 0, 0, 1;
    Vector w(2);
    w << 1, 1;
    Tensor3 T = cp_to_tensor(CPModel::make_symmetric(w, U));
    CHECK(T(0, 0, 0) == 1.0);
    CHECK(T(1, 1, 1) == 1.0);
    CHECK(T.frobenius_norm() == doctest::Approx(std::sqrt(2.0)));

    CPModel empty = CPModel::make_symmetric(Vector(0), Matrix(2, 0));
    Tensor3 Z = cp_to_tensor(empty);
    CHECK(Z.frobenius_norm() == 0.0);
    CHECK(Z.d1() == 2);
}

TEST_CASE("cp_to_tensor rejects inconsistent factors") {
    Vector w(1);
    w[0] = 1.0;
    CPModel bad = CPModel::make_asymmetric(w, Matrix::Identity(3, 1),
                                           Matrix::Identity(3, 1), Matrix::Identity(3, 2));
    CHECK_THROWS_AS(cp_to_tensor(bad), std::invalid_argument);
}

TEST_CASE("apply3 on a rank-1 tensor") {
    Tensor3 T = cp_to_tensor(rank1(1.0, e(3, 0), e(3, 1), e(3, 2)));
    CHECK(apply3(T, e(3, 0), e(3, 1), e(3, 2)) == 1.0);
    CHECK(apply3(T, e(3, 1), e(3, 0), e(3, 2)) == 0.0);
    CHECK(apply3(T, 2.0 * e(3, 0), e(3, 1), e(3, 2)) == 2.0);
    CHECK_THROWS_AS(apply3(T, Vector::Zero(2), e(3, 1), e(3, 2)), std::invalid_argument);
}

TEST_CASE("project basics") {
    // 2 e1 (x) e1 (x) e1 in d = 3
    Tensor3 T = cp_to_tensor(rank1(2.0, e(3, 0), e(3, 0), e(3, 0)));
    Matrix M = project(T, e(3, 0));
    CHECK(M(0, 0) == 2.0);
    CHECK(M.norm() == 2.0);
    CHECK(project(T, e(3, 1)).norm() == 0.0);

    Matrix U(2, 2);
    U << 1, 0, 0, 1;
    Vector w2(2);
    w2 << 1, 1;
    Tensor3 T2 = cp_to_tensor(CPModel::make_symmetric(w2, U));
    Vector w(2);
    w << 0.6, 0.8;
    Matrix P = project(T2, w);
    CHECK(P(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(P(1, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(std::abs(P(0, 1)) + std::abs(P(1, 0)) == 0.0);
    CHECK_THROWS_AS(project(T2, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("project4 basics") {
    Matrix U = e(2, 0);
    Vector w1(1);
    w1 << 1.0;
    Tensor4 T = cp_to_tensor4(CPModel::make_symmetric4(w1, U));
    Matrix M = project4(T, e(2, 0), e(2, 0));
    CHECK(M(0, 0) == 1.0);
    CHECK(M.norm() == 1.0);
    CHECK(project4(T, e(2, 0), e(2, 1)).norm() == 0.0);

    Vector w3(1);
    w3 << 3.0;
    Tensor4 T3 = cp_to_tensor4(CPModel::make_symmetric4(w3, U));
    Vector half = Vector::Constant(2, 0.5);
    Matrix M3 = project4(T3, half, half);
    CHECK(M3(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("multilinearity and projection consistency properties") {
    Rng rng(123);
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_int(5));
        Tensor3 T(d, d, d);
        for (double& v : T.values()) v = rng.gaussian();
        Vector x = rng.gaussian_vector(d), xp = rng.gaussian_vector(d);
        Vector y = rng.gaussian_vector(d), z = rng.gaussian_vector(d);
        double alpha = rng.gaussian(), beta = rng.gaussian();

        double lhs = apply3(T, alpha * x + beta * xp, y, z);
        double rhs = alpha * apply3(T, x, y, z) + beta * apply3(T, xp, y, z);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        // and in the second slot
        double lhs2 = apply3(T, z, alpha * x + beta * xp, y);
        double rhs2 = alpha * apply3(T, z, x, y) + beta * apply3(T, z, xp, y);
        CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-12));

        double via_matrix = x.dot(project(T, z) * y);
        CHECK(apply3(T, x, y, z) == doctest::Approx(via_matrix).epsilon(1e-12));

        Vector c12 = contract12(T, x, y);
        CHECK(c12.dot(z) == doctest::Approx(apply3(T, x, y, z)).epsilon(1e-12));
        Vector c23 = contract23(T, y, z);
        CHECK(c23.dot(x) == doctest::Approx(apply3(T, x, y, z)).epsilon(1e-12));
    }
}

TEST_CASE("cp projection identity") {
    Rng rng(7);
    const int d = 6, k = 3;
    Matrix A(d, k), B(d, k), C(d, k);
    Vector w(k);
    for (int c = 0; c < k; ++c) {
        A.col(c) = rng.unit_vector(d);
        B.col(c) = rng.unit_vector(d);
        C.col(c) = rng.unit_vector(d);
        w[c] = rng.gaussian();
    }
    CPModel m = CPModel::make_asymmetric(w, A, B, C);
    Tensor3 T = cp_to_tensor(m);
    Vector dir = rng.gaussian_vector(d);
    Matrix P = project(T, dir);
    Matrix expected = Matrix::Zero(d, d);
    for (int c = 0; c < k; ++c)
        expected += w[c] * C.col(c).dot(dir) * A.col(c) * B.col(c).transpose();
    CHECK((P - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("symmetric cp models give permutation-invariant tensors") {
    Rng rng(99);
    for (int d = 2; d <= 5; ++d) {
        Matrix U(d, 2);
        U.col(0) = rng.unit_vector(d);
        U.col(1) = rng.unit_vector(d);
        Vector w(2);
        w << 1.3, -0.4;
        Tensor3 T = cp_to_tensor(CPModel::make_symmetric(w, U));
        CHECK(T.symmetry_gap() <= 1e-14 * std::max(1.0, T.max_abs()));
    }
}

TEST_CASE("generate_noise determinism, symmetry, normalization") {
    NoiseSpec spec{1.0, 2024, NoiseNormalization::OperatorEstimate};
    Tensor3 a = generate_noise(5, spec);
    Tensor3 b = generate_noise(5, spec);
    CHECK(a.values() == b.values());  // bit identical
    CHECK(a.symmetry_gap() <= 1e-13);

    NoiseSpec fro{1.0, 11, NoiseNormalization::Frobenius};
    Tensor3 f = generate_noise(6, fro);
    CHECK(f.frobenius_norm() == doctest::Approx(1.0).epsilon(1e-12));

    NoiseSpec one{1.0, 5, NoiseNormalization::OperatorEstimate};
    Tensor3 single = generate_noise(1, one);
    CHECK(std::abs(single(0, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));

    // operator estimate should be close to, and never exceed, the Frobenius norm
    Tensor3 op = generate_noise(6, NoiseSpec{1.0, 11, NoiseNormalization::OperatorEstimate});
    double fro_of_op = op.frobenius_norm();
    CHECK(fro_of_op >= 1.0 - 1e-9);
}

TEST_CASE("tensor invariants are enforced") {
    CHECK_THROWS_AS(Tensor3(2, 2, 2, std::vector<double>(7, 0.0)), std::invalid_argument);
    std::vector<double> vals(8, 0.0);
    vals[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Tensor3(2, 2, 2, vals), std::invalid_argument);
    CHECK_THROWS_AS(Tensor3(0, 2, 2), std::invalid_argument);
}

TEST_CASE("canonicalize fixes signs deterministically") {
    Rng rng(3);
    Matrix U(4, 2);
    U.col(0) = -rng.unit_vector(4);
    U.col(1) = rng.unit_vector(4);
    Vector w(2);
    w << 1.0, -2.0;
    CPModel m = CPModel::make_symmetric(w, U);
    Tensor3 before = cp_to_tensor(m);
    m.canonicalize();
    Tensor3 after = cp_to_tensor(m);
    // tensor unchanged, signs now canonical
    before -= after;
    CHECK(before.max_abs() <= 1e-14);
    for (int c = 0; c < 2; ++c) {
        Eigen::Index arg;
        m.A.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(m.A(arg, c) > 0.0);
    }

    // asymmetric: weights become nonnegative, residual sign in C
    CPModel a = CPModel::make_asymmetric(w, U, U, U);
    Tensor3 t0 = cp_to_tensor(a);
    a.canonicalize();
    Tensor3 t1 = cp_to_tensor(a);
    t0 -= t1;
    CHECK(t0.max_abs() <= 1e-14);
    CHECK(a.weights.minCoeff() >= 0.0);
}
