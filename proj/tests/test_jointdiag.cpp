#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "tenfact/analysis.hpp"
#include "tenfact/jointdiag.hpp"
#include "tenfact/models.hpp"
#include "tenfact/rng.hpp"

using namespace tenfact;

namespace {

void check_result_invariants(const std::vector<Matrix>& ms,
                             const DiagonalizationResult& res, bool orthogonal) {
    const Eigen::Index d = res.inverse.rows();
    CHECK((res.mixing * res.inverse - Matrix::Identity(d, d)).norm() <= 1e-10);
    if (orthogonal)
        CHECK((res.mixing.transpose() * res.mixing - Matrix::Identity(d, d)).norm() <=
              1e-10);
    for (std::size_t l = 0; l < ms.size(); ++l) {
        Matrix t = res.inverse * ms[l] * res.inverse.transpose();
        CHECK((t.diagonal() - res.diagonals.col(l)).norm() <= 1e-10);
    }
    CHECK(std::abs(res.objective - off_objective(ms, res.inverse)) <= 1e-10);
}

void check_trace_monotone(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-10) + 1e-250);
}

std::vector<Matrix> synthesize(const Matrix& U, int L, Rng& rng) {
    const int d = static_cast<int>(U.rows());
    std::vector<Matrix> ms;
    for (int l = 0; l < L; ++l) {
        Vector lambda = rng.gaussian_vector(d);
        ms.push_back(U * lambda.asDiagonal() * U.transpose());
    }
    return ms;
}

}  // namespace

TEST_CASE("off_objective basics") {
    Matrix d12 = (Vector(2) << 1, 2).finished().asDiagonal();
    CHECK(off_objective({d12}, Matrix::Identity(2, 2)) == 0.0);

    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK(off_objective({swap}, Matrix::Identity(2, 2)) == 2.0);

    const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
    Matrix rot(2, 2);
    rot << c, s, -s, c;
    CHECK(off_objective({swap}, rot) <= 1e-15);

    CHECK_THROWS_AS(off_objective({swap}, Matrix::Identity(3, 3)), std::invalid_argument);
    CHECK_THROWS_AS(off_objective({}, Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("jacobi on already-diagonal and zero input") {
    DiagOptions opts;
    opts.record_trace = true;
    std::vector<Matrix> ms = {(Vector(2) << 3, 1).finished().asDiagonal(),
                              (Vector(2) << 5, 2).finished().asDiagonal()};
    DiagonalizationResult res = jacobi_diagonalize(ms, opts);
    CHECK(res.converged);
    CHECK(res.objective <= 1e-18);
    // identity up to permutation/sign
    Matrix abs_mix = res.mixing.cwiseAbs();
    CHECK((abs_mix - Matrix::Identity(2, 2)).norm() <= 1e-12);
    check_result_invariants(ms, res, true);

    std::vector<Matrix> zeros = {Matrix::Zero(3, 3)};
    DiagonalizationResult zres = jacobi_diagonalize(zeros, opts);
    CHECK(zres.converged);
    CHECK(zres.mixing == Matrix::Identity(3, 3));
}

TEST_CASE("jacobi single 2x2 matrix equals closed-form eigendecomposition") {
    Matrix m(2, 2);
    m << 2, 1, 1, 2;
    DiagOptions opts;
    opts.record_trace = true;
    DiagonalizationResult res = jacobi_diagonalize({m}, opts);
    check_result_invariants({m}, res, true);
    check_trace_monotone(res.trace);

    // eigenpairs (3, (1,1)/sqrt2), (1, (1,-1)/sqrt2)
    Vector diag = res.diagonals.col(0);
    int hi = diag[0] > diag[1] ? 0 : 1;
    CHECK(diag[hi] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(diag[1 - hi] == doctest::Approx(1.0).epsilon(1e-12));
    Vector v_hi = res.mixing.col(hi);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(v_hi.dot(Vector::Constant(2, r))) - 1.0) <= 1e-12);
}

TEST_CASE("jacobi recovers a random orthogonal basis from 5 projections") {
    Rng rng(21);
    const int d = 8, L = 5;
    CPModel model = random_orthogonal_model(d, d, rng);
    const Matrix U = model.A;
    std::vector<Matrix> ms = synthesize(U, L, rng);

    DiagOptions opts;
    opts.record_trace = true;
    DiagonalizationResult res = jacobi_diagonalize(ms, opts);
    check_result_invariants(ms, res, true);
    check_trace_monotone(res.trace);
    CHECK(res.converged);

    Alignment align = align_columns(U, res.mixing);
    CHECK(align.per_factor_error.maxCoeff() < 1e-8);
}

TEST_CASE("jacobi sweep touches each pair exactly once") {
    Rng rng(22);
    const int d = 7;
    CPModel model = random_orthogonal_model(d, d, rng);
    std::vector<Matrix> ms = synthesize(model.A, 3, rng);
    DiagonalizationResult res = jacobi_diagonalize(ms, DiagOptions{});
    CHECK(res.pair_visits == static_cast<long>(res.sweeps) * (d * (d - 1) / 2));
}

TEST_CASE("jacobi exact-input completeness") {
    Rng rng(23);
    for (int rep = 0; rep < 5; ++rep) {
        const int d = 3 + static_cast<int>(rng.uniform_int(8));
        const int L = 2 + static_cast<int>(rng.uniform_int(6));
        CPModel model = random_orthogonal_model(d, d, rng);
        std::vector<Matrix> ms = synthesize(model.A, L, rng);
        DiagOptions opts;
        opts.record_trace = true;
        DiagonalizationResult res = jacobi_diagonalize(ms, opts);
        CHECK(res.objective <= 1e-18 * (res.trace.front() + 1.0));
        check_trace_monotone(res.trace);
        check_result_invariants(ms, res, true);
    }
}

TEST_CASE("jacobi single-matrix oracle matches reference eigendecomposition") {
    Rng rng(24);
    const int d = 10;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian();
    Matrix sym = 0.5 * (g + g.transpose());

    DiagonalizationResult res = jacobi_diagonalize({sym}, DiagOptions{});
    Eigen::SelfAdjointEigenSolver<Matrix> ref(sym);

    Vector got = res.diagonals.col(0);
    std::sort(got.data(), got.data() + d);
    Vector expect = ref.eigenvalues();
    double spectral = expect.cwiseAbs().maxCoeff();
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-8 * spectral);

    // eigenvectors up to sign where the eigengap allows
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 1; i < d; ++i) min_gap = std::min(min_gap, expect[i] - expect[i - 1]);
    if (min_gap > 1e-6) {
        Alignment align = align_columns(ref.eigenvectors(), res.mixing);
        CHECK(align.per_factor_error.maxCoeff() <= 1e-6);
    }
}

TEST_CASE("qrj1d on diagonal input is a no-op up to scaling") {
    DiagOptions opts;
    opts.mode = DiagMode::NonOrthogonal;
    opts.record_trace = true;
    std::vector<Matrix> ms = {(Vector(2) << 1, 2).finished().asDiagonal(),
                              (Vector(2) << 3, 4).finished().asDiagonal()};
    DiagonalizationResult res = qrj1d_diagonalize(ms, opts);
    CHECK(res.converged);
    CHECK(res.objective <= 1e-18);
    Matrix abs_inv = res.inverse.cwiseAbs();
    CHECK((abs_inv - Matrix::Identity(2, 2)).norm() <= 1e-12);
    check_result_invariants(ms, res, false);
}

TEST_CASE("qrj1d recovers non-orthogonal factors") {
    Rng rng(31);
    const int d = 6, L = 8;
    CPModel model = random_nonorthogonal_model(d, d, 0.6, 10.0, rng);
    const Matrix U = model.A;
    REQUIRE(factor_condition(U) < 10.0);
    std::vector<Matrix> ms = synthesize(U, L, rng);

    DiagOptions opts;
    opts.mode = DiagMode::NonOrthogonal;
    opts.record_trace = true;
    DiagonalizationResult res = qrj1d_diagonalize(ms, opts);
    check_result_invariants(ms, res, false);
    check_trace_monotone(res.trace);

    double ms_norm2 = 0.0;
    for (const Matrix& m : ms) ms_norm2 += m.squaredNorm();
    CHECK(res.objective < 1e-12 * ms_norm2);

    // factor directions match up to permutation/scale
    Alignment align = align_columns(U, normalize_columns(res.mixing));
    CHECK(align.per_factor_error.maxCoeff() < 1e-6);
}

TEST_CASE("qrj1d agrees with jacobi on orthogonal-factor input") {
    Rng rng(32);
    const int d = 5, L = 6;
    CPModel model = random_orthogonal_model(d, d, rng);
    std::vector<Matrix> ms = synthesize(model.A, L, rng);

    DiagonalizationResult jres = jacobi_diagonalize(ms, DiagOptions{});
    DiagOptions qopts;
    qopts.mode = DiagMode::NonOrthogonal;
    DiagonalizationResult qres = qrj1d_diagonalize(ms, qopts);

    Alignment align = align_columns(jres.mixing, normalize_columns(qres.mixing));
    CHECK(align.per_factor_error.maxCoeff() < 1e-6);
}

TEST_CASE("diagonalizers reject malformed input") {
    CHECK_THROWS_AS(jacobi_diagonalize({Matrix::Zero(2, 3)}, DiagOptions{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        qrj1d_diagonalize({Matrix::Zero(2, 2), Matrix::Zero(3, 3)}, DiagOptions{}),
        std::invalid_argument);
    DiagOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(jacobi_diagonalize({Matrix::Zero(2, 2)}, bad), std::invalid_argument);
}
