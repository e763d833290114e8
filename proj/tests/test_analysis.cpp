#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "tenfact/analysis.hpp"
#include "tenfact/jointdiag.hpp"
#include "tenfact/factorize.hpp"
#include "tenfact/models.hpp"
#include "tenfact/rng.hpp"

using namespace tenfact;

TEST_CASE("align_factors on identical and permuted models") {
    Rng rng(41);
    CPModel m = random_orthogonal_model(6, 4, rng);

    Alignment self = align_factors(m, m);
    CHECK(self.mean_error == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(self.permutation[i] == i);

    // swap two columns and negate one
    CPModel shuffled = m;
    shuffled.A.col(0) = m.A.col(2);
    shuffled.A.col(2) = -m.A.col(0);
    shuffled.B = shuffled.A;
    shuffled.C = shuffled.A;
    Alignment fixed = align_factors(m, shuffled);
    CHECK(fixed.mean_error <= 1e-15);
    CHECK(fixed.permutation[0] == 2);
    CHECK(fixed.permutation[2] == 0);
    CHECK(fixed.signs[0] == -1);
}

TEST_CASE("align_factors chord length for a small rotation") {
    Matrix truth(2, 2);
    truth << 1, 0, 0, 1;
    const double theta = 0.01;
    Matrix est(2, 2);
    est << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Alignment a = align_columns(truth, est);
    const double chord = 2.0 * std::sin(theta / 2.0);
    CHECK(a.per_factor_error[0] == doctest::Approx(chord).epsilon(1e-10));
    CHECK(a.per_factor_error[1] == doctest::Approx(chord).epsilon(1e-10));
}

TEST_CASE("alignment is a pseudo-metric under the canonical equivalence") {
    Rng rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        const int d = 3 + static_cast<int>(rng.uniform_int(6));
        const int k = 1 + static_cast<int>(rng.uniform_int(d));
        CPModel m = random_nonorthogonal_model(d, k, 0.9, 1e6, rng);
        CPModel scrambled = m;
        // random permutation + sign flips
        for (int i = k - 1; i > 0; --i) {
            int j = static_cast<int>(rng.uniform_int(i + 1));
            scrambled.A.col(i).swap(scrambled.A.col(j));
        }
        for (int i = 0; i < k; ++i)
            if (rng.uniform() < 0.5) scrambled.A.col(i) = -scrambled.A.col(i);
        scrambled.B = scrambled.A;
        scrambled.C = scrambled.A;
        CHECK(align_factors(m, scrambled).mean_error <= 1e-12);
    }
}

TEST_CASE("incoherence") {
    CHECK(incoherence(Matrix::Identity(3, 3)) == 0.0);
    Matrix twice(3, 2);
    twice.col(0) = Vector::Unit(3, 1);
    twice.col(1) = Vector::Unit(3, 1);
    CHECK(incoherence(twice) == 1.0);
    Matrix pair(2, 2);
    pair << 1, 0.6, 0, 0.8;
    CHECK(incoherence(pair) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(incoherence(Matrix::Identity(3, 1)) == 0.0);
}

TEST_CASE("modulus_of_uniqueness") {
    Matrix diag(2, 2);
    diag << 1, 0, 0, 1;
    ModulusOfUniqueness m = modulus_of_uniqueness(diag);
    CHECK(m.rho(0, 1) == 0.0);
    CHECK(m.rho(0, 0) == 1.0);
    CHECK_FALSE(m.degenerate);

    Matrix prop(2, 2);
    prop << 1, 2, 2, 4;
    CHECK(modulus_of_uniqueness(prop).rho(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

    Matrix mixed(2, 2);
    mixed << 1, 1, 1, 0;
    CHECK(modulus_of_uniqueness(mixed).rho(0, 1) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    Matrix zero_row(2, 2);
    zero_row << 1, 1, 0, 0;
    ModulusOfUniqueness z = modulus_of_uniqueness(zero_row);
    CHECK(z.degenerate);
    CHECK(z.rho(0, 1) == 0.0);
}

TEST_CASE("cardoso prediction: zero noise and fixed small instance") {
    Rng rng(43);
    CPModel m = random_orthogonal_model(4, 4, rng);
    Tensor3 zero(4, 4, 4);
    std::vector<Vector> dirs = {rng.unit_vector(4), rng.unit_vector(4)};
    PerturbationEstimate est = cardoso_error_prediction(m, zero, dirs);
    CHECK(est.E.norm() == 0.0);
    CHECK(est.predicted_error.maxCoeff() == 0.0);

    // d = k = 2, pi = (1, 2), u = (e1, e2), w = (1,1)/sqrt2, known symmetric R:
    // hand-evaluate E_12 = (w.p12)(r12.w) / (w.p12)^2 with p12 = pi1 e1 - pi2 e2
    Matrix U = Matrix::Identity(2, 2);
    Vector w2(2);
    w2 << 1.0, 2.0;
    CPModel fixed = CPModel::make_symmetric(w2, U);
    NoiseSpec spec{1.0, 77, NoiseNormalization::OperatorEstimate};
    Tensor3 R = generate_noise(2, spec);
    Vector dir = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    PerturbationEstimate p = cardoso_error_prediction(fixed, R, {dir});

    Vector p12(2);
    p12 << 1.0, -2.0;  // pi_1 u_1 - pi_2 u_2
    Vector r12(2);
    r12 << R(0, 1, 0), R(0, 1, 1);  // R(u1, u2, I)
    double wp = dir.dot(p12);
    double expected = (wp * r12.dot(dir)) / (wp * wp);
    CHECK(p.E(0, 1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(p.E(1, 0) == doctest::Approx(-expected).epsilon(1e-12));  // p_21 = -p_12

    // degenerate projection set: single direction orthogonal to p_12
    Vector bad(2);
    bad << 2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0);
    PerturbationEstimate dgn = cardoso_error_prediction(fixed, R, {bad});
    CHECK(dgn.degenerate);
    CHECK(std::isinf(dgn.E(1, 0)));
}

TEST_CASE("cardoso prediction agrees with measured error at tiny noise") {
    Rng rng(44);
    const int d = 6;
    const double eps = 1e-5;
    std::vector<double> ratios;
    for (int seed = 0; seed < 20; ++seed) {
        Rng trial = rng.derive(seed);
        CPModel truth = random_orthogonal_model(d, d, trial);
        NoiseSpec spec{eps, 4400 + static_cast<std::uint64_t>(seed),
                       NoiseNormalization::OperatorEstimate};
        Tensor3 R = generate_noise(d, spec);
        Tensor3 observed = cp_to_tensor(truth);
        {
            Tensor3 scaled = R;
            scaled *= eps;
            observed += scaled;
        }
        std::vector<Vector> dirs;
        for (int l = 0; l < 12; ++l) dirs.push_back(trial.unit_vector(d));
        ProjectionSet ps = make_projection_set(observed, dirs);
        DiagonalizationResult res = jacobi_diagonalize(ps.matrices, DiagOptions{});
        Alignment align = align_columns(truth.A, res.mixing);
        PerturbationEstimate pred = cardoso_error_prediction(truth, R, dirs);
        double measured = align.mean_error;
        double predicted = eps * pred.predicted_error.mean();
        ratios.push_back(measured / predicted);
    }
    std::sort(ratios.begin(), ratios.end());
    double median = 0.5 * (ratios[9] + ratios[10]);
    CHECK(median >= 0.2);
    CHECK(median <= 2.0);
}

TEST_CASE("afsari bound: zero noise, dominance over cardoso, degeneracy flag") {
    Rng rng(45);
    CPModel m = random_orthogonal_model(4, 4, rng);
    Tensor3 zero(4, 4, 4);
    std::vector<Vector> dirs = {rng.unit_vector(4), rng.unit_vector(4),
                                rng.unit_vector(4)};
    PerturbationEstimate z = afsari_error_bound(m, zero, dirs);
    CHECK(z.E.norm() == 0.0);

    NoiseSpec spec{1.0, 99, NoiseNormalization::OperatorEstimate};
    Tensor3 R = generate_noise(4, spec);
    PerturbationEstimate bound = afsari_error_bound(m, R, dirs);
    PerturbationEstimate pred = cardoso_error_prediction(m, R, dirs);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
            if (i == j) continue;
            CHECK(bound.E(i, j) >= std::abs(pred.E(i, j)) - 1e-12);
        }

    // duplicate lambda rows force |rho| = 1 -> infinite flag
    Matrix U = Matrix::Identity(2, 2);
    Vector w(2);
    w << 1.0, 1.0;
    CPModel dup = CPModel::make_symmetric(w, U);
    Vector same = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    Tensor3 small_noise = generate_noise(2, NoiseSpec{1.0, 98, NoiseNormalization::Frobenius});
    PerturbationEstimate dgn = afsari_error_bound(dup, small_noise, {same, same});
    CHECK(dgn.degenerate);
    CHECK(std::isinf(dgn.E(1, 0)));
}

TEST_CASE("rho of plugin projections on a noiseless model is tiny") {
    Rng rng(46);
    const int d = 6, k = 4;
    CPModel truth = random_nonorthogonal_model(d, k, 0.5, 10.0, rng);
    Tensor3 T = cp_to_tensor(truth);
    // exact inverse rows of the full-rank extension as plugin directions
    Matrix V = full_rank_extension(truth.A).inverse();
    std::vector<Vector> dirs;
    for (int i = 0; i < k; ++i) {
        Vector v = V.row(i).transpose();
        dirs.push_back(v / v.norm());
    }
    ProjectionSet ps = make_projection_set(T, dirs);
    Matrix diag(k, ps.matrices.size());
    for (std::size_t l = 0; l < ps.matrices.size(); ++l) {
        // noiseless lambda values for the k true factors
        for (int i = 0; i < k; ++i)
            diag(i, l) = truth.weights[i] * dirs[l].dot(truth.A.col(i));
    }
    ModulusOfUniqueness rho = modulus_of_uniqueness(diag);
    CHECK(rho.max_off_diagonal() <= 1e-10);
}

TEST_CASE("rho concentration for random projections") {
    Rng rng(47);
    const int d = 8, L = 200;
    const double bound = 10.0 * std::log(300.0) / std::sqrt(200.0);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng t = rng.derive(trial);
        CPModel truth = random_orthogonal_model(d, d, t);
        Matrix diag(d, L);
        for (int l = 0; l < L; ++l) {
            Vector w = t.unit_vector(d);
            for (int i = 0; i < d; ++i)
                diag(i, l) = truth.weights[i] * w.dot(truth.A.col(i));
        }
        if (modulus_of_uniqueness(diag).max_off_diagonal() <= bound) ++ok;
    }
    CHECK(ok >= 99);
}

TEST_CASE("min_projection_count evaluates the theorem formulas") {
    // ortho-random, d = k = 10, delta = 0.01: ceil(16 ln(18000)^2) = 1537
    CHECK(min_projection_count(10, 10, 0.01, 0.0, ProjectionRegime::OrthoRandom) == 1537);

    // nonortho-random with mu = 0: L0 = 2500, L = ceil(2500 ln(15 d (k-1)/delta)^2)
    const int d = 6, k = 4;
    const double delta = 0.05;
    double expected = std::ceil(2500.0 * std::pow(std::log(15.0 * d * (k - 1) / delta), 2));
    CHECK(min_projection_count(d, k, delta, 0.0, ProjectionRegime::NonOrthoRandom) ==
          static_cast<long>(expected));

    // delta near 1 still returns at least 1
    CHECK(min_projection_count(2, 2, 0.999999, 0.0, ProjectionRegime::OrthoRandom) >= 1);

    CHECK_THROWS_AS(min_projection_count(4, 4, 0.5, 1.0, ProjectionRegime::NonOrthoRandom),
                    std::invalid_argument);
    CHECK_THROWS_AS(min_projection_count(4, 4, 0.0, 0.0, ProjectionRegime::OrthoRandom),
                    std::invalid_argument);
}

TEST_CASE("theorem_error_bound closed forms") {
    Matrix U = Matrix::Identity(2, 2);
    Vector w = Vector::Constant(2, 0.5);  // l1-normalized (1,1)
    CPModel m = CPModel::make_symmetric(w, U);

    Vector zero = theorem_error_bound(m, 0.0, 100, 0.01, BoundRegime::OrthoPlugin);
    CHECK(zero.maxCoeff() == 0.0);

    const double eps = 0.3;
    Vector plugin = theorem_error_bound(m, eps, 100, 0.01, BoundRegime::OrthoPlugin);
    CHECK(plugin[0] == doctest::Approx(8.0 * std::sqrt(0.5) * eps).epsilon(1e-12));

    // monotone in L for the random regime
    Vector at_l = theorem_error_bound(m, eps, 100, 0.01, BoundRegime::OrthoRandom);
    Vector at_4l = theorem_error_bound(m, eps, 400, 0.01, BoundRegime::OrthoRandom);
    CHECK(at_4l[0] < at_l[0]);

    CPModel bad = m;
    bad.weights[0] = 0.0;
    CHECK_THROWS_AS(theorem_error_bound(bad, eps, 100, 0.01, BoundRegime::OrthoPlugin),
                    std::invalid_argument);
}

TEST_CASE("theorem bound dominates measured error in the ortho-random regime") {
    Rng rng(48);
    const int d = 6, k = 6;
    const double delta = 0.05, eps = 1e-3;
    const long L = min_projection_count(d, k, delta, 0.0, ProjectionRegime::OrthoRandom);
    int covered = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        Rng t = rng.derive(trial);
        CPModel truth = random_orthogonal_model(d, k, t);
        NoiseSpec spec{eps, 4800 + static_cast<std::uint64_t>(trial),
                       NoiseNormalization::OperatorEstimate};
        Tensor3 observed = add_noise(cp_to_tensor(truth), spec);
        std::vector<Vector> dirs;
        for (long l = 0; l < L; ++l) dirs.push_back(t.gaussian_vector(d));
        ProjectionSet ps = make_projection_set(observed, dirs);
        DiagonalizationResult res = jacobi_diagonalize(ps.matrices, DiagOptions{});
        Alignment align = align_columns(truth.A, res.mixing);
        Vector bound = theorem_error_bound(truth, eps, L, delta, BoundRegime::OrthoRandom);
        bool all = true;
        for (int j = 0; j < k; ++j)
            all &= align.per_factor_error[j] <= bound[j];
        if (all) ++covered;
    }
    CHECK(covered >= static_cast<int>(0.95 * trials));
}

TEST_CASE("full_rank_extension spans and is orthonormal beyond k") {
    Rng rng(49);
    Matrix F(5, 2);
    F.col(0) = rng.unit_vector(5);
    F.col(1) = rng.unit_vector(5);
    Matrix ext = full_rank_extension(F);
    CHECK(ext.leftCols(2) == F);
    CHECK(std::abs(ext.determinant()) > 1e-12);
    // added columns orthonormal and orthogonal to the originals
    for (int c = 2; c < 5; ++c) {
        CHECK(ext.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(ext.col(c).dot(F.col(0))) <= 1e-12);
        CHECK(std::abs(ext.col(c).dot(F.col(1))) <= 1e-12);
    }
}
