#include "tenfact/models.hpp"

#include <stdexcept>

#include <Eigen/Dense>

#include "tenfact/analysis.hpp"
#include "tenfact/rng.hpp"

namespace tenfact {

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = rng.gaussian();
    return m;
}

Vector uniform_weights(int k, Rng& rng) {
    Vector w(k);
    for (int i = 0; i < k; ++i) w[i] = 0.5 + rng.uniform();
    return w;
}

Matrix orthonormal_columns(int d, int k, Rng& rng) {
    Matrix g = gaussian_matrix(d, k, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, k);
    // fix the QR sign ambiguity so the draw is a pure function of the rng
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int c = 0; c < k; ++c)
        if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    return q;
}

Matrix unit_columns(int d, int k, Rng& rng) {
    Matrix m(d, k);
    for (int c = 0; c < k; ++c) m.col(c) = rng.unit_vector(d);
    return m;
}

}  // namespace

double factor_condition(const Matrix& factors) {
    Eigen::JacobiSVD<Matrix> svd(factors);
    double smin = svd.singularValues().minCoeff();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues().maxCoeff() / smin;
}

CPModel random_orthogonal_model(int d, int k, Rng& rng) {
    if (k < 1 || k > d) throw std::invalid_argument("random model: bad rank");
    CPModel m = CPModel::make_symmetric(uniform_weights(k, rng), orthonormal_columns(d, k, rng));
    m.canonicalize();
    return m;
}

CPModel random_nonorthogonal_model(int d, int k, double mu_max, double cond_max,
                                   Rng& rng) {
    if (k < 1 || k > d) throw std::invalid_argument("random model: bad rank");
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Matrix u = unit_columns(d, k, rng);
        if (incoherence(u) <= mu_max && factor_condition(u) < cond_max) {
            CPModel m = CPModel::make_symmetric(uniform_weights(k, rng), u);
            m.canonicalize();
            return m;
        }
    }
    throw std::runtime_error("random_nonorthogonal_model: rejection sampling exhausted");
}

CPModel random_asymmetric_model(int d, int k, double cond_max, Rng& rng) {
    if (k < 1 || k > d) throw std::invalid_argument("random model: bad rank");
    Matrix f[3];
    for (int mode = 0; mode < 3; ++mode) {
        int attempt = 0;
        do {
            f[mode] = unit_columns(d, k, rng);
            if (++attempt > 10000)
                throw std::runtime_error("random_asymmetric_model: rejection exhausted");
        } while (factor_condition(f[mode]) >= cond_max);
    }
    CPModel m = CPModel::make_asymmetric(uniform_weights(k, rng), f[0], f[1], f[2]);
    m.canonicalize();
    return m;
}

CPModel random_order4_model(int d, int k, Rng& rng) {
    if (k < 1 || k > d) throw std::invalid_argument("random model: bad rank");
    CPModel m =
        CPModel::make_symmetric4(uniform_weights(k, rng), orthonormal_columns(d, k, rng));
    m.canonicalize();
    return m;
}

}  // namespace tenfact
