#include "tenfact/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace tenfact {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<int> min_cost_assignment(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) throw std::invalid_argument("min_cost_assignment: more rows than columns");
    // potentials-based shortest augmenting path, O(n^2 m)
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> match(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) match[p[j] - 1] = j - 1;
    return match;
}

Alignment align_columns(const Matrix& truth, const Matrix& estimate) {
    if (truth.rows() != estimate.rows())
        throw std::invalid_argument("align_columns: dimension mismatch");
    const int kt = static_cast<int>(truth.cols());
    const int ke = static_cast<int>(estimate.cols());
    if (ke < kt)
        throw std::invalid_argument("align_columns: estimate has fewer columns than truth");
    Matrix cost(kt, ke);
    for (int i = 0; i < kt; ++i) {
        double tn = truth.col(i).norm();
        for (int j = 0; j < ke; ++j) {
            double en = estimate.col(j).norm();
            double denom = std::max(tn * en, 1e-300);
            cost(i, j) = -std::abs(truth.col(i).dot(estimate.col(j))) / denom;
        }
    }
    Alignment out;
    out.permutation = min_cost_assignment(cost);
    out.signs.resize(kt);
    out.per_factor_error = Vector(kt);
    double acc = 0.0;
    for (int i = 0; i < kt; ++i) {
        int j = out.permutation[i];
        double dot = truth.col(i).dot(estimate.col(j));
        int s = dot >= 0.0 ? 1 : -1;
        out.signs[i] = s;
        out.per_factor_error[i] = (truth.col(i) - s * estimate.col(j)).norm();
        acc += out.per_factor_error[i];
    }
    out.mean_error = kt > 0 ? acc / kt : 0.0;
    return out;
}

Matrix normalize_columns(const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        double n = out.col(c).norm();
        if (n > 1e-300) out.col(c) /= n;
    }
    return out;
}

Alignment align_factors(const CPModel& truth, const CPModel& estimate) {
    return align_columns(truth.A, estimate.A);
}

double incoherence(const Matrix& factors) {
    const int k = static_cast<int>(factors.cols());
    if (k < 2) return 0.0;
    double mu = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            mu = std::max(mu, std::abs(factors.col(i).dot(factors.col(j))));
    return mu;
}

double ModulusOfUniqueness::max_off_diagonal() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j)
            if (i != j) m = std::max(m, std::abs(rho(i, j)));
    return m;
}

ModulusOfUniqueness modulus_of_uniqueness(const Matrix& diagonals) {
    const int k = static_cast<int>(diagonals.rows());
    ModulusOfUniqueness out;
    out.rho = Matrix::Identity(k, k);
    Vector norms(k);
    for (int i = 0; i < k; ++i) {
        norms[i] = diagonals.row(i).norm();
        if (norms[i] == 0.0) out.degenerate = true;
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            double r = 0.0;
            if (norms[i] > 0.0 && norms[j] > 0.0)
                r = diagonals.row(i).dot(diagonals.row(j)) / (norms[i] * norms[j]);
            out.rho(i, j) = r;
            out.rho(j, i) = r;
        }
    return out;
}

Matrix full_rank_extension(const Matrix& factors) {
    const int d = static_cast<int>(factors.rows());
    const int k = static_cast<int>(factors.cols());
    if (k > d) throw std::invalid_argument("full_rank_extension: k > d");
    if (k == d) return factors;
    Eigen::HouseholderQR<Matrix> qr(factors);
    Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
    Matrix out(d, d);
    out.leftCols(k) = factors;
    out.rightCols(d - k) = Q.rightCols(d - k);
    return out;
}

namespace {

// Shared setup for the perturbation oracles: extended factors, per-direction
// noise contractions and noiseless diagonal values lambda_il = pi_i w_l.u_i.
struct PerturbationSetup {
    Matrix U;        // d x d extension, first k columns are the model factors
    Vector pi;       // length d, zero past k
    Matrix lambda;   // d x L
    int d, k, L;
};

PerturbationSetup make_setup(const CPModel& truth, const Tensor3& R,
                             const std::vector<Vector>& directions) {
    if (directions.empty())
        throw std::invalid_argument("perturbation oracle: no directions");
    if (!truth.symmetric)
        throw std::invalid_argument("perturbation oracle: model must be symmetric");
    if (R.d1() != truth.dim() || !R.is_cube())
        throw std::invalid_argument("perturbation oracle: noise tensor mismatch");
    PerturbationSetup s;
    s.d = truth.dim();
    s.k = truth.rank();
    s.L = static_cast<int>(directions.size());
    s.U = full_rank_extension(truth.A);
    s.pi = Vector::Zero(s.d);
    s.pi.head(s.k) = truth.weights;
    s.lambda = Matrix(s.d, s.L);
    for (int l = 0; l < s.L; ++l) {
        if (directions[l].size() != s.d)
            throw std::invalid_argument("perturbation oracle: direction length mismatch");
        for (int i = 0; i < s.d; ++i)
            s.lambda(i, l) = s.pi[i] * directions[l].dot(s.U.col(i));
    }
    return s;
}

}  // namespace

PerturbationEstimate cardoso_error_prediction(const CPModel& truth, const Tensor3& R,
                                              const std::vector<Vector>& directions) {
    PerturbationSetup s = make_setup(truth, R, directions);
    PerturbationEstimate out;
    out.E = Matrix::Zero(s.d, s.k);
    out.rho = modulus_of_uniqueness(s.lambda).rho;
    out.lambda_norms = s.lambda.rowwise().norm();

    // r_ij = R(u_i, u_j, I) for every pair we need
    for (int j = 0; j < s.k; ++j) {
        for (int i = 0; i < s.d; ++i) {
            if (i == j) continue;
            Vector r_ij = contract12(R, s.U.col(i), s.U.col(j));
            double num = 0.0, den = 0.0;
            for (int l = 0; l < s.L; ++l) {
                double gap = s.lambda(i, l) - s.lambda(j, l);
                num += gap * r_ij.dot(directions[l]);
                den += gap * gap;
            }
            if (den < 1e-14) {
                out.E(i, j) = kInf;
                out.degenerate = true;
            } else {
                out.E(i, j) = num / den;
            }
        }
    }
    out.predicted_error = Vector(s.k);
    for (int j = 0; j < s.k; ++j) {
        double acc = 0.0;
        for (int i = 0; i < s.d; ++i) acc += out.E(i, j) * out.E(i, j);
        out.predicted_error[j] = std::sqrt(acc);
    }
    return out;
}

PerturbationEstimate afsari_error_bound(const CPModel& truth, const Tensor3& R,
                                        const std::vector<Vector>& directions) {
    PerturbationSetup s = make_setup(truth, R, directions);
    Matrix V = s.U.inverse();  // rows v_i
    PerturbationEstimate out;
    out.E = Matrix::Zero(s.d, s.k);
    out.rho = modulus_of_uniqueness(s.lambda).rho;
    out.lambda_norms = s.lambda.rowwise().norm();

    for (int j = 0; j < s.k; ++j) {
        double nj = out.lambda_norms[j];
        for (int i = 0; i < s.d; ++i) {
            if (i == j) continue;
            double ni = out.lambda_norms[i];
            double rho = out.rho(i, j);
            if (std::abs(rho) >= 1.0 - 1e-10 || nj == 0.0) {
                out.E(i, j) = kInf;
                out.degenerate = true;
                continue;
            }
            Vector vi = V.row(i).transpose();
            Vector vj = V.row(j).transpose();
            Vector r_ij = contract12(R, vi, vj);  // v_i^T R_l v_j = r_ij . w_l
            double sum_j = 0.0, sum_i = 0.0;
            for (int l = 0; l < s.L; ++l) {
                double c = r_ij.dot(directions[l]);
                sum_j += c * s.lambda(j, l);
                sum_i += c * s.lambda(i, l);
            }
            if (ni == 0.0) {
                // zero lambda row (extension column, i > k): the 2x2 first-order
                // system decouples and leaves the finite entry |T_ij| / |lambda_j|^2
                out.E(i, j) = std::abs(sum_j) / (nj * nj);
            } else {
                out.E(i, j) = 1.0 / (1.0 - rho * rho) *
                              (1.0 / (ni * ni) + 1.0 / (nj * nj)) *
                              (std::abs(sum_j) + std::abs(sum_i));
            }
        }
    }
    out.predicted_error = Vector(s.k);
    for (int j = 0; j < s.k; ++j) {
        double acc = 0.0;
        for (int i = 0; i < s.d; ++i) acc += out.E(i, j) * out.E(i, j);
        out.predicted_error[j] = std::sqrt(acc);
    }
    return out;
}

long min_projection_count(int d, int k, double delta, double mu,
                          ProjectionRegime regime) {
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("min_projection_count: delta must be in (0,1)");
    double log_term = std::log(
        (regime == ProjectionRegime::OrthoRandom ? 2.0 : 15.0) * d *
        std::max(k - 1, 1) / delta);
    double value;
    if (regime == ProjectionRegime::OrthoRandom) {
        value = 16.0 * log_term * log_term;
    } else {
        if (mu < 0.0 || mu >= 1.0)
            throw std::invalid_argument("min_projection_count: mu must be in [0,1)");
        double l0 = (50.0 / (1.0 - mu * mu)) * (50.0 / (1.0 - mu * mu));
        value = l0 * log_term * log_term;
    }
    return std::max(1L, static_cast<long>(std::ceil(value)));
}

Vector theorem_error_bound(const CPModel& truth, double eps, long L, double delta,
                           BoundRegime regime) {
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("theorem_error_bound: delta must be in (0,1)");
    const int d = truth.dim();
    const int k = truth.rank();
    const Vector pi_abs = truth.weights.cwiseAbs();
    const double pi_min = pi_abs.minCoeff();
    const double pi_max = pi_abs.maxCoeff();
    const double pi_l1 = pi_abs.sum();
    if (pi_min == 0.0) throw std::invalid_argument("theorem_error_bound: zero weight");

    Vector out(k);
    switch (regime) {
        case BoundRegime::OrthoRandom: {
            double log_term = std::log(2.0 * d * std::max(k - 1, 1) / delta);
            for (int j = 0; j < k; ++j)
                out[j] = (2.0 * std::sqrt(2.0 * pi_l1 * pi_max) / (pi_abs[j] * pi_abs[j]) +
                          20.0 * std::sqrt(2.0) * log_term *
                              std::sqrt(static_cast<double>(d) / L) / pi_abs[j]) *
                         eps;
            return out;
        }
        case BoundRegime::OrthoPlugin: {
            for (int j = 0; j < k; ++j)
                out[j] = 2.0 * std::sqrt(pi_l1 * pi_max) / (pi_abs[j] * pi_abs[j]) * eps;
            return out;
        }
        case BoundRegime::NonOrthoRandom:
        case BoundRegime::NonOrthoPlugin: {
            double mu = incoherence(truth.A);
            if (mu >= 1.0)
                throw std::invalid_argument("theorem_error_bound: mu >= 1");
            Matrix V = full_rank_extension(truth.A).inverse();
            double vnorm = V.transpose().operatorNorm();
            double bound;
            if (regime == BoundRegime::NonOrthoPlugin) {
                bound = 8.0 * eps * std::sqrt(pi_l1 * pi_max) / (pi_min * pi_min) *
                        vnorm * vnorm * vnorm;
            } else {
                double l0 = (50.0 / (1.0 - mu * mu)) * (50.0 / (1.0 - mu * mu));
                double c_delta = (20.0 + std::sqrt(l0)) / std::sqrt(static_cast<double>(L)) *
                                 std::log(15.0 * d * std::max(k - 1, 1) / delta);
                bound = 8.0 * eps / (1.0 - mu * mu) * std::sqrt(pi_l1 * pi_max) /
                        (pi_min * pi_min) * vnorm * vnorm *
                        (1.0 + c_delta * std::sqrt(static_cast<double>(d)));
            }
            out.setConstant(bound);
            return out;
        }
    }
    throw std::logic_error("theorem_error_bound: unknown regime");
}

}  // namespace tenfact
