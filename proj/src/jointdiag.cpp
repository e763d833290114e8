#include "tenfact/jointdiag.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace tenfact {

namespace {

constexpr double kStepSkipThreshold = 1e-30;  // predicted decrease below this: skip
constexpr double kShearClamp = 10.0;
constexpr double kConditionLimit = 1e12;

void check_input(const std::vector<Matrix>& ms) {
    if (ms.empty()) throw std::invalid_argument("diagonalize: empty matrix set");
    const Eigen::Index d = ms.front().rows();
    for (const Matrix& m : ms) {
        if (m.rows() != m.cols()) throw std::invalid_argument("diagonalize: non-square matrix");
        if (m.rows() != d) throw std::invalid_argument("diagonalize: mixed dimensions");
        if (!m.allFinite()) throw std::invalid_argument("diagonalize: non-finite entry");
    }
}

std::vector<Matrix> symmetrized(const std::vector<Matrix>& ms) {
    std::vector<Matrix> out;
    out.reserve(ms.size());
    for (const Matrix& m : ms) out.push_back(0.5 * (m + m.transpose()));
    return out;
}

double off_of(const Matrix& a) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) acc += a(i, j) * a(i, j);
    return acc;
}

double off_sum(const std::vector<Matrix>& ms) {
    double acc = 0.0;
    for (const Matrix& m : ms) acc += off_of(m);
    return acc;
}

// Finishes a run: recompute diagonals and the objective from the original
// input so the reported values are exact for the returned transform.
void finalize(DiagonalizationResult& res, const std::vector<Matrix>& original) {
    const Eigen::Index d = res.inverse.rows();
    const Eigen::Index L = static_cast<Eigen::Index>(original.size());
    res.diagonals = Matrix(d, L);
    double obj = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
        Matrix t = res.inverse * original[l] * res.inverse.transpose();
        res.diagonals.col(l) = t.diagonal();
        obj += off_of(t);
    }
    res.objective = obj;
}

// Orthogonal warm start from the eigenbasis of the largest-norm matrix.
// Applied before the first sweep; the recorded initial objective is the
// value at this starting transform.
Matrix warm_start(std::vector<Matrix>& work) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < work.size(); ++l) {
        double n = work[l].norm();
        if (n > best) {
            best = n;
            pick = l;
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(work[pick]);
    Matrix W = es.eigenvectors().transpose();
    for (Matrix& m : work) m = W * m * W.transpose();
    return W;
}

}  // namespace

double off_objective(const std::vector<Matrix>& ms, const Matrix& inverse) {
    check_input(ms);
    if (inverse.rows() != ms.front().rows() || inverse.cols() != ms.front().cols())
        throw std::invalid_argument("off_objective: transform dimension mismatch");
    double acc = 0.0;
    for (const Matrix& m : ms) acc += off_of(inverse * m * inverse.transpose());
    return acc;
}

DiagonalizationResult jacobi_diagonalize(const std::vector<Matrix>& ms,
                                         const DiagOptions& opts) {
    check_input(ms);
    if (opts.tol <= 0.0 || opts.max_sweeps < 1)
        throw std::invalid_argument("jacobi_diagonalize: bad options");
    const int d = static_cast<int>(ms.front().rows());
    const int L = static_cast<int>(ms.size());

    std::vector<Matrix> work = symmetrized(ms);
    Matrix W = Matrix::Identity(d, d);
    if (opts.init == DiagInit::PrincipalEigenbasis) W = warm_start(work);

    DiagonalizationResult res;
    double objective = off_sum(work);
    res.trace.push_back(objective);

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        const double prev = objective;
        for (int i = 0; i < d - 1; ++i) {
            for (int j = i + 1; j < d; ++j) {
                ++res.pair_visits;
                // 2x2 accumulation over the set: h_l = (M_ii - M_jj, 2 M_ij)
                double gxx = 0.0, gxy = 0.0, gyy = 0.0;
                for (int l = 0; l < L; ++l) {
                    const Matrix& m = work[l];
                    const double hx = m(i, i) - m(j, j);
                    const double hy = m(i, j) + m(j, i);
                    gxx += hx * hx;
                    gxy += hx * hy;
                    gyy += hy * hy;
                }
                // principal eigenvector (x, y) of [[gxx,gxy],[gxy,gyy]]
                const double half_gap = 0.5 * (gxx - gyy);
                const double root = std::sqrt(half_gap * half_gap + gxy * gxy);
                // off decrease for this pair is (lmax - gxx) / 2 with
                // lmax - gxx = root - half_gap, evaluated without cancellation
                const double gain = half_gap >= 0.0
                                        ? (root + half_gap > 0.0
                                               ? gxy * gxy / (root + half_gap)
                                               : 0.0)
                                        : root - half_gap;
                if (gain < 2.0 * kStepSkipThreshold) continue;
                double x, y;
                if (half_gap >= 0.0) {
                    x = half_gap + root;
                    y = gxy;
                } else {
                    x = gxy;
                    y = root - half_gap;
                }
                if (x < 0.0 || (x == 0.0 && y < 0.0)) {
                    x = -x;
                    y = -y;
                }
                const double r = std::hypot(x, y);
                if (r < 1e-300) continue;
                const double c = std::sqrt((x + r) / (2.0 * r));
                const double s = y / std::sqrt(2.0 * r * (x + r));
                // rotate rows and columns i, j of every matrix
                for (int l = 0; l < L; ++l) {
                    Matrix& m = work[l];
                    for (int q = 0; q < d; ++q) {
                        const double ri = m(i, q), rj = m(j, q);
                        m(i, q) = c * ri + s * rj;
                        m(j, q) = -s * ri + c * rj;
                    }
                    for (int q = 0; q < d; ++q) {
                        const double ci = m(q, i), cj = m(q, j);
                        m(q, i) = c * ci + s * cj;
                        m(q, j) = -s * ci + c * cj;
                    }
                }
                for (int q = 0; q < d; ++q) {
                    const double ri = W(i, q), rj = W(j, q);
                    W(i, q) = c * ri + s * rj;
                    W(j, q) = -s * ri + c * rj;
                }
            }
        }
        for (Matrix& m : work) m = 0.5 * (m + m.transpose());
        objective = off_sum(work);
        ++res.sweeps;
        res.trace.push_back(objective);
        if (prev - objective <= opts.tol * prev ||
            objective <= 1e-26 * (res.trace.front() + 1.0)) {
            res.converged = true;
            break;
        }
    }

    res.inverse = W;
    res.mixing = W.transpose();
    finalize(res, ms);
    if (!opts.record_trace) res.trace.clear();
    return res;
}

namespace {

struct ShearState {
    std::vector<Matrix>& work;
    Matrix& W;     // accumulated inverse transform
    Matrix& Winv;  // its inverse (the mixing matrix)
    long& visits;

    // One elementary shear on pair (i, j): row i of W gains a * row j.
    // Returns the achieved objective decrease.
    double step(int i, int j) {
        ++visits;
        const int d = static_cast<int>(W.rows());
        double num = 0.0, den = 0.0;
        for (const Matrix& m : work) {
            for (int q = 0; q < d; ++q) {
                if (q == i) continue;
                num += m(i, q) * m(j, q);
                den += m(j, q) * m(j, q);
            }
        }
        if (den < 1e-300) return 0.0;
        double a = -num / den;
        if (a > kShearClamp) a = kShearClamp;
        if (a < -kShearClamp) a = -kShearClamp;
        const double decrease = -(4.0 * a * num + 2.0 * a * a * den);
        if (decrease < kStepSkipThreshold) return 0.0;
        // reject steps that would push the transform toward singularity
        Matrix wrow = W.row(i) + a * W.row(j);
        Matrix vcol = Winv.col(j) - a * Winv.col(i);
        double norm_w2 = W.squaredNorm() - W.row(i).squaredNorm() + wrow.squaredNorm();
        double norm_v2 =
            Winv.squaredNorm() - Winv.col(j).squaredNorm() + vcol.squaredNorm();
        if (std::sqrt(norm_w2 * norm_v2) > kConditionLimit) return 0.0;
        W.row(i) = wrow;
        Winv.col(j) = vcol;
        for (Matrix& m : work) {
            m.row(i) += a * m.row(j);
            m.col(i) += a * m.col(j);
        }
        return decrease;
    }
};

}  // namespace

DiagonalizationResult qrj1d_diagonalize(const std::vector<Matrix>& ms,
                                        const DiagOptions& opts) {
    check_input(ms);
    if (opts.tol <= 0.0 || opts.max_sweeps < 1)
        throw std::invalid_argument("qrj1d_diagonalize: bad options");
    const int d = static_cast<int>(ms.front().rows());

    std::vector<Matrix> work = symmetrized(ms);
    Matrix W = Matrix::Identity(d, d);
    Matrix Winv = Matrix::Identity(d, d);
    if (opts.init == DiagInit::PrincipalEigenbasis) {
        W = warm_start(work);
        Winv = W.transpose();
    }

    DiagonalizationResult res;
    double objective = off_sum(work);
    res.trace.push_back(objective);
    ShearState state{work, W, Winv, res.pair_visits};

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        const double prev = objective;
        // lower half-sweep: B = I + a Delta_ij with i > j
        for (int j = 0; j < d - 1; ++j)
            for (int i = j + 1; i < d; ++i) state.step(i, j);
        // upper half-sweep: i < j
        for (int j = 1; j < d; ++j)
            for (int i = 0; i < j; ++i) state.step(i, j);

        for (Matrix& m : work) m = 0.5 * (m + m.transpose());

        // rescale inverse rows to unit norm; skipped in the rare case the
        // rescale would raise the objective, keeping the trace monotone
        Vector scales(d);
        for (int i = 0; i < d; ++i) {
            double n = W.row(i).norm();
            scales[i] = (n > 1e-300) ? 1.0 / n : 1.0;
        }
        double pre_rescale = off_sum(work);
        std::vector<Matrix> rescaled = work;
        for (Matrix& m : rescaled)
            m = scales.asDiagonal() * m * scales.asDiagonal();
        if (off_sum(rescaled) <= pre_rescale) {
            work = std::move(rescaled);
            W = scales.asDiagonal() * W;
            Winv = Winv * scales.cwiseInverse().asDiagonal();
        }

        objective = off_sum(work);
        ++res.sweeps;
        res.trace.push_back(objective);
        if (prev - objective <= opts.tol * prev ||
            objective <= 1e-26 * (res.trace.front() + 1.0)) {
            res.converged = true;
            break;
        }
    }

    res.inverse = W;
    res.mixing = W.inverse();  // fresh solve; the incremental Winv only guards steps
    finalize(res, ms);
    if (!opts.record_trace) res.trace.clear();
    return res;
}

DiagonalizationResult diagonalize(const std::vector<Matrix>& ms, const DiagOptions& opts) {
    return opts.mode == DiagMode::Orthogonal ? jacobi_diagonalize(ms, opts)
                                             : qrj1d_diagonalize(ms, opts);
}

}  // namespace tenfact
