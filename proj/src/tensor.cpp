#include "tenfact/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tenfact/rng.hpp"

namespace tenfact {

namespace {

using RowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Tensor3::Tensor3(int d1, int d2, int d3) : d1_(d1), d2_(d2), d3_(d3) {
    require(d1 > 0 && d2 > 0 && d3 > 0, "Tensor3: dimensions must be positive");
    values_.assign(static_cast<std::size_t>(d1) * d2 * d3, 0.0);
}

Tensor3::Tensor3(int d1, int d2, int d3, std::vector<double> values)
    : d1_(d1), d2_(d2), d3_(d3), values_(std::move(values)) {
    require(d1 > 0 && d2 > 0 && d3 > 0, "Tensor3: dimensions must be positive");
    require(values_.size() == static_cast<std::size_t>(d1) * d2 * d3,
            "Tensor3: value count does not match dimensions");
    check_finite();
}

void Tensor3::check_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("Tensor3: non-finite entry");
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
    require(d1_ == other.d1_ && d2_ == other.d2_ && d3_ == other.d3_,
            "Tensor3: dimension mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
    require(d1_ == other.d1_ && d2_ == other.d2_ && d3_ == other.d3_,
            "Tensor3: dimension mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

double Tensor3::frobenius_norm() const {
    double acc = 0.0;
    for (double v : values_) acc += v * v;
    return std::sqrt(acc);
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor3::symmetry_gap() const {
    if (!is_cube()) return std::numeric_limits<double>::infinity();
    const Tensor3& T = *this;
    double gap = 0.0;
    int d = d1_;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double v = T(i, j, k);
                gap = std::max(gap, std::abs(v - T(i, k, j)));
                gap = std::max(gap, std::abs(v - T(j, i, k)));
                gap = std::max(gap, std::abs(v - T(j, k, i)));
                gap = std::max(gap, std::abs(v - T(k, i, j)));
                gap = std::max(gap, std::abs(v - T(k, j, i)));
            }
    return gap;
}

Tensor4::Tensor4(int d1, int d2, int d3, int d4) : d1_(d1), d2_(d2), d3_(d3), d4_(d4) {
    require(d1 > 0 && d2 > 0 && d3 > 0 && d4 > 0, "Tensor4: dimensions must be positive");
    values_.assign(static_cast<std::size_t>(d1) * d2 * d3 * d4, 0.0);
}

Tensor4::Tensor4(int d1, int d2, int d3, int d4, std::vector<double> values)
    : d1_(d1), d2_(d2), d3_(d3), d4_(d4), values_(std::move(values)) {
    require(d1 > 0 && d2 > 0 && d3 > 0 && d4 > 0, "Tensor4: dimensions must be positive");
    require(values_.size() == static_cast<std::size_t>(d1) * d2 * d3 * d4,
            "Tensor4: value count does not match dimensions");
    check_finite();
}

void Tensor4::check_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("Tensor4: non-finite entry");
}

Tensor4& Tensor4::operator+=(const Tensor4& other) {
    require(d1_ == other.d1_ && d2_ == other.d2_ && d3_ == other.d3_ && d4_ == other.d4_,
            "Tensor4: dimension mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Tensor4& Tensor4::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

double Tensor4::frobenius_norm() const {
    double acc = 0.0;
    for (double v : values_) acc += v * v;
    return std::sqrt(acc);
}

CPModel CPModel::make_symmetric(const Vector& weights, const Matrix& U) {
    CPModel m;
    m.weights = weights;
    m.A = m.B = m.C = U;
    m.symmetric = true;
    return m;
}

CPModel CPModel::make_asymmetric(const Vector& weights, const Matrix& A, const Matrix& B,
                                 const Matrix& C) {
    CPModel m;
    m.weights = weights;
    m.A = A;
    m.B = B;
    m.C = C;
    m.symmetric = false;
    return m;
}

CPModel CPModel::make_symmetric4(const Vector& weights, const Matrix& U) {
    CPModel m = make_symmetric(weights, U);
    m.D = U;
    return m;
}

CPModel CPModel::make_asymmetric4(const Vector& weights, const Matrix& A, const Matrix& B,
                                  const Matrix& C, const Matrix& D) {
    CPModel m = make_asymmetric(weights, A, B, C);
    m.D = D;
    return m;
}

namespace {

// Flips the column so its largest-magnitude entry is positive.
// Returns -1 if a flip happened, +1 otherwise.
double fix_column_sign(Matrix& M, int col) {
    int arg = 0;
    double best = -1.0;
    for (int r = 0; r < M.rows(); ++r) {
        double a = std::abs(M(r, col));
        if (a > best) {
            best = a;
            arg = r;
        }
    }
    if (M(arg, col) < 0.0) {
        M.col(col) = -M.col(col);
        return -1.0;
    }
    return 1.0;
}

}  // namespace

void CPModel::canonicalize() {
    const int k = rank();
    if (symmetric) {
        for (int i = 0; i < k; ++i) {
            double s = fix_column_sign(A, i);
            if (order() == 3) {
                // pi u^3 = (-pi)(-u)^3: compensate odd-order flips in the weight
                weights[i] *= s;
            }
            // even order: pi u^4 is flip-invariant, weight untouched
        }
        B = A;
        C = A;
        if (D.has_value()) *D = A;
        return;
    }
    for (int i = 0; i < k; ++i) {
        double sa = fix_column_sign(A, i);
        double sb = fix_column_sign(B, i);
        if (order() == 3) {
            C.col(i) *= sa * sb;
            if (weights[i] < 0.0) {
                weights[i] = -weights[i];
                C.col(i) = -C.col(i);
            }
        } else {
            double sc = fix_column_sign(C, i);
            D->col(i) *= sa * sb * sc;
            if (weights[i] < 0.0) {
                weights[i] = -weights[i];
                D->col(i) = -D->col(i);
            }
        }
    }
}

void CPModel::validate() const {
    const int k = rank();
    const int d = dim();
    require(A.cols() == k && B.cols() == k && C.cols() == k,
            "CPModel: factor rank mismatch");
    require(B.rows() == d && C.rows() == d, "CPModel: factor dimension mismatch");
    if (D.has_value()) require(D->rows() == d && D->cols() == k, "CPModel: D mismatch");
    for (int i = 0; i < k; ++i) {
        require(std::isfinite(weights[i]), "CPModel: non-finite weight");
        require(std::abs(A.col(i).norm() - 1.0) <= 1e-12, "CPModel: column not unit norm");
        require(std::abs(B.col(i).norm() - 1.0) <= 1e-12, "CPModel: column not unit norm");
        require(std::abs(C.col(i).norm() - 1.0) <= 1e-12, "CPModel: column not unit norm");
        if (D.has_value())
            require(std::abs(D->col(i).norm() - 1.0) <= 1e-12,
                    "CPModel: column not unit norm");
    }
    if (symmetric) {
        require(A == B && A == C, "CPModel: symmetric flag with unequal factors");
        if (D.has_value()) require(A == *D, "CPModel: symmetric flag with unequal factors");
    }
}

Tensor3 cp_to_tensor(const CPModel& model) {
    if (model.order() != 3)
        throw std::invalid_argument("cp_to_tensor: model is not order 3");
    const int d1 = static_cast<int>(model.A.rows());
    const int d2 = static_cast<int>(model.B.rows());
    const int d3 = static_cast<int>(model.C.rows());
    const int k = model.rank();
    if (model.B.cols() != k || model.C.cols() != k)
        throw std::invalid_argument("cp_to_tensor: factor rank mismatch");
    Tensor3 T(d1, d2, d3);
    for (int m = 0; m < k; ++m) {
        const double pi = model.weights[m];
        for (int i = 0; i < d1; ++i) {
            const double ai = pi * model.A(i, m);
            if (ai == 0.0) continue;
            for (int j = 0; j < d2; ++j) {
                const double aij = ai * model.B(j, m);
                if (aij == 0.0) continue;
                for (int kk = 0; kk < d3; ++kk) T(i, j, kk) += aij * model.C(kk, m);
            }
        }
    }
    return T;
}

Tensor4 cp_to_tensor4(const CPModel& model) {
    if (model.order() != 4)
        throw std::invalid_argument("cp_to_tensor4: model is not order 4");
    const int d = model.dim();
    const int k = model.rank();
    const Matrix& D = *model.D;
    Tensor4 T(d, d, d, d);
    for (int m = 0; m < k; ++m) {
        const double pi = model.weights[m];
        for (int i = 0; i < d; ++i) {
            const double ai = pi * model.A(i, m);
            if (ai == 0.0) continue;
            for (int j = 0; j < d; ++j) {
                const double aij = ai * model.B(j, m);
                if (aij == 0.0) continue;
                for (int kk = 0; kk < d; ++kk) {
                    const double aijk = aij * model.C(kk, m);
                    if (aijk == 0.0) continue;
                    for (int l = 0; l < d; ++l) T(i, j, kk, l) += aijk * D(l, m);
                }
            }
        }
    }
    return T;
}

Matrix project(const Tensor3& T, const Vector& w) {
    if (w.size() != T.d3())
        throw std::invalid_argument("project: direction length mismatch");
    RowMajorMap M(T.values().data(), static_cast<Eigen::Index>(T.d1()) * T.d2(), T.d3());
    Vector flat = M * w;
    Matrix out(T.d1(), T.d2());
    for (int i = 0; i < T.d1(); ++i)
        for (int j = 0; j < T.d2(); ++j) out(i, j) = flat[static_cast<Eigen::Index>(i) * T.d2() + j];
    return out;
}

double apply3(const Tensor3& T, const Vector& x, const Vector& y, const Vector& z) {
    if (x.size() != T.d1() || y.size() != T.d2() || z.size() != T.d3())
        throw std::invalid_argument("apply3: vector length mismatch");
    return x.dot(project(T, z) * y);
}

Matrix project4(const Tensor4& T, const Vector& w, const Vector& u) {
    if (w.size() != T.d3() || u.size() != T.d4())
        throw std::invalid_argument("project4: direction length mismatch");
    Matrix out(T.d1(), T.d2());
    const Eigen::Index block = static_cast<Eigen::Index>(T.d3()) * T.d4();
    for (int i = 0; i < T.d1(); ++i)
        for (int j = 0; j < T.d2(); ++j) {
            RowMajorMap S(T.values().data() +
                              (static_cast<std::size_t>(i) * T.d2() + j) * block,
                          T.d3(), T.d4());
            out(i, j) = w.dot(S * u);
        }
    return out;
}

Vector contract12(const Tensor3& T, const Vector& x, const Vector& y) {
    if (x.size() != T.d1() || y.size() != T.d2())
        throw std::invalid_argument("contract12: vector length mismatch");
    Vector out = Vector::Zero(T.d3());
    for (int i = 0; i < T.d1(); ++i) {
        if (x[i] == 0.0) continue;
        for (int j = 0; j < T.d2(); ++j) {
            const double s = x[i] * y[j];
            if (s == 0.0) continue;
            const double* row =
                T.values().data() + (static_cast<std::size_t>(i) * T.d2() + j) * T.d3();
            for (int k = 0; k < T.d3(); ++k) out[k] += s * row[k];
        }
    }
    return out;
}

Vector contract23(const Tensor3& T, const Vector& y, const Vector& z) {
    if (y.size() != T.d2() || z.size() != T.d3())
        throw std::invalid_argument("contract23: vector length mismatch");
    Vector out(T.d1());
    const Eigen::Index block = static_cast<Eigen::Index>(T.d2()) * T.d3();
    for (int i = 0; i < T.d1(); ++i) {
        RowMajorMap S(T.values().data() + static_cast<std::size_t>(i) * block, T.d2(),
                      T.d3());
        out[i] = y.dot(S * z);
    }
    return out;
}

Matrix contract12_4(const Tensor4& T, const Vector& x, const Vector& y) {
    if (x.size() != T.d1() || y.size() != T.d2())
        throw std::invalid_argument("contract12_4: vector length mismatch");
    Matrix out = Matrix::Zero(T.d3(), T.d4());
    const Eigen::Index block = static_cast<Eigen::Index>(T.d3()) * T.d4();
    for (int i = 0; i < T.d1(); ++i) {
        if (x[i] == 0.0) continue;
        for (int j = 0; j < T.d2(); ++j) {
            const double s = x[i] * y[j];
            if (s == 0.0) continue;
            RowMajorMap S(T.values().data() +
                              (static_cast<std::size_t>(i) * T.d2() + j) * block,
                          T.d3(), T.d4());
            out += s * S;
        }
    }
    return out;
}

namespace {

Tensor3 symmetrized_gaussian3(int d, Rng& rng) {
    Tensor3 raw(d, d, d);
    for (double& v : raw.values()) v = rng.gaussian();
    Tensor3 sym(d, d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                sym(i, j, k) = (raw(i, j, k) + raw(i, k, j) + raw(j, i, k) +
                                raw(j, k, i) + raw(k, i, j) + raw(k, j, i)) /
                               6.0;
    return sym;
}

// Estimate of max_{|w|=1} |R(w,w,w)| by symmetric higher-order power
// iteration: 10 random restarts x 50 iterations, keep the best value seen.
double operator_norm_estimate(const Tensor3& R, Rng& rng) {
    const int d = R.d1();
    double best = 0.0;
    for (int restart = 0; restart < 10; ++restart) {
        Vector w = rng.unit_vector(d);
        for (int it = 0; it < 50; ++it) {
            Vector next = contract23(R, w, w);
            double n = next.norm();
            if (n < 1e-300) break;
            w = next / n;
        }
        best = std::max(best, std::abs(apply3(R, w, w, w)));
    }
    return best;
}

}  // namespace

Tensor3 generate_noise(int d, const NoiseSpec& spec) {
    if (d < 1) throw std::invalid_argument("generate_noise: d must be >= 1");
    if (spec.epsilon < 0.0) throw std::invalid_argument("generate_noise: epsilon < 0");
    Rng rng = Rng(spec.seed).derive(0x0e15);
    Tensor3 R = symmetrized_gaussian3(d, rng);
    double scale = 1.0;
    if (spec.normalization == NoiseNormalization::Frobenius) {
        scale = R.frobenius_norm();
    } else {
        Rng power_rng = Rng(spec.seed).derive(0x0e16);
        scale = operator_norm_estimate(R, power_rng);
    }
    if (scale < 1e-300) return R;  // all-zero draw; nothing to normalize
    R *= 1.0 / scale;
    return R;
}

Tensor4 generate_noise4(int d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("generate_noise4: d must be >= 1");
    Rng rng = Rng(seed).derive(0x0e17);
    Tensor4 raw(d, d, d, d);
    for (double& v : raw.values()) v = rng.gaussian();
    Tensor4 sym(d, d, d, d);
    int idx[4];
    for (idx[0] = 0; idx[0] < d; ++idx[0])
        for (idx[1] = 0; idx[1] < d; ++idx[1])
            for (idx[2] = 0; idx[2] < d; ++idx[2])
                for (idx[3] = 0; idx[3] < d; ++idx[3]) {
                    int p[4] = {idx[0], idx[1], idx[2], idx[3]};
                    std::sort(p, p + 4);
                    double acc = 0.0;
                    int count = 0;
                    do {
                        acc += raw(p[0], p[1], p[2], p[3]);
                        ++count;
                    } while (std::next_permutation(p, p + 4));
                    sym(idx[0], idx[1], idx[2], idx[3]) = acc / count;
                }
    double scale = sym.frobenius_norm();
    if (scale > 1e-300) sym *= 1.0 / scale;
    return sym;
}

Tensor3 add_noise(const Tensor3& T, const NoiseSpec& spec) {
    if (spec.epsilon == 0.0) return T;
    Tensor3 out = T;
    Tensor3 R = generate_noise(T.d1(), spec);
    R *= spec.epsilon;
    out += R;
    return out;
}

Tensor4 add_noise4(const Tensor4& T, double epsilon, std::uint64_t seed) {
    if (epsilon == 0.0) return T;
    Tensor4 out = T;
    Tensor4 R = generate_noise4(T.d1(), seed);
    R *= epsilon;
    out += R;
    return out;
}

}  // namespace tenfact
