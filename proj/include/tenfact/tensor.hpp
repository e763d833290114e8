#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace tenfact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense order-3 tensor, flat storage with offset (i*d2 + j)*d3 + k.
/// Entries are validated finite on construction from external data.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int d1, int d2, int d3);
    Tensor3(int d1, int d2, int d3, std::vector<double> values);

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int d3() const { return d3_; }
    std::size_t size() const { return values_.size(); }
    bool is_cube() const { return d1_ == d2_ && d2_ == d3_; }

    double operator()(int i, int j, int k) const {
        return values_[(static_cast<std::size_t>(i) * d2_ + j) * d3_ + k];
    }
    double& operator()(int i, int j, int k) {
        return values_[(static_cast<std::size_t>(i) * d2_ + j) * d3_ + k];
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);
    Tensor3& operator*=(double s);

    double frobenius_norm() const;
    double max_abs() const;

    /// Largest deviation |T_ijk - T_perm(ijk)| over all 6 index permutations.
    /// Only meaningful for cube tensors.
    double symmetry_gap() const;

    void check_finite() const;

private:
    int d1_ = 0, d2_ = 0, d3_ = 0;
    std::vector<double> values_;
};

/// Dense order-4 tensor, offset ((i*d2 + j)*d3 + k)*d4 + l.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int d1, int d2, int d3, int d4);
    Tensor4(int d1, int d2, int d3, int d4, std::vector<double> values);

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int d3() const { return d3_; }
    int d4() const { return d4_; }
    std::size_t size() const { return values_.size(); }
    bool is_cube() const { return d1_ == d2_ && d2_ == d3_ && d3_ == d4_; }

    double operator()(int i, int j, int k, int l) const {
        return values_[((static_cast<std::size_t>(i) * d2_ + j) * d3_ + k) * d4_ + l];
    }
    double& operator()(int i, int j, int k, int l) {
        return values_[((static_cast<std::size_t>(i) * d2_ + j) * d3_ + k) * d4_ + l];
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    Tensor4& operator+=(const Tensor4& other);
    Tensor4& operator*=(double s);
    double frobenius_norm() const;

    void check_finite() const;

private:
    int d1_ = 0, d2_ = 0, d3_ = 0, d4_ = 0;
    std::vector<double> values_;
};

/// CP model: weights plus unit-norm factor columns. For symmetric models the
/// three factor matrices are identical; order-4 models carry a fourth matrix.
struct CPModel {
    Vector weights;  // length k
    Matrix A, B, C;  // d x k each, unit-norm columns
    std::optional<Matrix> D;
    bool symmetric = false;

    int rank() const { return static_cast<int>(weights.size()); }
    int dim() const { return static_cast<int>(A.rows()); }
    int order() const { return D.has_value() ? 4 : 3; }

    /// Symmetric order-3 model with factor matrix U (columns u_i).
    static CPModel make_symmetric(const Vector& weights, const Matrix& U);
    /// Asymmetric order-3 model.
    static CPModel make_asymmetric(const Vector& weights, const Matrix& A,
                                   const Matrix& B, const Matrix& C);
    /// Symmetric order-4 model.
    static CPModel make_symmetric4(const Vector& weights, const Matrix& U);
    /// Asymmetric order-4 model.
    static CPModel make_asymmetric4(const Vector& weights, const Matrix& A,
                                    const Matrix& B, const Matrix& C, const Matrix& D);

    /// Fix the sign ambiguities: symmetric models flip (pi_i, u_i) jointly so
    /// the largest-magnitude entry of u_i is positive; asymmetric models
    /// canonicalize a_i and b_i (and c_i for order 4) the same way, push the
    /// residual sign into the last mode and keep weights nonnegative.
    void canonicalize();

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

enum class NoiseNormalization { OperatorEstimate, Frobenius };

struct NoiseSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    NoiseNormalization normalization = NoiseNormalization::OperatorEstimate;
};

// --- synthesis and multilinear application ---

Tensor3 cp_to_tensor(const CPModel& model);
Tensor4 cp_to_tensor4(const CPModel& model);

/// T(x, y, z) = sum_ijk T_ijk x_i y_j z_k.
double apply3(const Tensor3& T, const Vector& x, const Vector& y, const Vector& z);

/// T(I, I, w): last-mode projection, M_ij = sum_k T_ijk w_k.
Matrix project(const Tensor3& T, const Vector& w);

/// T(I, I, w, u): M_ij = sum_kl T_ijkl w_k u_l.
Matrix project4(const Tensor4& T, const Vector& w, const Vector& u);

/// T(x, y, I): vector with entries sum_ij T_ijk x_i y_j.
Vector contract12(const Tensor3& T, const Vector& x, const Vector& y);

/// T(I, y, z): vector with entries sum_jk T_ijk y_j z_k.
Vector contract23(const Tensor3& T, const Vector& y, const Vector& z);

/// T(x, y, I, I): matrix with entries sum_ij T_ijkl x_i y_j.
Matrix contract12_4(const Tensor4& T, const Vector& x, const Vector& y);

/// Symmetric unit-norm noise tensor, deterministic in spec.seed. The
/// normalization estimate (operator norm via symmetric power iteration, or
/// Frobenius norm) equals 1 after scaling. spec.epsilon is not applied here.
Tensor3 generate_noise(int d, const NoiseSpec& spec);

/// Symmetric order-4 analogue, Frobenius-normalized.
Tensor4 generate_noise4(int d, std::uint64_t seed);

/// model tensor plus spec.epsilon times a generate_noise tensor.
Tensor3 add_noise(const Tensor3& T, const NoiseSpec& spec);
Tensor4 add_noise4(const Tensor4& T, double epsilon, std::uint64_t seed);

}  // namespace tenfact
