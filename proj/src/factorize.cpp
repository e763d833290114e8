#include "tenfact/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "tenfact/analysis.hpp"
#include "tenfact/rng.hpp"

namespace tenfact {

namespace {

Vector draw_direction(Rng& rng, int d, DirectionLaw law) {
    return law == DirectionLaw::UnitSphere ? rng.unit_vector(d) : rng.gaussian_vector(d);
}

std::vector<Vector> draw_directions(Rng& rng, int count, int d, DirectionLaw law) {
    std::vector<Vector> out;
    out.reserve(count);
    for (int l = 0; l < count; ++l) out.push_back(draw_direction(rng, d, law));
    return out;
}

/// Indices of the `count` largest |values| entries, ascending index order.
std::vector<int> top_by_magnitude(const Vector& values, int count) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(values[a]) > std::abs(values[b]);
    });
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct SelectedFactors {
    Matrix factors;       // d x k unit columns
    Matrix inverse_rows;  // k x d unit rows
    Vector weights;
    bool weight_degenerate = false;
};

// Rank selection: recover candidate weights for all d columns of a
// diagonalization result and keep the k with the largest magnitudes.
SelectedFactors select_rank(const Tensor3& T, const DiagonalizationResult& diag, int k,
                            FactorizeMode mode, WeightMethod method) {
    const int d = static_cast<int>(diag.mixing.rows());
    Matrix factors = diag.mixing;
    Matrix inverse_rows = diag.inverse;
    for (int i = 0; i < d; ++i) {
        double fn = factors.col(i).norm();
        if (fn > 1e-300) factors.col(i) /= fn;
        double in = inverse_rows.row(i).norm();
        if (in > 1e-300) inverse_rows.row(i) /= in;
    }
    WeightRecovery rec = recover_weights(T, factors, inverse_rows, mode);
    std::vector<int> keep = top_by_magnitude(rec.weights, k);

    SelectedFactors sel;
    sel.factors = Matrix(d, k);
    sel.inverse_rows = Matrix(k, d);
    sel.weights = Vector(k);
    for (int i = 0; i < k; ++i) {
        sel.factors.col(i) = factors.col(keep[i]);
        sel.inverse_rows.row(i) = inverse_rows.row(keep[i]);
        sel.weights[i] = rec.weights[keep[i]];
        sel.weight_degenerate |= rec.degenerate[keep[i]];
    }
    if (method == WeightMethod::DiagonalRead) {
        // read pi from the stage diagonals instead of re-contracting; only
        // meaningful when the l-th matrix was projected along inverse row l
        const int L = static_cast<int>(diag.diagonals.cols());
        for (int i = 0; i < k && keep[i] < L; ++i) {
            double dot = sel.inverse_rows.row(i).dot(sel.factors.col(i));
            double denom = mode == FactorizeMode::Orthogonal ? 1.0 : dot * dot * dot;
            if (std::abs(denom) < 1e-12) continue;
            sel.weights[i] = diag.diagonals(keep[i], keep[i]) / denom;
        }
    }
    return sel;
}

CPModel to_symmetric_model(const SelectedFactors& sel) {
    CPModel m = CPModel::make_symmetric(sel.weights, sel.factors);
    m.canonicalize();
    return m;
}

}  // namespace

ProjectionSet make_projection_set(const Tensor3& T, const std::vector<Vector>& directions) {
    if (directions.empty())
        throw std::invalid_argument("make_projection_set: no directions");
    ProjectionSet set;
    set.directions = directions;
    set.matrices.reserve(directions.size());
    for (const Vector& w : directions) set.matrices.push_back(project(T, w));
    return set;
}

WeightRecovery recover_weights(const Tensor3& T, const Matrix& factors,
                               const Matrix& inverse_rows, FactorizeMode mode) {
    const int k = static_cast<int>(factors.cols());
    if (inverse_rows.rows() != k || inverse_rows.cols() != factors.rows())
        throw std::invalid_argument("recover_weights: shape mismatch");
    WeightRecovery out;
    out.weights = Vector::Zero(k);
    out.degenerate.assign(k, false);
    for (int i = 0; i < k; ++i) {
        if (mode == FactorizeMode::Orthogonal) {
            Vector u = factors.col(i);
            out.weights[i] = apply3(T, u, u, u);
            continue;
        }
        Vector v = inverse_rows.row(i).transpose();
        double vn = v.norm();
        if (vn > 1e-300) v /= vn;
        double dot = v.dot(factors.col(i));
        if (std::abs(dot) < 1e-8) {
            out.degenerate[i] = true;
            out.any_degenerate = true;
            continue;  // weight left at 0
        }
        out.weights[i] = apply3(T, v, v, v) / (dot * dot * dot);
    }
    return out;
}

FactorizationReport two_stage_factorize(const Tensor3& T, const FactorizeOptions& opts) {
    if (!T.is_cube()) throw std::invalid_argument("two_stage_factorize: tensor not cube");
    const int d = T.d1();
    if (opts.rank < 1 || opts.rank > d)
        throw std::invalid_argument("two_stage_factorize: rank out of range");
    if (T.symmetry_gap() > 1e-8 * std::max(1.0, T.max_abs()))
        throw std::invalid_argument("two_stage_factorize: tensor not symmetric");

    const int L0 = opts.effective_projections();
    if (L0 < 2) throw std::invalid_argument("two_stage_factorize: need L0 >= 2");

    DiagOptions diag = opts.diag;
    diag.mode = opts.mode == FactorizeMode::Orthogonal ? DiagMode::Orthogonal
                                                       : DiagMode::NonOrthogonal;

    Rng rng = Rng(opts.seed).derive(0xfac0);
    ProjectionSet stage0_set =
        make_projection_set(T, draw_directions(rng, L0, d, opts.direction_law));

    FactorizationReport report;
    report.diagnostics.seed = opts.seed;
    report.stage0 = diagonalize(stage0_set.matrices, diag);
    report.diagnostics.objective0 = report.stage0.objective;

    SelectedFactors sel =
        select_rank(T, report.stage0, opts.rank, opts.mode, opts.weight_method);

    const DiagonalizationResult* last = &report.stage0;
    if (opts.plugin) {
        std::vector<Vector> plugin_dirs;
        plugin_dirs.reserve(opts.rank);
        for (int i = 0; i < opts.rank; ++i)
            plugin_dirs.push_back(sel.inverse_rows.row(i).transpose());
        ProjectionSet stage1_set = make_projection_set(T, plugin_dirs);
        report.stage1 = diagonalize(stage1_set.matrices, diag);
        report.diagnostics.objective1 = report.stage1->objective;
        sel = select_rank(T, *report.stage1, opts.rank, opts.mode, opts.weight_method);
        last = &*report.stage1;
    }

    report.diagnostics.weight_degenerate = sel.weight_degenerate;
    report.estimate = to_symmetric_model(sel);
    report.diagnostics.mu = incoherence(report.estimate.A);
    report.diagnostics.rho_max = modulus_of_uniqueness(last->diagonals).max_off_diagonal();
    return report;
}

namespace {

// Pairs the 2d columns of the embedded diagonalization by most negative
// cosine between normalized diagonal rows; returns index pairs.
struct PairMatch {
    std::vector<std::pair<int, int>> pairs;
    bool failed = false;
};

PairMatch match_negative_pairs(const Matrix& diagonals) {
    const int n = static_cast<int>(diagonals.rows());
    Matrix unit = diagonals;
    Vector norms(n);
    for (int i = 0; i < n; ++i) {
        norms[i] = unit.row(i).norm();
        if (norms[i] > 1e-300) unit.row(i) /= norms[i];
    }
    PairMatch out;
    std::vector<bool> used(n, false);
    // strongest rows first so weak/noise columns cannot steal a partner
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return norms[a] > norms[b]; });
    for (int i : order) {
        if (used[i] || norms[i] <= 1e-300) continue;
        int best = -1;
        double best_cos = -0.99;  // pairing threshold
        for (int j = 0; j < n; ++j) {
            if (j == i || used[j] || norms[j] <= 1e-300) continue;
            double c = unit.row(i).dot(unit.row(j));
            if (c < best_cos) {
                best_cos = c;
                best = j;
            }
        }
        if (best < 0) continue;
        used[i] = used[best] = true;
        out.pairs.emplace_back(std::min(i, best), std::max(i, best));
    }
    return out;
}

// Duals of unit columns within their own span: V = F (F^T F)^{-1}, so that
// V.col(i)^T F.col(j) = delta_ij.
Matrix dual_columns(const Matrix& factors) {
    Matrix gram = factors.transpose() * factors;
    return factors * gram.ldlt().solve(Matrix::Identity(gram.rows(), gram.cols()));
}

struct AsymmetricCore {
    Matrix A, B;          // d x k unit columns
    Vector pair_weight;   // diagonal-row norm of each kept pair
    bool pairing_failed = false;
};

// Shared first phase of the asymmetric and fourth-order pipelines: embed the
// projected matrices as [[0, M^T], [M, 0]], diagonalize, pair columns and
// split them into the two leading modes.
AsymmetricCore recover_two_modes(const std::vector<Matrix>& projections, int d, int k,
                                 DiagOptions diag, DiagonalizationResult* stage_out) {
    std::vector<Matrix> embedded;
    embedded.reserve(projections.size());
    for (const Matrix& m : projections) {
        Matrix n = Matrix::Zero(2 * d, 2 * d);
        n.topRightCorner(d, d) = m.transpose();
        n.bottomLeftCorner(d, d) = m;
        embedded.push_back(std::move(n));
    }
    diag.mode = DiagMode::NonOrthogonal;
    diag.init = DiagInit::PrincipalEigenbasis;  // the embedding is hollow
    DiagonalizationResult res = qrj1d_diagonalize(embedded, diag);
    if (stage_out) *stage_out = res;

    PairMatch match = match_negative_pairs(res.diagonals);
    AsymmetricCore core;
    if (static_cast<int>(match.pairs.size()) < k) {
        // degenerate spectrum: not enough matched pairs; return placeholder
        // unit factors so the caller can still report, with the flag set
        core.pairing_failed = true;
        core.pair_weight = Vector::Zero(k);
        core.A = Matrix::Zero(d, k);
        core.B = Matrix::Zero(d, k);
        for (int i = 0; i < k; ++i) {
            core.A.col(i) = Vector::Unit(d, i % d);
            core.B.col(i) = Vector::Unit(d, i % d);
        }
        return core;
    }

    // keep the k pairs with the largest diagonal-row energy
    std::vector<double> energy(match.pairs.size());
    for (std::size_t p = 0; p < match.pairs.size(); ++p)
        energy[p] = res.diagonals.row(match.pairs[p].first).norm() +
                    res.diagonals.row(match.pairs[p].second).norm();
    std::vector<int> order(match.pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return energy[a] > energy[b]; });

    core.A = Matrix(d, k);
    core.B = Matrix(d, k);
    core.pair_weight = Vector(k);
    for (int i = 0; i < k; ++i) {
        auto [p, q] = match.pairs[order[i]];
        // column p ~ alpha (b; a), column q ~ beta (b; -a)
        Vector tp = res.mixing.col(p).head(d), mp = res.mixing.col(p).tail(d);
        Vector tq = res.mixing.col(q).head(d), mq = res.mixing.col(q).tail(d);
        double s = tp.dot(tq) >= 0.0 ? 1.0 : -1.0;
        Vector b = tp + s * tq;
        Vector a = mp - s * mq;
        double bn = b.norm(), an = a.norm();
        if (bn < 1e-300 || an < 1e-300) {
            core.pairing_failed = true;
            b = Vector::Unit(d, i % d);
            a = Vector::Unit(d, i % d);
            bn = an = 1.0;
        }
        core.B.col(i) = b / bn;
        core.A.col(i) = a / an;
        core.pair_weight[i] = energy[order[i]];
    }
    return core;
}

}  // namespace

FactorizationReport factorize_asymmetric(const Tensor3& T, const FactorizeOptions& opts) {
    if (!T.is_cube()) throw std::invalid_argument("factorize_asymmetric: tensor not cube");
    const int d = T.d1();
    if (opts.rank < 1 || opts.rank > d)
        throw std::invalid_argument("factorize_asymmetric: rank out of range");
    const int L0 = opts.effective_projections();

    Rng rng = Rng(opts.seed).derive(0xa5b1);
    ProjectionSet set =
        make_projection_set(T, draw_directions(rng, L0, d, opts.direction_law));

    FactorizationReport report;
    report.diagnostics.seed = opts.seed;
    AsymmetricCore core =
        recover_two_modes(set.matrices, d, opts.rank, opts.diag, &report.stage0);
    report.diagnostics.objective0 = report.stage0.objective;
    report.diagnostics.pairing_failed = core.pairing_failed;

    // third mode and weights from the dual columns: T(vA_i, vB_i, I) = pi_i c_i
    Matrix VA = dual_columns(core.A);
    Matrix VB = dual_columns(core.B);
    Matrix C(d, opts.rank);
    Vector weights(opts.rank);
    for (int i = 0; i < opts.rank; ++i) {
        Vector pc = contract12(T, VA.col(i), VB.col(i));
        double n = pc.norm();
        if (n < 1e-300) {
            report.diagnostics.weight_degenerate = true;
            C.col(i) = Vector::Unit(d, i % d);
            weights[i] = 0.0;
        } else {
            C.col(i) = pc / n;
            weights[i] = n;
        }
    }

    report.estimate = CPModel::make_asymmetric(weights, core.A, core.B, C);
    report.estimate.canonicalize();
    report.diagnostics.mu = incoherence(report.estimate.A);
    report.diagnostics.rho_max =
        modulus_of_uniqueness(report.stage0.diagonals).max_off_diagonal();
    return report;
}

FourthOrderReport factorize_fourth_order(const Tensor4& T, const FactorizeOptions& opts) {
    if (!T.is_cube())
        throw std::invalid_argument("factorize_fourth_order: tensor not hypercube");
    const int d = T.d1();
    if (opts.rank < 1 || opts.rank > d)
        throw std::invalid_argument("factorize_fourth_order: rank out of range");
    const int L0 = opts.effective_projections();

    Rng rng = Rng(opts.seed).derive(0x0d4a);
    std::vector<Matrix> projections;
    projections.reserve(L0);
    for (int l = 0; l < L0; ++l) {
        Vector w = draw_direction(rng, d, opts.direction_law);
        Vector u = draw_direction(rng, d, opts.direction_law);
        projections.push_back(project4(T, w, u));
    }

    FourthOrderReport report;
    report.stage_a.diagnostics.seed = opts.seed;
    AsymmetricCore core =
        recover_two_modes(projections, d, opts.rank, opts.diag, &report.stage_a.stage0);
    report.stage_a.diagnostics.objective0 = report.stage_a.stage0.objective;
    report.stage_a.diagnostics.pairing_failed = core.pairing_failed;

    Matrix VA = dual_columns(core.A);
    Matrix VB = dual_columns(core.B);
    Matrix C(d, opts.rank), D(d, opts.rank);
    Vector weights(opts.rank);
    for (int i = 0; i < opts.rank; ++i) {
        // P_i = T(vA_i, vB_i, I, I) = pi_i c_i d_i^T up to the mode-pair signs
        Matrix P = contract12_4(T, VA.col(i), VB.col(i));
        Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        weights[i] = sv[0];
        if (sv.size() > 1 && sv[0] > 0.0 && (sv[0] - sv[1]) <= 1e-8 * sv[0])
            report.rank1_degenerate = true;
        if (sv[0] < 1e-300) {
            C.col(i) = Vector::Unit(d, i % d);
            D.col(i) = Vector::Unit(d, i % d);
            weights[i] = 0.0;
        } else {
            C.col(i) = svd.matrixU().col(0);
            D.col(i) = svd.matrixV().col(0);
        }
    }

    report.estimate = CPModel::make_asymmetric4(weights, core.A, core.B, C, D);
    report.estimate.canonicalize();
    report.stage_a.estimate =
        CPModel::make_asymmetric(weights, core.A, core.B, C);
    report.stage_a.estimate.canonicalize();
    return report;
}

}  // namespace tenfact
