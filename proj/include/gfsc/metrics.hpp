#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gfsc/errors.hpp"
#include "gfsc/matrix.hpp"

namespace gfsc {

// Optimal assignment minimizing total cost over permutations; the classic
// O(n^3) potentials formulation of Kuhn-Munkres. Returns match[row] = column.
inline std::vector<int> hungarian_assign(const Matrix& cost) {
    require(cost.rows() == cost.cols(), "hungarian_assign: cost matrix must be square");
    require_finite(cost, "hungarian_assign: cost");
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, inf);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> result(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] != 0) result[match[j] - 1] = j - 1;
    return result;
}

struct ContingencyTable {
    Matrix counts; // counts(i, j) = |samples with first label i and second label j|
    int rows() const { return static_cast<int>(counts.rows()); }
    int cols() const { return static_cast<int>(counts.cols()); }
    double total() const { return counts.sum(); }
};

inline void require_comparable(const Labels& a, const Labels& b, const std::string& who) {
    require(!a.empty(), who + ": label vectors must be non-empty");
    require(a.size() == b.size(), who + ": label vectors must have equal length");
}

inline ContingencyTable contingency_table(const Labels& a, const Labels& b) {
    require_comparable(a, b, "contingency_table");
    const CanonicalLabels ca = canonicalize_labels(a);
    const CanonicalLabels cb = canonicalize_labels(b);
    Matrix counts = Matrix::Zero(ca.groups, cb.groups);
    for (std::size_t i = 0; i < a.size(); ++i)
        counts(ca.labels[i], cb.labels[i]) += 1.0;
    return {std::move(counts)};
}

// Clustering accuracy: fraction of samples kept by the best one-to-one
// relabeling of predictions, found by Hungarian assignment on the (zero
// padded, square) overlap table.
inline double accuracy(const Labels& predicted, const Labels& truth) {
    require_comparable(predicted, truth, "accuracy");
    const ContingencyTable table = contingency_table(predicted, truth);
    const int side = std::max(table.rows(), table.cols());
    Matrix overlap = Matrix::Zero(side, side);
    overlap.topLeftCorner(table.rows(), table.cols()) = table.counts;
    const std::vector<int> assign = hungarian_assign(-overlap);
    double matched = 0.0;
    for (int r = 0; r < side; ++r) matched += overlap(r, assign[r]);
    return matched / static_cast<double>(predicted.size());
}

// Normalized mutual information with natural logarithms and the square-root
// normalization. Conventions for degenerate partitions: both sides a single
// cluster -> 1 (identical partitions), exactly one side a single cluster -> 0.
inline double nmi(const Labels& a, const Labels& b) {
    require_comparable(a, b, "nmi");
    const ContingencyTable table = contingency_table(a, b);
    const double n = table.total();
    const Vector row_sum = table.counts.rowwise().sum();
    const Vector col_sum = table.counts.colwise().sum();

    auto entropy = [n](const Vector& marginal) {
        double h = 0.0;
        for (Eigen::Index i = 0; i < marginal.size(); ++i) {
            const double p = marginal[i] / n;
            if (p > 0.0) h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(row_sum);
    const double hb = entropy(col_sum);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;

    double mi = 0.0;
    for (int i = 0; i < table.rows(); ++i) {
        for (int j = 0; j < table.cols(); ++j) {
            const double nij = table.counts(i, j);
            if (nij <= 0.0) continue;
            mi += (nij / n) * std::log(n * nij / (row_sum[i] * col_sum[j]));
        }
    }
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

// Purity: each predicted cluster votes for its dominant true class.
inline double purity(const Labels& predicted, const Labels& truth) {
    require_comparable(predicted, truth, "purity");
    const ContingencyTable table = contingency_table(predicted, truth);
    double dominant = 0.0;
    for (int i = 0; i < table.rows(); ++i) dominant += table.counts.row(i).maxCoeff();
    return dominant / table.total();
}

namespace detail {

// Biased (divide by n) covariance, built from a rank update so it is exactly
// symmetric.
inline Matrix biased_covariance(const Matrix& samples) {
    const Matrix centered = samples.rowwise() - samples.colwise().mean();
    Matrix cov = Matrix::Zero(samples.cols(), samples.cols());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.adjoint());
    cov = Matrix(cov.selfadjointView<Eigen::Lower>());
    return cov / static_cast<double>(samples.rows());
}

} // namespace detail

// Two-class Fisher discriminant score J = d^T (S_a + S_b)^{-1} d with d the
// mean difference and S the biased class covariances, stabilized by a ridge of
// 1e-9 * trace / m. Identical class means give exactly 0.
inline double fisher_score(const Matrix& class_a, const Matrix& class_b) {
    require(class_a.rows() >= 1 && class_b.rows() >= 1,
            "fisher_score: both classes must be non-empty");
    require(class_a.cols() == class_b.cols(), "fisher_score: feature dimensions differ");
    require_finite(class_a, "fisher_score: class A");
    require_finite(class_b, "fisher_score: class B");
    const Eigen::Index m = class_a.cols();

    const Vector diff = class_a.colwise().mean().transpose() -
                        class_b.colwise().mean().transpose();
    if ((diff.array() == 0.0).all()) return 0.0;

    Matrix scatter = detail::biased_covariance(class_a) + detail::biased_covariance(class_b);
    const double trace = scatter.trace();
    if (!(trace > 0.0))
        throw NumericalError("fisher_score: pooled within-class scatter is zero");
    scatter.diagonal().array() += 1e-9 * trace / static_cast<double>(m);

    Eigen::LDLT<Matrix> ldlt(scatter);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("fisher_score: scatter factorization failed");
    const double score = diff.dot(ldlt.solve(diff));
    if (!std::isfinite(score))
        throw NumericalError("fisher_score: non-finite score (ill-conditioned scatter)");
    return score;
}

// Mean pairwise Fisher score over all unordered class pairs.
inline double pairwise_fisher_mean(const Matrix& x, const Labels& labels) {
    require(static_cast<std::size_t>(x.rows()) == labels.size(),
            "pairwise_fisher_mean: label count must match sample count");
    const CanonicalLabels canon = canonicalize_labels(labels);
    require(canon.groups >= 2, "pairwise_fisher_mean: need at least 2 classes");

    std::vector<std::vector<Eigen::Index>> members(canon.groups);
    for (std::size_t i = 0; i < canon.labels.size(); ++i)
        members[canon.labels[i]].push_back(static_cast<Eigen::Index>(i));
    std::vector<Matrix> split(canon.groups);
    for (int c = 0; c < canon.groups; ++c) {
        split[c].resize(static_cast<Eigen::Index>(members[c].size()), x.cols());
        for (std::size_t r = 0; r < members[c].size(); ++r)
            split[c].row(static_cast<Eigen::Index>(r)) = x.row(members[c][r]);
    }

    double sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < canon.groups; ++i) {
        for (int j = i + 1; j < canon.groups; ++j) {
            sum += fisher_score(split[i], split[j]);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

struct ImagePair {
    Matrix reference;
    Matrix candidate;
    double dynamic_range = 1.0;
};

// Pairs a reference image with a candidate. Without an explicit dynamic range
// the reference's observed range is used, falling back to 1.0 for constant
// images; an explicit range must be positive.
inline ImagePair make_image_pair(Matrix reference, Matrix candidate,
                                 std::optional<double> dynamic_range = std::nullopt) {
    require(reference.rows() == candidate.rows() && reference.cols() == candidate.cols(),
            "image pair: reference and candidate shapes differ");
    require(reference.size() > 0, "image pair: images must be non-empty");
    require_finite(reference, "image pair: reference");
    require_finite(candidate, "image pair: candidate");
    double range;
    if (dynamic_range) {
        require(*dynamic_range > 0.0, "image pair: dynamic range must be positive");
        range = *dynamic_range;
    } else {
        const double observed = reference.maxCoeff() - reference.minCoeff();
        range = observed > 0.0 ? observed : 1.0;
    }
    return {std::move(reference), std::move(candidate), range};
}

// Peak signal-to-noise ratio in dB; identical images give +infinity.
inline double psnr(const ImagePair& pair) {
    const double mse =
        (pair.reference - pair.candidate).squaredNorm() / static_cast<double>(pair.reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(pair.dynamic_range * pair.dynamic_range / mse);
}

// Structural similarity with the standard constants K1 = 0.01, K2 = 0.03 and
// an 11x11 Gaussian window (sigma 1.5), averaged over all fully interior
// window positions. Images smaller than the window fall back to one uniform
// window spanning the whole image.
inline double ssim(const ImagePair& pair) {
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    const double c1 = std::pow(0.01 * pair.dynamic_range, 2);
    const double c2 = std::pow(0.03 * pair.dynamic_range, 2);
    const Matrix& ref = pair.reference;
    const Matrix& cand = pair.candidate;

    auto local_score = [&](double mx, double my, double vx, double vy, double cov) {
        return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
    };

    if (ref.rows() < kWindow || ref.cols() < kWindow) {
        const double count = static_cast<double>(ref.size());
        const double mx = ref.mean();
        const double my = cand.mean();
        const double vx = ref.squaredNorm() / count - mx * mx;
        const double vy = cand.squaredNorm() / count - my * my;
        const double cov = ref.cwiseProduct(cand).sum() / count - mx * my;
        return local_score(mx, my, vx, vy, cov);
    }

    Matrix window(kWindow, kWindow);
    for (int r = 0; r < kWindow; ++r) {
        for (int c = 0; c < kWindow; ++c) {
            const double dr = r - (kWindow - 1) / 2.0;
            const double dc = c - (kWindow - 1) / 2.0;
            window(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
        }
    }
    window /= window.sum();

    double total = 0.0;
    long positions = 0;
    for (Eigen::Index top = 0; top + kWindow <= ref.rows(); ++top) {
        for (Eigen::Index left = 0; left + kWindow <= ref.cols(); ++left) {
            const auto rx = ref.block(top, left, kWindow, kWindow);
            const auto cy = cand.block(top, left, kWindow, kWindow);
            const double mx = rx.cwiseProduct(window).sum();
            const double my = cy.cwiseProduct(window).sum();
            const double vx = rx.cwiseProduct(rx).cwiseProduct(window).sum() - mx * mx;
            const double vy = cy.cwiseProduct(cy).cwiseProduct(window).sum() - my * my;
            const double cov = rx.cwiseProduct(cy).cwiseProduct(window).sum() - mx * my;
            total += local_score(mx, my, vx, vy, cov);
            ++positions;
        }
    }
    return total / static_cast<double>(positions);
}

} // namespace gfsc
