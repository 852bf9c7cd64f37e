#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "gfsc/errors.hpp"
#include "gfsc/matrix.hpp"

namespace gfsc {

// An affinity matrix must be square, finite, entrywise nonnegative and
// symmetric within 1e-10.
inline void validate_affinity(const Matrix& w) {
    require(w.rows() == w.cols(), "affinity: matrix must be square");
    require_finite(w, "affinity");
    Eigen::Index i = 0, j = 0;
    if (w.size() > 0 && w.minCoeff(&i, &j) < 0.0)
        throw ContractViolation("affinity: negative weight at (" + std::to_string(i) +
                                ", " + std::to_string(j) + ")");
    require_symmetric(w, "affinity", 1e-10);
}

struct NormalizedLaplacian {
    Matrix matrix; // I - D^{-1/2} W D^{-1/2}, exactly symmetric
    Vector degree; // row sums of W

    Eigen::Index size() const { return matrix.rows(); }
};

// Symmetrically normalized graph Laplacian. Zero-degree nodes get an identity
// row/column (the convention 1/sqrt(0) -> 0), keeping the spectrum in [0, 2].
inline NormalizedLaplacian normalized_laplacian(const Matrix& w) {
    validate_affinity(w);
    Vector degree = w.rowwise().sum();
    Vector dinv = degree.unaryExpr(
        [](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0; });
    Matrix lap = -(dinv.asDiagonal() * w * dinv.asDiagonal());
    lap.diagonal().array() += 1.0;
    lap = (0.5 * (lap + lap.transpose())).eval(); // force exact symmetry
    return {std::move(lap), std::move(degree)};
}

struct GraphFilterSpec {
    int order = 1; // 0 means identity pass-through
    NormalizedLaplacian laplacian;
};

// Low-pass filters the columns-as-features signal matrix: (I - L/2)^order X,
// computed as `order` successive multiplications, never an explicit matrix
// power. Switches to a compressed sparse operator when at least 90% of the
// filter entries are exact zeros.
inline Matrix apply_filter(const GraphFilterSpec& spec, const Matrix& x) {
    require(spec.order >= 0, "apply_filter: order must be >= 0");
    const Matrix& lap = spec.laplacian.matrix;
    require(lap.rows() == x.rows(),
            "apply_filter: Laplacian size does not match sample count");
    if (spec.order == 0) return x;

    Matrix smoother = -0.5 * lap;
    smoother.diagonal().array() += 1.0;

    const auto total = smoother.size();
    const auto zeros = (smoother.array() == 0.0).count();
    Matrix y = x;
    if (zeros * 10 >= total * 9) {
        Eigen::SparseMatrix<double> sparse = smoother.sparseView();
        for (int step = 0; step < spec.order; ++step) y = sparse * y;
    } else {
        for (int step = 0; step < spec.order; ++step) y = smoother * y;
    }
    return y;
}

inline Matrix apply_filter(const NormalizedLaplacian& lap, int order, const Matrix& x) {
    return apply_filter(GraphFilterSpec{order, lap}, x);
}

// Scalar gain of the order-k filter at Laplacian eigenvalue lambda: (1 - lambda/2)^k.
inline double frequency_response(int order, double lambda) {
    require(order >= 0, "frequency_response: order must be >= 0");
    require(lambda >= -1e-8 && lambda <= 2.0 + 1e-8,
            "frequency_response: eigenvalue outside [0, 2]");
    return std::pow(1.0 - std::clamp(lambda, 0.0, 2.0) / 2.0, order);
}

// Quadratic form f^T L f: how rough the signal f is on the graph.
inline double smoothness_energy(const NormalizedLaplacian& lap, const Vector& f) {
    require(lap.matrix.rows() == f.size(), "smoothness_energy: dimension mismatch");
    return f.dot(lap.matrix * f);
}

// Gaussian-kernel k-nearest-neighbor affinity with self-tuning bandwidths:
// sigma_i is the distance from sample i to its 7th neighbor (or the farthest
// available when fewer exist). Linked pairs get exp(-d^2 / (sigma_i sigma_j)),
// coincident samples weight 1, and the result is symmetrized by elementwise
// maximum with a zero diagonal. Neighbor ties break toward the lower index.
inline Matrix knn_affinity(const Matrix& x, int neighbors) {
    const Eigen::Index n = x.rows();
    require(n >= 2, "knn_affinity: need at least 2 samples");
    require(neighbors >= 1 && neighbors < n, "knn_affinity: neighbors must be in [1, n)");
    require_finite(x, "knn_affinity: features");

    Vector sq = x.rowwise().squaredNorm();
    Matrix d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * (x * x.transpose());
    d2 = d2.cwiseMax(0.0); // clip tiny negative round-off

    const int bandwidth_rank = std::min<int>(7, static_cast<int>(n) - 1);
    std::vector<Eigen::Index> order(n);
    Matrix w = Matrix::Zero(n, n);
    Vector sigma(n);
    std::vector<std::vector<Eigen::Index>> nearest(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        order.resize(n - 1);
        Eigen::Index fill = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) order[fill++] = j;
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (d2(i, a) != d2(i, b)) return d2(i, a) < d2(i, b);
            return a < b;
        });
        sigma[i] = std::sqrt(d2(i, order[bandwidth_rank - 1]));
        nearest[i].assign(order.begin(), order.begin() + neighbors);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j : nearest[i]) {
            double weight;
            if (d2(i, j) == 0.0) {
                weight = 1.0;
            } else {
                const double denom = sigma[i] * sigma[j];
                weight = denom > 0.0 ? std::exp(-d2(i, j) / denom) : 0.0;
            }
            w(i, j) = weight;
        }
    }
    w = w.cwiseMax(w.transpose().eval());
    w.diagonal().setZero();
    return w;
}

} // namespace gfsc
