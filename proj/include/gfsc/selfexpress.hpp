#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "gfsc/errors.hpp"
#include "gfsc/graph.hpp"
#include "gfsc/matrix.hpp"
#include "gfsc/numerics.hpp"

namespace gfsc {

struct LsrConfig {
    double alpha = 0.0;    // ridge weight, must be > 0
    bool zero_diag = false; // zero the self-representation diagonal after solving
};

struct TrrConfig {
    LsrConfig base;
    int keep_per_row = 0; // p largest-magnitude entries survive per row
};

struct IterationConfig {
    int filter_order = 1;   // k successive smoothing steps per iteration
    double epsilon = 1e-5;  // stop when ||W_t - W_{t-1}||_F^2 falls below this
    int max_iter = 50;
    bool refilter_previous = false; // smooth the previous iterate instead of the raw input
};

struct IterationRecord {
    double residual_sq = 0.0; // ||W_t - W_{t-1}||_F^2
    double seconds = 0.0;
};

struct MetricSnapshot {
    double acc = 0.0;
    double nmi = 0.0;
    double pur = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    std::vector<MetricSnapshot> snapshots; // filled by observers that track metrics
    bool converged = false;

    int iterations() const { return static_cast<int>(records.size()); }
};

// Called after iteration t with the representation produced by that
// iteration's smoothing step and the affinity |Z_t| it clustered on.
using IterationObserver =
    std::function<void(int iteration, const Matrix& smoothed, const Matrix& affinity)>;

struct RunOptions {
    IterationObserver observer;
    int min_iterations = 1; // convergence check is suppressed before this count
};

struct FixedPointResult {
    Matrix affinity; // symmetrized (|Z^T| + |Z|) / 2 of the final coefficients
    IterationTrace trace;
};

// Ridge-regularized self-expression in closed form: solves
// (X X^T + alpha I) Z = X X^T through a Cholesky factorization, so each sample
// is reconstructed from all others with a least-squares penalty on the codes.
inline Matrix lsr_coefficients(const Matrix& x, const LsrConfig& cfg) {
    require(cfg.alpha > 0.0, "lsr: alpha must be positive");
    const Eigen::Index n = x.rows();
    require(n >= 2, "lsr: need at least 2 samples");
    require_finite(x, "lsr: features");

    Matrix gram = Matrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x); // exactly symmetric X X^T
    gram = Matrix(gram.selfadjointView<Eigen::Lower>());

    Matrix system = gram;
    system.diagonal().array() += cfg.alpha;
    Matrix z = solve_spd(system, gram);
    if (cfg.zero_diag) z.diagonal().setZero();
    return z;
}

// Affinity from representation coefficients: (|Z^T| + |Z|) / 2. Exactly
// symmetric because entries (i,j) and (j,i) sum the same two magnitudes.
inline Matrix affinity_from_coefficients(const Matrix& z) {
    require(z.rows() == z.cols(), "affinity_from_coefficients: Z must be square");
    return 0.5 * (z.cwiseAbs() + z.transpose().cwiseAbs());
}

// Keeps the `keep_per_row` largest-magnitude entries of each row and zeroes
// the rest. Ties break toward the lower column index, which makes the
// operation idempotent for a fixed p.
inline Matrix trr_threshold(const Matrix& w, int keep_per_row) {
    const Eigen::Index n = w.cols();
    require(keep_per_row >= 1 && keep_per_row <= n,
            "trr_threshold: p must be in [1, columns]");
    Matrix out = Matrix::Zero(w.rows(), n);
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::partial_sort(order.begin(), order.begin() + keep_per_row, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              const double va = std::abs(w(i, a));
                              const double vb = std::abs(w(i, b));
                              if (va != vb) return va > vb;
                              return a < b;
                          });
        for (int r = 0; r < keep_per_row; ++r) out(i, order[r]) = w(i, order[r]);
    }
    return out;
}

// Fixed-point loop alternating self-expression with graph smoothing. Each
// iteration solves the ridge system on the current representation, reads the
// affinity W_t = |Z_t|, and (unless stopping) rebuilds the graph from W_t to
// smooth the input for the next round. Starts from W_0 = 0, so the first
// residual is ||W_1||_F^2 and at least one full iteration always runs. When
// the residual never drops below epsilon the last affinity is returned with
// converged = false.
inline FixedPointResult run_flsr(const Matrix& x, const LsrConfig& lsr,
                                 const IterationConfig& it, const RunOptions& opts = {}) {
    require(it.epsilon > 0.0, "run_flsr: epsilon must be positive");
    require(it.max_iter >= 1, "run_flsr: max_iter must be >= 1");
    require(it.filter_order >= 0, "run_flsr: filter order must be >= 0");
    require(opts.min_iterations >= 1, "run_flsr: min_iterations must be >= 1");
    require_finite(x, "run_flsr: features");

    using Clock = std::chrono::steady_clock;
    IterationTrace trace;
    Matrix smoothed = x;
    Matrix w_prev = Matrix::Zero(x.rows(), x.rows());
    Matrix z;

    for (int t = 1; t <= it.max_iter; ++t) {
        const auto started = Clock::now();
        z = lsr_coefficients(smoothed, lsr);
        Matrix w = z.cwiseAbs();
        const double residual = (w - w_prev).squaredNorm();
        const bool stop = t >= opts.min_iterations && residual < it.epsilon;

        if ((!stop && t < it.max_iter) || opts.observer) {
            NormalizedLaplacian lap = normalized_laplacian(w);
            smoothed = apply_filter(lap, it.filter_order,
                                    it.refilter_previous ? smoothed : x);
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
        trace.records.push_back({residual, seconds});
        if (opts.observer) opts.observer(t, smoothed, w);
        w_prev = std::move(w);
        if (stop) {
            trace.converged = true;
            break;
        }
    }
    return {affinity_from_coefficients(z), std::move(trace)};
}

// Same loop, then row-wise thresholding of the converged affinity followed by
// a final symmetrization.
inline FixedPointResult run_ftrr(const Matrix& x, const TrrConfig& trr,
                                 const IterationConfig& it, const RunOptions& opts = {}) {
    FixedPointResult result = run_flsr(x, trr.base, it, opts);
    Matrix kept = trr_threshold(result.affinity, trr.keep_per_row);
    result.affinity = affinity_from_coefficients(kept);
    return result;
}

} // namespace gfsc
