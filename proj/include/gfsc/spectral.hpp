#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "gfsc/errors.hpp"
#include "gfsc/graph.hpp"
#include "gfsc/matrix.hpp"
#include "gfsc/numerics.hpp"

namespace gfsc {

struct SpectralEmbedding {
    Matrix coordinates; // n x g, rows scaled to unit norm (all-zero rows stay zero)
    Matrix basis;       // the raw eigenvectors, sign-canonicalized
    Vector eigenvalues; // the g smallest Laplacian eigenvalues, ascending
};

// Embeds graph nodes using the g smallest eigenvectors of the normalized
// Laplacian. Each eigenvector's sign is canonicalized (first nonzero component
// positive) so the embedding is deterministic, then rows are normalized to the
// unit sphere.
inline SpectralEmbedding spectral_embed(const Matrix& w, int g) {
    validate_affinity(w);
    require(g >= 1, "spectral_embed: g must be >= 1");
    require(g <= w.rows(), "spectral_embed: g exceeds the sample count");

    const NormalizedLaplacian lap = normalized_laplacian(w);
    const EigenDecomposition eig = sym_eig(lap.matrix);
    Matrix basis = eig.eigenvectors.leftCols(g);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        for (Eigen::Index r = 0; r < basis.rows(); ++r) {
            if (basis(r, c) != 0.0) {
                if (basis(r, c) < 0.0) basis.col(c) = -basis.col(c);
                break;
            }
        }
    }
    Matrix coords = basis;
    for (Eigen::Index r = 0; r < coords.rows(); ++r) {
        const double norm = coords.row(r).norm();
        if (norm > 0.0) coords.row(r) /= norm;
    }
    return {std::move(coords), std::move(basis), eig.eigenvalues.head(g)};
}

struct ClusterAssignment {
    Labels labels; // values in 0..clusters-1
    int clusters = 0;
    double inertia = 0.0; // sum of squared distances to the winning centers
};

struct KmeansOptions {
    int max_iterations = 300;
    double relative_tolerance = 1e-9; // on the inertia improvement
};

namespace detail {

struct LloydOutcome {
    Labels labels;
    double inertia = 0.0;
};

inline LloydOutcome lloyd_once(const Matrix& points, int g, SeededRng& rng,
                               const KmeansOptions& opt) {
    const Eigen::Index n = points.rows();
    const Eigen::Index dim = points.cols();

    // k-means++ seeding
    Matrix centers(g, dim);
    std::vector<char> taken(n, 0);
    Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    centers.row(0) = points.row(first);
    taken[first] = 1;
    Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < g; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double threshold = rng.uniform() * total;
            double cumulative = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                cumulative += d2[i];
                if (cumulative >= threshold) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1; // guard against round-off at the far end
        } else {
            // all remaining mass sits on the chosen centers; take the first
            // index not already used so centers stay distinct when possible
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!taken[i]) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = 0;
        }
        centers.row(c) = points.row(pick);
        taken[pick] = 1;
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    Labels labels(static_cast<std::size_t>(n), 0);
    double inertia = std::numeric_limits<double>::infinity();
    for (int round = 0; round < opt.max_iterations; ++round) {
        // assignment step; ties go to the lower center index
        bool changed = false;
        double next_inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < g; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            next_inertia += best_d;
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        // repair empty clusters with the points farthest from their centers
        std::vector<Eigen::Index> count(static_cast<std::size_t>(g), 0);
        for (std::size_t i = 0; i < labels.size(); ++i) ++count[static_cast<std::size_t>(labels[i])];
        for (int c = 0; c < g; ++c) {
            if (count[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int owner = labels[static_cast<std::size_t>(i)];
                if (count[static_cast<std::size_t>(owner)] <= 1) continue;
                const double d = (points.row(i) - centers.row(owner)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) continue;
            --count[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = c;
            ++count[static_cast<std::size_t>(c)];
            changed = true;
        }

        // update step
        centers.setZero();
        Vector sizes = Vector::Zero(g);
        for (Eigen::Index i = 0; i < n; ++i) {
            centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            sizes[labels[static_cast<std::size_t>(i)]] += 1.0;
        }
        for (int c = 0; c < g; ++c)
            if (sizes[c] > 0.0) centers.row(c) /= sizes[c];

        const double improvement = inertia - next_inertia;
        inertia = next_inertia;
        if (!changed) break;
        if (improvement >= 0.0 && improvement <= opt.relative_tolerance * std::max(inertia, 1e-300))
            break;
    }

    // final inertia against the updated centers
    double final_inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        final_inertia += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return {std::move(labels), final_inertia};
}

} // namespace detail

// Seeded k-means with k-means++ initialization and multiple restarts; the
// lowest-inertia restart wins, earlier restarts win ties. Restart r always
// consumes the r-th derived seed, so results do not depend on scheduling.
inline ClusterAssignment kmeans(const Matrix& points, int g, SeededRng& rng,
                                int restarts = 20, const KmeansOptions& opt = {}) {
    require(points.rows() >= 1, "kmeans: need at least one point");
    require(g >= 1, "kmeans: g must be >= 1");
    require(g <= points.rows(), "kmeans: g exceeds the number of points");
    require(restarts >= 1, "kmeans: restarts must be >= 1");
    require_finite(points, "kmeans: points");

    std::vector<std::uint64_t> restart_seeds(static_cast<std::size_t>(restarts));
    for (int r = 0; r < restarts; ++r) restart_seeds[static_cast<std::size_t>(r)] = rng.next_u64();

    detail::LloydOutcome best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        SeededRng restart_rng(restart_seeds[static_cast<std::size_t>(r)]);
        detail::LloydOutcome outcome = detail::lloyd_once(points, g, restart_rng, opt);
        if (!have_best || outcome.inertia < best.inertia) {
            best = std::move(outcome);
            have_best = true;
        }
    }
    return {std::move(best.labels), g, best.inertia};
}

// Spectral clustering: embed with the g smallest Laplacian eigenvectors, then
// run seeded k-means on the normalized rows.
inline ClusterAssignment cluster(const Matrix& affinity, int g, SeededRng& rng,
                                 int restarts = 20) {
    const SpectralEmbedding embedding = spectral_embed(affinity, g);
    return kmeans(embedding.coordinates, g, rng, restarts);
}

} // namespace gfsc
