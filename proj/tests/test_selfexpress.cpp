#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <cmath>

using gfsc::IterationConfig;
using gfsc::LsrConfig;
using gfsc::Matrix;
using gfsc::RunOptions;
using gfsc::SeededRng;
using gfsc::TrrConfig;

namespace {

// Independent ridge route: column j of Z solves min ||X^T z - X^T e_j||^2 +
// alpha ||z||^2, computed through a QR factorization of the stacked system
// [X^T; sqrt(alpha) I]. No Gram matrix, no Cholesky.
Matrix ridge_by_stacked_qr(const Matrix& x, double alpha) {
    const Eigen::Index n = x.rows();
    const Eigen::Index m = x.cols();
    Matrix stacked(m + n, n);
    stacked.topRows(m) = x.transpose();
    stacked.bottomRows(n) = std::sqrt(alpha) * Matrix::Identity(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    Matrix rhs = Matrix::Zero(m + n, n);
    rhs.topRows(m) = x.transpose();
    return qr.solve(rhs);
}

} // namespace

TEST_CASE("lsr on orthonormal rows shrinks toward identity", "[selfexpress]") {
    // X X^T = I, so Z = I / (1 + alpha)
    const Matrix z = gfsc::lsr_coefficients(Matrix::Identity(2, 2), {1.0, false});
    CHECK(z(0, 0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(z(1, 1) == Catch::Approx(0.5).margin(1e-12));
    CHECK(std::abs(z(0, 1)) < 1e-12);
    CHECK(std::abs(z(1, 0)) < 1e-12);
}

TEST_CASE("lsr gives a zero row for a zero sample", "[selfexpress]") {
    Matrix x(2, 2);
    x << 1.0, 0.0, 0.0, 0.0;
    const Matrix z = gfsc::lsr_coefficients(x, {1.0, false});
    CHECK(z(0, 0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(std::abs(z(1, 1)) < 1e-12);
    CHECK(std::abs(z(0, 1)) < 1e-12);
    CHECK(std::abs(z(1, 0)) < 1e-12);
}

TEST_CASE("lsr matches an independent ridge solver", "[selfexpress]") {
    SeededRng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 8 + trial * 3;
        const int m = 4 + trial;
        const Matrix x = rng.normal_matrix(n, m);
        for (double alpha : {0.01, 0.5, 10.0}) {
            const Matrix z = gfsc::lsr_coefficients(x, {alpha, false});
            const Matrix oracle = ridge_by_stacked_qr(x, alpha);
            const double scale = std::max(1.0, oracle.cwiseAbs().maxCoeff());
            CHECK((z - oracle).cwiseAbs().maxCoeff() < 1e-8 * scale);
        }
    }
}

TEST_CASE("lsr coefficients are symmetric", "[selfexpress]") {
    SeededRng rng(73);
    const Matrix x = rng.normal_matrix(15, 6);
    const Matrix z = gfsc::lsr_coefficients(x, {0.1, false});
    const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
    CHECK((z - z.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("lsr zero-diag flag clears the diagonal", "[selfexpress]") {
    SeededRng rng(79);
    const Matrix x = rng.normal_matrix(10, 4);
    const Matrix z = gfsc::lsr_coefficients(x, {0.1, true});
    CHECK(z.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lsr validates its inputs", "[selfexpress]") {
    SeededRng rng(83);
    const Matrix x = rng.normal_matrix(5, 3);
    CHECK_THROWS_AS(gfsc::lsr_coefficients(x, {0.0, false}), gfsc::ContractViolation);
    CHECK_THROWS_AS(gfsc::lsr_coefficients(x, {-1.0, false}), gfsc::ContractViolation);
    CHECK_THROWS_AS(gfsc::lsr_coefficients(Matrix::Zero(1, 3), {1.0, false}),
                    gfsc::ContractViolation);
}

TEST_CASE("affinity symmetrization of coefficients", "[selfexpress]") {
    Matrix z(2, 2);
    z << 1.0, -3.0, 1.0, 1.0;
    const Matrix w = gfsc::affinity_from_coefficients(z);
    CHECK(w(0, 0) == 1.0);
    CHECK(w(0, 1) == 2.0);
    CHECK(w(1, 0) == 2.0);
    CHECK(w(1, 1) == 1.0);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.minCoeff() >= 0.0);
}

TEST_CASE("row thresholding keeps the p largest magnitudes", "[selfexpress]") {
    Matrix w(1, 3);
    w << 3.0, 1.0, 2.0;
    const Matrix kept = gfsc::trr_threshold(w, 2);
    CHECK(kept(0, 0) == 3.0);
    CHECK(kept(0, 1) == 0.0);
    CHECK(kept(0, 2) == 2.0);
}

TEST_CASE("row thresholding breaks ties toward lower indices", "[selfexpress]") {
    Matrix w(1, 3);
    w << 1.0, 1.0, 1.0;
    const Matrix kept = gfsc::trr_threshold(w, 1);
    CHECK(kept(0, 0) == 1.0);
    CHECK(kept(0, 1) == 0.0);
    CHECK(kept(0, 2) == 0.0);
}

TEST_CASE("row thresholding is idempotent and respects magnitude sign", "[selfexpress]") {
    SeededRng rng(89);
    const Matrix w = rng.normal_matrix(7, 7);
    const Matrix once = gfsc::trr_threshold(w, 3);
    const Matrix twice = gfsc::trr_threshold(once, 3);
    CHECK((once - twice).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 7; ++i) CHECK((once.row(i).array() != 0.0).count() <= 3);

    // p = n keeps everything
    CHECK((gfsc::trr_threshold(w, 7) - w).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(gfsc::trr_threshold(w, 0), gfsc::ContractViolation);
    CHECK_THROWS_AS(gfsc::trr_threshold(w, 8), gfsc::ContractViolation);
}

TEST_CASE("first fixed-point residual is the norm of the first affinity", "[selfexpress]") {
    SeededRng rng(97);
    const Matrix x = rng.normal_matrix(12, 5);
    const LsrConfig lsr{0.5, false};
    // a huge epsilon stops the loop right after the first solve
    IterationConfig it;
    it.filter_order = 2;
    it.epsilon = 1e9;
    const auto result = gfsc::run_flsr(x, lsr, it);
    REQUIRE(result.trace.records.size() == 1);
    CHECK(result.trace.converged);
    const Matrix w1 = gfsc::lsr_coefficients(x, lsr).cwiseAbs();
    CHECK(result.trace.records[0].residual_sq ==
          Catch::Approx(w1.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("fixed-point runs are deterministic", "[selfexpress]") {
    SeededRng rng(101);
    const Matrix x = rng.normal_matrix(20, 6);
    IterationConfig it;
    it.filter_order = 1;
    it.max_iter = 8;
    const auto a = gfsc::run_flsr(x, {0.2, false}, it);
    const auto b = gfsc::run_flsr(x, {0.2, false}, it);
    CHECK((a.affinity - b.affinity).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.trace.records.size() == b.trace.records.size());
    for (std::size_t t = 0; t < a.trace.records.size(); ++t)
        CHECK(a.trace.records[t].residual_sq == b.trace.records[t].residual_sq);
}

TEST_CASE("max_iter caps the loop and flags non-convergence", "[selfexpress]") {
    SeededRng rng(103);
    const Matrix x = rng.normal_matrix(15, 5);
    IterationConfig it;
    it.filter_order = 1;
    it.epsilon = 1e-30; // unreachable
    it.max_iter = 3;
    const auto result = gfsc::run_flsr(x, {0.3, false}, it);
    CHECK(result.trace.records.size() == 3);
    CHECK_FALSE(result.trace.converged);
    CHECK(result.affinity.rows() == 15);
    CHECK((result.affinity - result.affinity.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observer sees every iteration, in order", "[selfexpress]") {
    SeededRng rng(107);
    const Matrix x = rng.normal_matrix(10, 4);
    IterationConfig it;
    it.filter_order = 0; // smoothing disabled: the representation never changes
    it.epsilon = 1e-30;
    it.max_iter = 4;
    RunOptions opts;
    opts.min_iterations = 4; // identical affinities would otherwise stop the loop at two
    int calls = 0;
    opts.observer = [&](int t, const Matrix& smoothed, const Matrix& affinity) {
        ++calls;
        CHECK(t == calls);
        CHECK((smoothed - x).cwiseAbs().maxCoeff() == 0.0);
        CHECK(affinity.rows() == 10);
        CHECK(affinity.minCoeff() >= 0.0);
    };
    gfsc::run_flsr(x, {0.4, false}, it, opts);
    CHECK(calls == 4);
}

TEST_CASE("min_iterations defers convergence", "[selfexpress]") {
    SeededRng rng(109);
    const Matrix x = rng.normal_matrix(10, 4);
    IterationConfig it;
    it.filter_order = 1;
    it.epsilon = 1e9; // would stop immediately
    it.max_iter = 10;
    RunOptions opts;
    opts.min_iterations = 5;
    const auto result = gfsc::run_flsr(x, {0.4, false}, it, opts);
    CHECK(result.trace.records.size() == 5);
    CHECK(result.trace.converged);
}

TEST_CASE("refilter-previous variant runs and stays symmetric", "[selfexpress]") {
    SeededRng rng(113);
    const Matrix x = rng.normal_matrix(14, 5);
    IterationConfig it;
    it.filter_order = 1;
    it.max_iter = 6;
    it.refilter_previous = true;
    const auto result = gfsc::run_flsr(x, {0.3, false}, it);
    CHECK(result.trace.records.size() >= 1);
    CHECK((result.affinity - result.affinity.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ftrr with p = n reproduces flsr exactly", "[selfexpress]") {
    SeededRng rng(127);
    const Matrix x = rng.normal_matrix(12, 4);
    IterationConfig it;
    it.filter_order = 1;
    it.max_iter = 5;
    const auto flsr = gfsc::run_flsr(x, {0.2, false}, it);
    const auto ftrr = gfsc::run_ftrr(x, TrrConfig{{0.2, false}, 12}, it);
    CHECK((flsr.affinity - ftrr.affinity).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ftrr affinity is symmetric, nonnegative and sparse per row", "[selfexpress]") {
    SeededRng rng(131);
    const Matrix x = rng.normal_matrix(16, 5);
    IterationConfig it;
    it.filter_order = 1;
    it.max_iter = 6;
    const int p = 4;
    const auto result = gfsc::run_ftrr(x, TrrConfig{{0.2, false}, p}, it);
    const Matrix& w = result.affinity;
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.minCoeff() >= 0.0);
    // symmetrizing the row-thresholded matrix can at most double the support
    for (int i = 0; i < 16; ++i) CHECK((w.row(i).array() != 0.0).count() <= 2 * p);
}

TEST_CASE("fixed-point loop validates its configuration", "[selfexpress]") {
    SeededRng rng(137);
    const Matrix x = rng.normal_matrix(6, 3);
    IterationConfig bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(gfsc::run_flsr(x, {0.1, false}, bad), gfsc::ContractViolation);
    bad = {};
    bad.max_iter = 0;
    CHECK_THROWS_AS(gfsc::run_flsr(x, {0.1, false}, bad), gfsc::ContractViolation);
    bad = {};
    bad.filter_order = -1;
    CHECK_THROWS_AS(gfsc::run_flsr(x, {0.1, false}, bad), gfsc::ContractViolation);
}

TEST_CASE("orthogonal subspaces meet the stopping rule", "[selfexpress]") {
    gfsc::SubspaceSpec spec;
    spec.ambient_dim = 12;
    spec.subspace_dim = 2;
    spec.clusters = 2;
    spec.samples_per_cluster = 15;
    spec.noise_sigma = 0.0;
    spec.seed = 5;
    spec.orthogonal_bases = true;
    const auto data = gfsc::gen_subspaces(spec);
    IterationConfig it;
    it.filter_order = 1;
    const auto result = gfsc::run_flsr(data.features, {1.0, false}, it);
    CHECK(result.trace.converged);
    CHECK(result.trace.records.size() <= 15);
    CHECK(result.trace.records.back().residual_sq < 1e-5);
}
