#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "gfsc/errors.hpp"
#include "gfsc/matrix.hpp"

namespace gfsc {

struct EigenDecomposition {
    Vector eigenvalues;  // ascending; eigenvalues[i] pairs with eigenvectors.col(i)
    Matrix eigenvectors; // orthonormal columns
};

// Full eigendecomposition of a symmetric matrix. Input must be square and
// symmetric within 1e-10 (relative to its largest entry).
inline EigenDecomposition sym_eig(const Matrix& a) {
    require_symmetric(a, "sym_eig: input");
    require_finite(a, "sym_eig: input");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericalError("sym_eig: eigensolver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// Solves A X = B for symmetric positive definite A through a Cholesky
// factorization; A is never inverted explicitly.
inline Matrix solve_spd(const Matrix& a, const Matrix& b) {
    require_symmetric(a, "solve_spd: A");
    require(a.rows() == b.rows(), "solve_spd: A and B row counts differ");
    require_finite(a, "solve_spd: A");
    require_finite(b, "solve_spd: B");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(
            "solve_spd: Cholesky factorization failed; matrix is not positive definite "
            "(min diagonal " + std::to_string(a.diagonal().minCoeff()) +
            ", max diagonal " + std::to_string(a.diagonal().maxCoeff()) + ")");
    }
    return llt.solve(b);
}

// Deterministic random source. mt19937_64 has a standard-mandated output
// sequence, and the uniform/normal mappings below are spelled out by hand, so
// a given seed produces identical doubles on every platform and toolchain.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    static constexpr const char* algorithm =
        "mt19937_64 + 53-bit uniform + Box-Muller normal";

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); rejection sampling avoids modulo bias.
    std::size_t index(std::size_t n) {
        require(n > 0, "SeededRng::index: n must be positive");
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Matrix of independent standard normals, filled row-major.
    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix out(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
        return out;
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gfsc
