#pragma once

#include <Eigen/Dense>

#include <string>
#include <unordered_map>
#include <vector>

#include "gfsc/errors.hpp"

namespace gfsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

inline void require_finite(const Matrix& m, const std::string& name) {
    if (!m.allFinite()) throw ContractViolation(name + " contains non-finite entries");
}

// Symmetry check scaled by max(1, max|a_ij|), so it reads as a relative
// tolerance for large matrices and an absolute one near zero.
inline bool is_symmetric(const Matrix& a, double tol = 1e-10) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void require_symmetric(const Matrix& a, const std::string& name, double tol = 1e-10) {
    require(a.rows() == a.cols(), name + " must be square");
    require(is_symmetric(a, tol), name + " must be symmetric");
}

struct CanonicalLabels {
    Labels labels; // values remapped to 0..groups-1 by first occurrence
    int groups = 0;
};

inline CanonicalLabels canonicalize_labels(const Labels& raw) {
    CanonicalLabels out;
    out.labels.reserve(raw.size());
    std::unordered_map<int, int> ids;
    for (int value : raw) {
        auto [it, inserted] = ids.try_emplace(value, static_cast<int>(ids.size()));
        out.labels.push_back(it->second);
    }
    out.groups = static_cast<int>(ids.size());
    return out;
}

} // namespace gfsc
