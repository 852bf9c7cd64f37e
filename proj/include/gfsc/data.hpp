#pragma once

#include <Eigen/Dense>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gfsc/errors.hpp"
#include "gfsc/matrix.hpp"
#include "gfsc/numerics.hpp"

namespace gfsc {

namespace detail {

// Decimal form with enough digits to round-trip a double exactly.
inline std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    if (token.empty()) return false;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

inline void put_u64le(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

inline bool get_u64le(std::istream& in, std::uint64_t& v) {
    char bytes[8];
    if (!in.read(bytes, 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    return true;
}

} // namespace detail

struct LabeledDataset {
    Matrix features; // n x m, samples as rows
    std::optional<Labels> labels; // canonical 0..groups-1 when present
    std::string name;

    int groups() const {
        if (!labels) return 0;
        int top = -1;
        for (int v : *labels) top = std::max(top, v);
        return top + 1;
    }
};

// Comma-separated numeric matrix, no header. Rows must be equal length; blank
// lines are skipped; an optional final integer column carries labels.
// Positions in error messages are 1-based.
inline LabeledDataset load_csv(const std::string& path, bool has_labels_column = false) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> raw_labels;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;

        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const std::size_t comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (width == 0) {
            width = fields.size();
            if (has_labels_column && width < 2)
                throw ParseError(path + ": labeled rows need at least 2 columns");
        } else if (fields.size() != width) {
            throw ParseError(path + ": row " + std::to_string(lineno) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(width));
        }

        std::vector<double> row;
        row.reserve(width);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double value;
            if (!detail::parse_double(fields[c], value))
                throw ParseError(path + ": row " + std::to_string(lineno) + ", column " +
                                 std::to_string(c + 1) + ": cannot parse '" +
                                 std::string(fields[c]) + "' as a number");
            if (!std::isfinite(value))
                throw ParseError(path + ": row " + std::to_string(lineno) + ", column " +
                                 std::to_string(c + 1) + ": non-finite value");
            row.push_back(value);
        }
        if (has_labels_column) {
            const double raw = row.back();
            row.pop_back();
            if (raw != std::nearbyint(raw) || std::abs(raw) > 2147483647.0)
                throw ParseError(path + ": row " + std::to_string(lineno) +
                                 ": label must be an integer");
            raw_labels.push_back(static_cast<int>(raw));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    LabeledDataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (has_labels_column) out.labels = canonicalize_labels(raw_labels).labels;
    out.name = std::filesystem::path(path).stem().string();
    return out;
}

// Writes values with enough digits to round-trip exactly.
inline void save_csv(const Matrix& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j > 0) out << ',';
            out << detail::fmt(x(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

// One integer label per line.
inline Labels load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    Labels labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string_view token = detail::trim(line);
        if (token.empty()) continue;
        double value;
        if (!detail::parse_double(token, value) || value != std::nearbyint(value) ||
            std::abs(value) > 2147483647.0)
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": cannot parse '" + std::string(token) + "' as an integer label");
        labels.push_back(static_cast<int>(value));
    }
    if (labels.empty()) throw ParseError(path + ": no labels");
    return labels;
}

inline void save_labels(const Labels& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (int v : labels) out << v << '\n';
    if (!out) throw IoError("write failed for " + path);
}

inline constexpr char kSmclMagic[5] = {'S', 'M', 'C', 'L', '1'};

// Binary matrix format: 5-byte magic "SMCL1", then rows and cols as uint64
// little-endian, then rows*cols float64 little-endian in row-major order.
inline void write_smcl(const Matrix& x, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kSmclMagic, 5);
    detail::put_u64le(out, static_cast<std::uint64_t>(x.rows()));
    detail::put_u64le(out, static_cast<std::uint64_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            detail::put_u64le(out, std::bit_cast<std::uint64_t>(x(i, j)));
    if (!out) throw IoError("write failed for " + path);
}

inline Matrix read_smcl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[5];
    if (!in.read(magic, 5) || !std::equal(magic, magic + 5, kSmclMagic))
        throw ParseError(path + ": not a SMCL1 file (bad magic)");
    std::uint64_t rows = 0, cols = 0;
    if (!detail::get_u64le(in, rows) || !detail::get_u64le(in, cols))
        throw ParseError(path + ": truncated header");
    if (rows == 0 || cols == 0) throw ParseError(path + ": empty matrix");
    if (rows > (1ull << 32) || cols > (1ull << 32) || rows * cols > (1ull << 34))
        throw ParseError(path + ": header declares an implausibly large matrix");
    Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t i = 0; i < rows; ++i) {
        for (std::uint64_t j = 0; j < cols; ++j) {
            std::uint64_t bits;
            if (!detail::get_u64le(in, bits))
                throw ParseError(path + ": truncated payload at row " + std::to_string(i + 1));
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::bit_cast<double>(bits);
        }
    }
    return x;
}

inline bool has_smcl_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[5];
    return in.read(magic, 5) && std::equal(magic, magic + 5, kSmclMagic);
}

// Loads a feature matrix from either format, sniffing the binary magic.
inline Matrix load_features(const std::string& path) {
    if (has_smcl_magic(path)) return read_smcl(path);
    return load_csv(path, false).features;
}

struct SubspaceSpec {
    int ambient_dim = 30;        // m
    int subspace_dim = 3;        // d, must be < m
    int clusters = 3;            // g
    int samples_per_cluster = 50;
    double noise_sigma = 0.01;   // additive Gaussian noise scale, 0 disables
    std::uint64_t seed = 0;
    bool orthogonal_bases = false; // slice all bases from one orthonormal frame
};

// Union-of-subspaces generator. Each cluster gets an orthonormal basis (thin Q
// of a Gaussian matrix); samples are the basis times standard normal
// coefficients plus optional ambient noise. Rows come out grouped by cluster
// with labels 0..g-1. Draw order is fixed: all bases first, then samples.
inline LabeledDataset gen_subspaces(const SubspaceSpec& spec) {
    require(spec.ambient_dim >= 2, "gen_subspaces: ambient_dim must be >= 2");
    require(spec.subspace_dim >= 1 && spec.subspace_dim < spec.ambient_dim,
            "gen_subspaces: subspace_dim must be in [1, ambient_dim)");
    require(spec.clusters >= 1, "gen_subspaces: clusters must be >= 1");
    require(spec.samples_per_cluster >= 1, "gen_subspaces: samples_per_cluster must be >= 1");
    require(spec.noise_sigma >= 0.0, "gen_subspaces: noise_sigma must be >= 0");
    if (spec.orthogonal_bases)
        require(spec.clusters * spec.subspace_dim <= spec.ambient_dim,
                "gen_subspaces: orthogonal bases need clusters * subspace_dim <= ambient_dim");

    SeededRng rng(spec.seed);
    const int m = spec.ambient_dim;
    const int d = spec.subspace_dim;
    const int g = spec.clusters;

    std::vector<Matrix> bases;
    bases.reserve(static_cast<std::size_t>(g));
    if (spec.orthogonal_bases) {
        const Matrix gauss = rng.normal_matrix(m, g * d);
        Eigen::HouseholderQR<Matrix> qr(gauss);
        const Matrix q = qr.householderQ() * Matrix::Identity(m, g * d);
        for (int c = 0; c < g; ++c) bases.push_back(q.middleCols(c * d, d));
    } else {
        for (int c = 0; c < g; ++c) {
            const Matrix gauss = rng.normal_matrix(m, d);
            Eigen::HouseholderQR<Matrix> qr(gauss);
            bases.push_back(qr.householderQ() * Matrix::Identity(m, d));
        }
    }

    const int n = g * spec.samples_per_cluster;
    LabeledDataset out;
    out.features.resize(n, m);
    Labels labels(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (int c = 0; c < g; ++c) {
        for (int s = 0; s < spec.samples_per_cluster; ++s) {
            Vector coeff(d);
            for (int i = 0; i < d; ++i) coeff[i] = rng.normal();
            Vector sample = bases[static_cast<std::size_t>(c)] * coeff;
            if (spec.noise_sigma > 0.0)
                for (int i = 0; i < m; ++i) sample[i] += spec.noise_sigma * rng.normal();
            out.features.row(row) = sample.transpose();
            labels[static_cast<std::size_t>(row)] = c;
            ++row;
        }
    }
    out.labels = std::move(labels);
    out.name = "synthetic-subspaces";
    return out;
}

struct SmoothImageSpec {
    int classes = 4;
    int samples_per_class = 40;
    int height = 16;
    int width = 16;
    std::uint64_t seed = 0;
    double structure_scale = 0.2; // amplitude of the class's cosine mode
    double edge_scale = 0.5;      // height of the shared step edge
    double jitter_scale = 4.0;    // per-sample amplitude spread of the texture mode
    double edge_jitter = 0.01;    // per-sample variation of the step height
    double baseline = 0.5;        // constant offset keeping pixels positive
};

// Piecewise-smooth image classes: every image is a constant baseline plus a
// zero-mean vertical step shared by all classes, a class-specific
// low-frequency cosine mode, and a shared texture mode whose amplitude is
// drawn per sample, uniform in [-jitter_scale, jitter_scale]. All modes are
// orthogonal with equal energy, so class means sit pairwise equidistant and
// the per-sample texture stays orthogonal to every class difference. Rows are
// row-major flattened height*width images.
inline LabeledDataset gen_smooth_images(const SmoothImageSpec& spec) {
    require(spec.classes >= 2, "gen_smooth_images: classes must be >= 2");
    require(spec.samples_per_class >= 1, "gen_smooth_images: samples_per_class must be >= 1");
    require(spec.height >= 2 && spec.width >= 2,
            "gen_smooth_images: images must be at least 2x2");
    require(spec.classes + 1 <= (spec.height - 1) * (spec.width - 1),
            "gen_smooth_images: not enough distinct modes for this many classes");
    require(spec.structure_scale >= 0.0 && spec.edge_scale >= 0.0 &&
                spec.jitter_scale >= 0.0 && spec.edge_jitter >= 0.0,
            "gen_smooth_images: scales must be >= 0");

    SeededRng rng(spec.seed);
    const int h = spec.height;
    const int w = spec.width;
    const int g = spec.classes;
    const int m = h * w;

    auto mode = [&](int y, int x, int fy, int fx) {
        return std::cos(std::numbers::pi * fy * (y + 0.5) / h) *
               std::cos(std::numbers::pi * fx * (x + 0.5) / w);
    };

    // one distinct mode per class plus one shared texture mode, lowest total
    // frequency first
    std::vector<std::pair<int, int>> class_mode;
    for (int total = 2; static_cast<int>(class_mode.size()) < g + 1; ++total)
        for (int fy = 1; fy < total && static_cast<int>(class_mode.size()) < g + 1; ++fy)
            if (fy < h && total - fy < w) class_mode.emplace_back(fy, total - fy);
    const auto [ty, tx] = class_mode.back();

    const int edge_col = w / 2;
    const double edge_lift = static_cast<double>(w - edge_col) / w;

    LabeledDataset out;
    out.features.resize(g * spec.samples_per_class, m);
    Labels labels(static_cast<std::size_t>(g) * static_cast<std::size_t>(spec.samples_per_class));
    Eigen::Index row = 0;
    for (int c = 0; c < g; ++c) {
        const auto [fy, fx] = class_mode[static_cast<std::size_t>(c)];
        for (int s = 0; s < spec.samples_per_class; ++s) {
            const double texture = spec.jitter_scale * (2.0 * rng.uniform() - 1.0);
            const double step = spec.edge_scale + spec.edge_jitter * rng.normal();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double profile = (x >= edge_col ? 1.0 : 0.0) - edge_lift;
                    out.features(row, y * w + x) = spec.baseline +
                                                   spec.structure_scale * mode(y, x, fy, fx) +
                                                   texture * mode(y, x, ty, tx) + step * profile;
                }
            }
            labels[static_cast<std::size_t>(row)] = c;
            ++row;
        }
    }
    out.labels = std::move(labels);
    out.name = "synthetic-smooth-images";
    return out;
}

// Adds mean + sigma * N(0,1) to every entry, drawn row-major.
inline Matrix add_gaussian_noise(const Matrix& x, double mean, double sigma,
                                 std::uint64_t seed) {
    require(sigma >= 0.0, "add_gaussian_noise: sigma must be >= 0");
    SeededRng rng(seed);
    Matrix out = x;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) += mean + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
    return out;
}

// Reinterprets each row as a row-major height x width image.
inline std::vector<Matrix> as_images(const Matrix& x, int height, int width) {
    require(height >= 1 && width >= 1, "as_images: dimensions must be positive");
    require(static_cast<Eigen::Index>(height) * width == x.cols(),
            "as_images: height * width must equal the feature count");
    std::vector<Matrix> images;
    images.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        Matrix img(height, width);
        for (int y = 0; y < height; ++y)
            for (int xx = 0; xx < width; ++xx) img(y, xx) = x(r, y * width + xx);
        images.push_back(std::move(img));
    }
    return images;
}

// Per-feature zero mean, unit variance (population). Constant features are
// centered only.
inline Matrix standardized(const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double mean = out.col(j).mean();
        out.col(j).array() -= mean;
        const double var = out.col(j).squaredNorm() / static_cast<double>(out.rows());
        if (var > 0.0) out.col(j) /= std::sqrt(var);
    }
    return out;
}

} // namespace gfsc
