#pragma once

#include "gfsc/gfsc.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

inline gfsc::Matrix random_symmetric(gfsc::SeededRng& rng, int n) {
    const gfsc::Matrix g = rng.normal_matrix(n, n);
    return 0.5 * (g + g.transpose());
}

// Dense random affinity: symmetric, nonnegative, zero diagonal.
inline gfsc::Matrix random_affinity(gfsc::SeededRng& rng, int n) {
    gfsc::Matrix w = random_symmetric(rng, n).cwiseAbs();
    w.diagonal().setZero();
    return w;
}

class TempDir {
public:
    TempDir() {
        const auto base = std::filesystem::temp_directory_path();
        while (true) {
            auto candidate = base / ("gfsc-test-" + std::to_string(::getpid()) + "-" +
                                     std::to_string(counter_++));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Drops time.* lines, the only nondeterministic part of a report.
inline std::string strip_time_lines(const std::string& report) {
    std::istringstream in(report);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("time.", 0) == 0) continue;
        out << line << '\n';
    }
    return out.str();
}

} // namespace testutil
