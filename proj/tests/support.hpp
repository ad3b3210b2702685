#pragma once

// Shared helpers for the test binaries: scratch directories, seeded random
// data, and small dense linear algebra that stays independent of the library.

#include "editioner/tensor_store.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = fs::temp_directory_path() /
                ("editioner-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

/// k x n matrix with orthonormal rows (two-pass Gram-Schmidt of Gaussian rows).
inline std::vector<double> random_frame(std::mt19937_64& rng, std::size_t k, std::size_t n) {
    std::vector<double> f = gaussian(rng, k * n);
    for (std::size_t i = 0; i < k; ++i) {
        double* row = f.data() + i * n;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < i; ++p) {
                const double* prev = f.data() + p * n;
                double c = 0;
                for (std::size_t j = 0; j < n; ++j) c += prev[j] * row[j];
                for (std::size_t j = 0; j < n; ++j) row[j] -= c * prev[j];
            }
        }
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * row[j];
        s = std::sqrt(s);
        for (std::size_t j = 0; j < n; ++j) row[j] /= s;
    }
    return f;
}

inline editioner::EmbeddingMatrix to_matrix(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
    editioner::EmbeddingMatrix m(rows, cols);
    for (std::size_t i = 0; i < values.size(); ++i) m.data[i] = static_cast<float>(values[i]);
    return m;
}

inline std::vector<double> to_double(const editioner::EmbeddingMatrix& m) {
    return std::vector<double>(m.data.begin(), m.data.end());
}

/// rows x n points c * frame with Gaussian coefficients c (k per row).
inline std::vector<double> points_in_frame(std::mt19937_64& rng, const std::vector<double>& frame, std::size_t k,
                                           std::size_t n, std::size_t rows, const std::vector<double>& scales) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> out(rows * n, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            const double c = g(rng) * scales[i];
            for (std::size_t j = 0; j < n; ++j) out[r * n + j] += c * frame[i * n + j];
        }
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// Dense projector F^T F applied to x, with F given as k x n rows (orthonormal).
inline std::vector<double> dense_projection(const std::vector<double>& frame, std::size_t k, std::size_t n,
                                            const std::vector<double>& x) {
    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) p[a * n + b] += frame[i * n + a] * frame[i * n + b];
    std::vector<double> out(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) out[a] += p[a * n + b] * x[b];
    return out;
}

inline std::vector<double> to_vector(std::span<const float> row) { return std::vector<double>(row.begin(), row.end()); }

}  // namespace testing_support
