#pragma once

// PCA engine: principal axes/values of an embedding matrix and the global
// "efficient" reduced space built from the leading axes.
//
// Principal values are eigenvalues of the second-moment matrix D^T D / m
// (or of the covariance when centering is requested). When d <= m the d x d
// moment is accumulated in row chunks and decomposed; otherwise the m x m
// Gram matrix D D^T / m is decomposed and axes are recovered as D^T u.
// Accumulation is always in double precision.

#include "editioner/tensor_store.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace editioner::spectral {

/// Principal axes (one per row, unit length) ranked by descending value.
struct Spectrum {
    std::size_t dim = 0;
    std::size_t sample_count = 0;
    std::vector<double> axes;    // count() x dim, row-major
    std::vector<double> values;  // descending, >= 0
    double total_variance = 0.0;

    std::size_t count() const { return values.size(); }
    std::span<const double> axis(std::size_t i) const { return {axes.data() + i * dim, dim}; }
};

/// Streaming accumulator for the uncentered d x d second moment.
class SecondMomentAccumulator {
public:
    explicit SecondMomentAccumulator(std::size_t dim);

    /// rows.size() must be a multiple of dim.
    void add_rows(std::span<const float> rows);
    std::size_t count() const { return count_; }
    std::size_t dim() const { return dim_; }

    /// Decomposes D^T D / m. Requires count() >= 2.
    Spectrum spectrum() const;

private:
    std::size_t dim_;
    std::size_t count_ = 0;
    std::vector<double> upper_;  // dim x dim, upper triangle filled
};

/// min(m, d) axes and values. Deterministic: each axis has its largest-magnitude
/// entry positive; equal values keep the decomposition's order.
Spectrum compute_spectrum(const EmbeddingMatrix& data, bool center = false);

/// Uncentered spectrum of an NPY file. Streams chunks when d <= m.
Spectrum compute_spectrum(store::NpyReader& reader, std::size_t chunk_rows);

/// Cumulative explained-variance ratio after each component, relative to total_variance.
std::vector<double> cumulative_ratios(std::span<const double> values, double total);

struct ReducedSpace {
    std::vector<float> basis;  // reduced_dim x ambient_dim, orthonormal rows
    std::size_t ambient_dim = 0;
    std::size_t reduced_dim = 0;
    double captured_variance_ratio = 0.0;
    std::vector<double> values;  // leading principal values kept
    double total_variance = 0.0;

    std::span<const float> row(std::size_t i) const { return {basis.data() + i * ambient_dim, ambient_dim}; }

    /// Throws IntegrityError when rows deviate from orthonormal by more than tol.
    void validate(double tol = 1e-5) const;
};

/// Leading target_dim axes of the uncentered spectrum. Requires 1 <= target_dim < min(m, d).
ReducedSpace build_reducer(const EmbeddingMatrix& data, std::size_t target_dim);
ReducedSpace build_reducer(store::NpyReader& reader, std::size_t target_dim, std::size_t chunk_rows);
ReducedSpace reducer_from_spectrum(const Spectrum& spectrum, std::size_t target_dim);

EmbeddingVector reduce(const EmbeddingVector& input, const ReducedSpace& space);
EmbeddingMatrix reduce(const EmbeddingMatrix& input, const ReducedSpace& space);
EmbeddingVector lift(const EmbeddingVector& coords, const ReducedSpace& space);
EmbeddingMatrix lift(const EmbeddingMatrix& coords, const ReducedSpace& space);

}  // namespace editioner::spectral
