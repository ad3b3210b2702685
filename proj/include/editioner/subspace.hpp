#pragma once

// Concept subspaces ("editions"): a truncated uncentered PCA basis of a
// concept dataset, and the magnitude-compensated projection onto it.
//
// Basis rows are stored as float32, exactly as persisted. Projection works
// in double against an orthonormalized copy of those rows, so that the
// projector is idempotent to double precision regardless of the rounding
// the stored rows went through.

#include "editioner/prompt_forge.hpp"
#include "editioner/spectral.hpp"
#include "editioner/tensor_store.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace editioner::subspace {

inline constexpr double kDefaultThreshold = 0.95;
inline constexpr double kOrthonormalTolerance = 1e-5;
// |P x| below this fraction of |x| means the input has no usable component in the subspace.
inline constexpr double kOrthogonalInputRatio = 1e-10;

/// Smallest k whose leading values reach `threshold` of the total. The
/// total defaults to the sum of `values`.
std::size_t select_k(std::span<const double> values, double threshold, std::optional<double> total = std::nullopt);

class ConceptSubspace {
public:
    struct Provenance {
        std::optional<std::size_t> ambient_dim;  // set when the working space is a reduced space
        std::string reducer_digest;
        std::vector<store::SourceRef> sources;
    };

    /// Validates every invariant: k rows of length working_dim, 1 <= k < working_dim,
    /// rows orthonormal within kOrthonormalTolerance, k consistent with the threshold.
    ConceptSubspace(std::vector<float> basis, std::size_t working_dim, std::vector<double> values,
                    double total_variance, double evr_threshold, prompts::ConceptSpec concept_spec,
                    std::size_t sample_count, Provenance provenance = {});

    std::size_t k() const { return k_; }
    std::size_t working_dim() const { return working_dim_; }
    std::span<const float> basis() const { return basis_; }
    std::span<const float> basis_row(std::size_t i) const { return {basis_.data() + i * working_dim_, working_dim_}; }
    std::span<const double> values() const { return values_; }
    double total_variance() const { return total_variance_; }
    double evr_threshold() const { return evr_threshold_; }
    double explained_ratio() const;
    const prompts::ConceptSpec& concept_spec() const { return concept_; }
    std::size_t sample_count() const { return sample_count_; }
    const Provenance& provenance() const { return provenance_; }

    /// Orthonormal working frame (k x working_dim, double) used by projections.
    std::span<const double> frame() const { return frame_; }
    std::span<const double> frame_row(std::size_t i) const { return {frame_.data() + i * working_dim_, working_dim_}; }

private:
    std::vector<float> basis_;
    std::size_t k_;
    std::size_t working_dim_;
    std::vector<double> values_;
    double total_variance_;
    double evr_threshold_;
    prompts::ConceptSpec concept_;
    std::size_t sample_count_;
    Provenance provenance_;
    std::vector<double> frame_;
};

/// Uncentered PCA of `data`, truncated at the explained-variance threshold.
/// Throws DegenerateError when no reduction results (k == working dim).
ConceptSubspace build_subspace(const EmbeddingMatrix& data, const prompts::ConceptSpec& concept_spec,
                               double threshold = kDefaultThreshold, ConceptSubspace::Provenance provenance = {});

enum class ProjectionMode { compensated, naive };

std::string_view to_string(ProjectionMode mode);
ProjectionMode parse_projection_mode(std::string_view name);

struct ProjectionResult {
    EmbeddingVector vector;
    double eta = 1.0;             // |x| / |P x|, applied only in compensated mode
    double raw_norm_ratio = 1.0;  // |P x| / |x|
};

ProjectionResult project(const EmbeddingVector& input, const ConceptSubspace& subspace,
                         ProjectionMode mode = ProjectionMode::compensated);

enum class OrthogonalRows { exclude, zero };

struct BatchProjection {
    EmbeddingMatrix output;              // excluded rows are absent when OrthogonalRows::exclude
    std::vector<std::size_t> row_index;  // input row of each output row
    std::vector<double> eta;             // per output row
    std::vector<double> raw_norm_ratio;  // per output row
    std::vector<std::size_t> orthogonal_rows;
};

/// Row-wise project(); rows are processed in parallel and emitted in input order.
BatchProjection project_batch(const EmbeddingMatrix& input, const ConceptSubspace& subspace, ProjectionMode mode,
                              OrthogonalRows policy = OrthogonalRows::exclude);

/// Linear interpolation between the compensated projections of a and b;
/// `steps` points including both endpoints.
std::vector<EmbeddingVector> interpolate(const EmbeddingVector& a, const EmbeddingVector& b,
                                         const ConceptSubspace& subspace, std::size_t steps);

enum class OffsetUnits { embedding, stddev };

/// Compensated projection of `input` moved along principal axis
/// `component` by each offset. Offsets in stddev units are scaled by
/// sqrt(value[component]).
std::vector<EmbeddingVector> traverse(const EmbeddingVector& input, const ConceptSubspace& subspace,
                                      std::size_t component, std::span<const double> offsets,
                                      OffsetUnits units = OffsetUnits::embedding);

}  // namespace editioner::subspace
