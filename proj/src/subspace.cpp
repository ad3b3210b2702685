#include "editioner/subspace.hpp"

#include "editioner/errors.hpp"
#include "editioner/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace editioner::subspace {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

enum class RowStatus : std::uint8_t { ok, orthogonal, zero };

// P x for an orthonormal k x n frame, written into out (length n).
void apply_projector(std::span<const double> frame, std::size_t k, std::size_t n, std::span<const double> x,
                     std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::span<const double> row(frame.data() + i * n, n);
        const double c = dot(row, x);
        for (std::size_t j = 0; j < n; ++j) out[j] += c * row[j];
    }
}

struct RawProjection {
    RowStatus status = RowStatus::ok;
    double eta = 1.0;
    double ratio = 1.0;
};

RawProjection project_into(const ConceptSubspace& s, ProjectionMode mode, std::span<const double> x,
                           std::span<double> out) {
    const double xn = norm(x);
    if (!(xn > 0.0)) return {RowStatus::zero, 0.0, 0.0};
    apply_projector(s.frame(), s.k(), s.working_dim(), x, out);
    const double pn = norm(out);
    if (pn < kOrthogonalInputRatio * xn) return {RowStatus::orthogonal, 0.0, pn / xn};
    const double eta = xn / pn;
    if (mode == ProjectionMode::compensated) {
        for (double& v : out) v *= eta;
    }
    return {RowStatus::ok, eta, pn / xn};
}

void require_dim(const EmbeddingVector& v, const ConceptSubspace& s, const char* what) {
    if (v.dim() != s.working_dim()) {
        throw DimError(std::string(what) + " has dimension " + std::to_string(v.dim()) + ", subspace works in " +
                       std::to_string(s.working_dim()));
    }
}

}  // namespace

std::size_t select_k(std::span<const double> values, double threshold, std::optional<double> total) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ConfigError("explained-variance threshold must be in (0, 1], got " + std::to_string(threshold));
    }
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("principal values must be finite and nonnegative");
        sum += v;
    }
    const double denom = total.value_or(sum);
    if (!(denom > 0.0)) throw DataError("explained variance is undefined when every principal value is zero");

    double cum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        cum += values[k];
        if (cum / denom >= threshold) return k + 1;
    }
    throw DataError("retained principal values never reach the threshold of the total variance");
}

ConceptSubspace::ConceptSubspace(std::vector<float> basis, std::size_t working_dim, std::vector<double> values,
                                 double total_variance, double evr_threshold, prompts::ConceptSpec concept_spec,
                                 std::size_t sample_count, Provenance provenance)
    : basis_(std::move(basis)),
      k_(working_dim == 0 ? 0 : basis_.size() / working_dim),
      working_dim_(working_dim),
      values_(std::move(values)),
      total_variance_(total_variance),
      evr_threshold_(evr_threshold),
      concept_(std::move(concept_spec)),
      sample_count_(sample_count),
      provenance_(std::move(provenance)) {
    if (working_dim_ == 0 || basis_.size() != k_ * working_dim_) {
        throw IntegrityError("subspace basis is not a whole number of rows");
    }
    if (k_ < 1 || k_ >= working_dim_) {
        throw IntegrityError("subspace rank " + std::to_string(k_) + " must be in [1, " +
                             std::to_string(working_dim_) + ")");
    }
    if (values_.size() != k_) throw IntegrityError("subspace carries " + std::to_string(values_.size()) +
                                                   " principal values for rank " + std::to_string(k_));
    for (float v : basis_) {
        if (!std::isfinite(v)) throw IntegrityError("subspace basis has a non-finite entry");
    }

    std::vector<double> g(k_ * k_);
    kernels::serial::gram<float>(basis_, k_, working_dim_, g);
    for (std::size_t i = 0; i < k_; ++i) {
        for (std::size_t j = 0; j < k_; ++j) {
            const double dev = std::abs(g[i * k_ + j] - (i == j ? 1.0 : 0.0));
            if (dev > kOrthonormalTolerance) {
                throw IntegrityError("subspace basis is not orthonormal: entry (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") of B B^T deviates by " + std::to_string(dev));
            }
        }
    }

    std::size_t expected_k = 0;
    try {
        expected_k = select_k(values_, evr_threshold_, total_variance_);
    } catch (const Error& e) {
        throw IntegrityError(std::string("subspace spectrum is inconsistent: ") + e.what());
    }
    if (expected_k != k_) {
        throw IntegrityError("rank " + std::to_string(k_) + " does not match threshold " +
                             std::to_string(evr_threshold_) + " (expected " + std::to_string(expected_k) + ")");
    }

    // Two-pass modified Gram-Schmidt in double.
    frame_.assign(basis_.begin(), basis_.end());
    for (std::size_t i = 0; i < k_; ++i) {
        std::span<double> row(frame_.data() + i * working_dim_, working_dim_);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < i; ++p) {
                const std::span<const double> prev(frame_.data() + p * working_dim_, working_dim_);
                const double c = dot(prev, row);
                for (std::size_t j = 0; j < working_dim_; ++j) row[j] -= c * prev[j];
            }
        }
        const double n = norm(row);
        for (double& v : row) v /= n;
    }
}

double ConceptSubspace::explained_ratio() const {
    double cum = 0.0;
    for (double v : values_) cum += v;
    return cum / total_variance_;
}

ConceptSubspace build_subspace(const EmbeddingMatrix& data, const prompts::ConceptSpec& concept_spec, double threshold,
                               ConceptSubspace::Provenance provenance) {
    const auto spectrum = spectral::compute_spectrum(data, false);
    const std::size_t k = select_k(spectrum.values, threshold, spectrum.total_variance);
    if (k >= data.cols) {
        throw DegenerateError("threshold " + std::to_string(threshold) + " keeps all " + std::to_string(k) +
                              " dimensions; the subspace would not restrict anything");
    }
    std::vector<float> basis(k * spectrum.dim);
    std::transform(spectrum.axes.begin(), spectrum.axes.begin() + static_cast<std::ptrdiff_t>(k * spectrum.dim),
                   basis.begin(), [](double v) { return static_cast<float>(v); });
    std::vector<double> values(spectrum.values.begin(), spectrum.values.begin() + static_cast<std::ptrdiff_t>(k));
    return ConceptSubspace(std::move(basis), spectrum.dim, std::move(values), spectrum.total_variance, threshold,
                           concept_spec, data.rows, std::move(provenance));
}

std::string_view to_string(ProjectionMode mode) {
    return mode == ProjectionMode::compensated ? "compensated" : "naive";
}

ProjectionMode parse_projection_mode(std::string_view name) {
    if (name == "compensated") return ProjectionMode::compensated;
    if (name == "naive") return ProjectionMode::naive;
    throw ConfigError("projection mode must be 'compensated' or 'naive', got '" + std::string(name) + "'");
}

ProjectionResult project(const EmbeddingVector& input, const ConceptSubspace& subspace, ProjectionMode mode) {
    require_dim(input, subspace, "input");
    input.validate();
    ProjectionResult result;
    result.vector = EmbeddingVector(subspace.working_dim());
    const auto raw = project_into(subspace, mode, input.values, result.vector.values);
    if (raw.status == RowStatus::zero) throw DataError("cannot project a zero vector");
    if (raw.status == RowStatus::orthogonal) {
        throw OrthogonalInputError("input is orthogonal to the subspace (|Px|/|x| = " + std::to_string(raw.ratio) + ")");
    }
    result.eta = raw.eta;
    result.raw_norm_ratio = raw.ratio;
    return result;
}

BatchProjection project_batch(const EmbeddingMatrix& input, const ConceptSubspace& subspace, ProjectionMode mode,
                              OrthogonalRows policy) {
    if (input.cols != subspace.working_dim()) {
        throw DimError("matrix has " + std::to_string(input.cols) + " columns, subspace works in " +
                       std::to_string(subspace.working_dim()));
    }
    input.validate();
    const std::size_t m = input.rows, n = input.cols;
    std::vector<double> projected(m * n);
    std::vector<RawProjection> raw(m);

    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel
    {
        std::vector<double> x(n);
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < rows; ++r) {
            const auto src = input.row(static_cast<std::size_t>(r));
            std::copy(src.begin(), src.end(), x.begin());
            raw[r] = project_into(subspace, mode, x, std::span<double>(projected.data() + r * n, n));
        }
    }

    BatchProjection out;
    std::size_t kept = 0;
    for (std::size_t r = 0; r < m; ++r) {
        if (raw[r].status == RowStatus::zero) throw DataError("cannot project a zero row", r);
        if (raw[r].status == RowStatus::orthogonal) out.orthogonal_rows.push_back(r);
        if (raw[r].status == RowStatus::ok || policy == OrthogonalRows::zero) ++kept;
    }
    if (kept == 0) throw OrthogonalInputError("every row is orthogonal to the subspace");

    out.output = EmbeddingMatrix(kept, n);
    out.output.source_hash = input.source_hash;
    std::size_t at = 0;
    for (std::size_t r = 0; r < m; ++r) {
        const bool ok = raw[r].status == RowStatus::ok;
        if (!ok && policy == OrthogonalRows::exclude) continue;
        auto dst = out.output.row(at++);
        for (std::size_t j = 0; j < n; ++j) dst[j] = ok ? static_cast<float>(projected[r * n + j]) : 0.0f;
        out.row_index.push_back(r);
        out.eta.push_back(raw[r].eta);
        out.raw_norm_ratio.push_back(raw[r].ratio);
    }
    return out;
}

std::vector<EmbeddingVector> interpolate(const EmbeddingVector& a, const EmbeddingVector& b,
                                         const ConceptSubspace& subspace, std::size_t steps) {
    if (steps < 2) throw ConfigError("interpolation needs at least 2 steps");
    require_dim(a, subspace, "start vector");
    require_dim(b, subspace, "end vector");
    const auto pa = project(a, subspace).vector;
    const auto pb = project(b, subspace).vector;

    std::vector<EmbeddingVector> out;
    out.reserve(steps);
    out.push_back(pa);
    for (std::size_t s = 1; s + 1 < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        EmbeddingVector v(subspace.working_dim());
        for (std::size_t j = 0; j < v.dim(); ++j) v.values[j] = (1.0 - t) * pa.values[j] + t * pb.values[j];
        out.push_back(std::move(v));
    }
    out.push_back(pb);
    return out;
}

std::vector<EmbeddingVector> traverse(const EmbeddingVector& input, const ConceptSubspace& subspace,
                                      std::size_t component, std::span<const double> offsets, OffsetUnits units) {
    if (component >= subspace.k()) {
        throw ConfigError("component " + std::to_string(component) + " is out of range for rank " +
                          std::to_string(subspace.k()));
    }
    const auto base = project(input, subspace).vector;
    const auto axis = subspace.frame_row(component);
    const double unit = units == OffsetUnits::stddev ? std::sqrt(subspace.values()[component]) : 1.0;

    std::vector<EmbeddingVector> out;
    out.reserve(offsets.size());
    for (double offset : offsets) {
        if (!std::isfinite(offset)) throw ConfigError("traversal offsets must be finite");
        EmbeddingVector v = base;
        const double step = offset * unit;
        for (std::size_t j = 0; j < v.dim(); ++j) v.values[j] += step * axis[j];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace editioner::subspace
