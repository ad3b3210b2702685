#include "editioner/spectral.hpp"

#include "editioner/errors.hpp"
#include "editioner/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace editioner::spectral {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Values below -kNegativeTolerance * scale mean the moment matrix was not PSD.
constexpr double kNegativeTolerance = 1e-10;

struct Eigenpairs {
    std::vector<double> values;  // descending
    RowMatrix vectors;           // one eigenvector per row, same order
};

Eigenpairs decompose(const RowMatrix& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw DataError("eigendecomposition did not converge");
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    const auto n = static_cast<std::size_t>(evals.size());

    // Descending by value; stable so equal values keep column order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return evals(static_cast<Eigen::Index>(a)) > evals(static_cast<Eigen::Index>(b));
    });

    const double scale = std::max(1.0, std::abs(evals.maxCoeff()));
    Eigenpairs out{std::vector<double>(n), RowMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = static_cast<Eigen::Index>(order[i]);
        double v = evals(col);
        if (v < 0.0) {
            if (v < -kNegativeTolerance * scale) {
                throw DataError("second-moment matrix has a negative principal value " + std::to_string(v));
            }
            v = 0.0;
        }
        out.values[i] = v;
        out.vectors.row(static_cast<Eigen::Index>(i)) = evecs.col(col).transpose();
    }
    return out;
}

void fix_signs(Spectrum& s) {
    for (std::size_t i = 0; i < s.count(); ++i) {
        double* a = s.axes.data() + i * s.dim;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < s.dim; ++j) {
            if (std::abs(a[j]) > std::abs(a[arg])) arg = j;
        }
        if (a[arg] < 0.0) {
            for (std::size_t j = 0; j < s.dim; ++j) a[j] = -a[j];
        }
    }
}

void finish_totals(Spectrum& s) {
    s.total_variance = 0.0;
    for (double v : s.values) s.total_variance += v;
}

RowMatrix symmetric_from_upper(std::span<const double> upper, std::size_t dim, double scale) {
    RowMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            const double v = upper[i * dim + j] * scale;
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return m;
}

Spectrum spectrum_from_moment(std::span<const double> upper, std::size_t dim, std::size_t count) {
    const auto pairs = decompose(symmetric_from_upper(upper, dim, 1.0 / static_cast<double>(count)));
    Spectrum s;
    s.dim = dim;
    s.sample_count = count;
    s.values = pairs.values;
    s.axes.assign(pairs.vectors.data(), pairs.vectors.data() + dim * dim);
    fix_signs(s);
    finish_totals(s);
    return s;
}

// d > m: decompose the m x m Gram matrix and map eigenvectors back through D^T.
template <typename T>
Spectrum spectrum_from_gram(std::span<const T> rows, std::size_t m, std::size_t d) {
    std::vector<double> g(m * m);
    kernels::gram<T>(rows, m, d, g);
    RowMatrix gm(m, m);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m * m; ++i) gm.data()[i] = g[i] * inv_m;
    const auto pairs = decompose(gm);

    Spectrum s;
    s.dim = d;
    s.sample_count = m;
    s.values = pairs.values;
    s.axes.assign(m * d, 0.0);

    const double rank_tol = static_cast<double>(std::max(m, d)) * std::numeric_limits<double>::epsilon() *
                            std::max(pairs.values.empty() ? 0.0 : pairs.values.front(), 0.0);
    std::size_t accepted = 0;
    for (; accepted < m; ++accepted) {
        if (pairs.values[accepted] <= rank_tol) break;
        double* axis = s.axes.data() + accepted * d;
        for (std::size_t r = 0; r < m; ++r) {
            const double u = pairs.vectors(static_cast<Eigen::Index>(accepted), static_cast<Eigen::Index>(r));
            const T* xr = rows.data() + r * d;
            for (std::size_t c = 0; c < d; ++c) axis[c] += u * static_cast<double>(xr[c]);
        }
        double raw = 0.0;
        for (std::size_t c = 0; c < d; ++c) raw += axis[c] * axis[c];
        raw = std::sqrt(raw);
        // Small values lose orthogonality through D^T u; re-orthogonalize against earlier axes.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < accepted; ++p) {
                const double* ap = s.axes.data() + p * d;
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += ap[c] * axis[c];
                for (std::size_t c = 0; c < d; ++c) axis[c] -= dot * ap[c];
            }
        }
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) norm += axis[c] * axis[c];
        norm = std::sqrt(norm);
        if (!(norm > 1e-3 * raw)) {
            std::fill(axis, axis + d, 0.0);
            break;
        }
        for (std::size_t c = 0; c < d; ++c) axis[c] /= norm;
    }

    // Null directions of the data: complete the frame from coordinate vectors.
    std::vector<double> cand(d);
    std::size_t next_unit = 0;
    for (std::size_t i = accepted; i < m; ++i) {
        s.values[i] = 0.0;
        for (;; ++next_unit) {
            if (next_unit >= d) throw DataError("could not complete an orthonormal frame");
            std::fill(cand.begin(), cand.end(), 0.0);
            cand[next_unit] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < i; ++p) {
                    const double* ap = s.axes.data() + p * d;
                    double dot = 0.0;
                    for (std::size_t c = 0; c < d; ++c) dot += ap[c] * cand[c];
                    for (std::size_t c = 0; c < d; ++c) cand[c] -= dot * ap[c];
                }
            }
            double norm = 0.0;
            for (double v : cand) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 1e-3) {
                double* axis = s.axes.data() + i * d;
                for (std::size_t c = 0; c < d; ++c) axis[c] = cand[c] / norm;
                ++next_unit;
                break;
            }
        }
    }
    fix_signs(s);
    finish_totals(s);
    return s;
}

}  // namespace

SecondMomentAccumulator::SecondMomentAccumulator(std::size_t dim) : dim_(dim), upper_(dim * dim, 0.0) {
    if (dim == 0) throw DataError("second moment of zero-dimensional data");
}

void SecondMomentAccumulator::add_rows(std::span<const float> rows) {
    if (rows.size() % dim_ != 0) throw DimError("row data is not a multiple of the dimension");
    const std::size_t n = rows.size() / dim_;
    kernels::accumulate_second_moment<float>(rows, n, dim_, upper_);
    count_ += n;
}

Spectrum SecondMomentAccumulator::spectrum() const {
    if (count_ < 2) throw DataError("PCA needs at least two samples, got " + std::to_string(count_));
    return spectrum_from_moment(upper_, dim_, count_);
}

Spectrum compute_spectrum(const EmbeddingMatrix& data, bool center) {
    data.validate();
    const std::size_t m = data.rows, d = data.cols;
    if (m < 2) throw DataError("PCA needs at least two samples, got " + std::to_string(m));

    if (!center) {
        if (d <= m) {
            SecondMomentAccumulator acc(d);
            acc.add_rows(data.data);
            return acc.spectrum();
        }
        return spectrum_from_gram<float>(data.data, m, d);
    }

    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += data.data[r * d + c];
    }
    for (double& v : mean) v /= static_cast<double>(m);
    std::vector<double> centered(m * d);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < d; ++c) centered[r * d + c] = data.data[r * d + c] - mean[c];
    }
    if (d <= m) {
        std::vector<double> upper(d * d, 0.0);
        kernels::accumulate_second_moment<double>(centered, m, d, upper);
        return spectrum_from_moment(upper, d, m);
    }
    return spectrum_from_gram<double>(centered, m, d);
}

Spectrum compute_spectrum(store::NpyReader& reader, std::size_t chunk_rows) {
    const std::size_t m = reader.rows(), d = reader.cols();
    if (m < 2) throw DataError("PCA needs at least two samples, got " + std::to_string(m));
    if (d > m) {
        EmbeddingMatrix all(m, d);
        std::size_t at = 0;
        while (at < m) at += reader.read_rows(std::span<float>(all.data).subspan(at * d), m - at);
        return spectrum_from_gram<float>(all.data, m, d);
    }
    chunk_rows = std::max<std::size_t>(chunk_rows, 1);
    SecondMomentAccumulator acc(d);
    std::vector<float> buf(chunk_rows * d);
    for (std::size_t n; (n = reader.read_rows(buf, chunk_rows)) > 0;) {
        acc.add_rows(std::span<const float>(buf).first(n * d));
    }
    return acc.spectrum();
}

std::vector<double> cumulative_ratios(std::span<const double> values, double total) {
    if (!(total > 0.0)) throw DataError("explained variance is undefined when every principal value is zero");
    std::vector<double> out(values.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        cum += values[i];
        out[i] = cum / total;
    }
    return out;
}

void ReducedSpace::validate(double tol) const {
    if (reduced_dim == 0 || reduced_dim >= ambient_dim) {
        throw IntegrityError("reducer must map to a strictly smaller nonzero dimension");
    }
    if (basis.size() != reduced_dim * ambient_dim) throw IntegrityError("reducer basis does not match its shape");
    std::vector<double> g(reduced_dim * reduced_dim);
    kernels::gram<float>(basis, reduced_dim, ambient_dim, g);
    for (std::size_t i = 0; i < reduced_dim; ++i) {
        for (std::size_t j = 0; j < reduced_dim; ++j) {
            const double dev = std::abs(g[i * reduced_dim + j] - (i == j ? 1.0 : 0.0));
            if (dev > tol) {
                throw IntegrityError("reducer basis is not orthonormal: entry (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") of B B^T deviates by " + std::to_string(dev));
            }
        }
    }
}

ReducedSpace reducer_from_spectrum(const Spectrum& spectrum, std::size_t target_dim) {
    const std::size_t limit = std::min(spectrum.sample_count, spectrum.dim);
    if (target_dim < 1 || target_dim >= limit) {
        throw ConfigError("target dimension must be in [1, " + std::to_string(limit) + "), got " +
                          std::to_string(target_dim));
    }
    ReducedSpace space;
    space.ambient_dim = spectrum.dim;
    space.reduced_dim = target_dim;
    space.basis.assign(spectrum.axes.begin(), spectrum.axes.begin() + static_cast<std::ptrdiff_t>(target_dim * spectrum.dim));
    space.values.assign(spectrum.values.begin(), spectrum.values.begin() + static_cast<std::ptrdiff_t>(target_dim));
    space.total_variance = spectrum.total_variance;
    space.captured_variance_ratio = cumulative_ratios(space.values, spectrum.total_variance).back();
    return space;
}

ReducedSpace build_reducer(const EmbeddingMatrix& data, std::size_t target_dim) {
    const std::size_t limit = std::min(data.rows, data.cols);
    if (target_dim < 1 || target_dim >= limit) {
        throw ConfigError("target dimension must be in [1, " + std::to_string(limit) + "), got " +
                          std::to_string(target_dim));
    }
    return reducer_from_spectrum(compute_spectrum(data, false), target_dim);
}

ReducedSpace build_reducer(store::NpyReader& reader, std::size_t target_dim, std::size_t chunk_rows) {
    const std::size_t limit = std::min(reader.rows(), reader.cols());
    if (target_dim < 1 || target_dim >= limit) {
        throw ConfigError("target dimension must be in [1, " + std::to_string(limit) + "), got " +
                          std::to_string(target_dim));
    }
    return reducer_from_spectrum(compute_spectrum(reader, chunk_rows), target_dim);
}

EmbeddingVector reduce(const EmbeddingVector& input, const ReducedSpace& space) {
    if (input.dim() != space.ambient_dim) {
        throw DimError("vector has dimension " + std::to_string(input.dim()) + ", reducer expects " +
                       std::to_string(space.ambient_dim));
    }
    EmbeddingVector out(space.reduced_dim);
    for (std::size_t i = 0; i < space.reduced_dim; ++i) {
        const auto b = space.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < space.ambient_dim; ++c) s += static_cast<double>(b[c]) * input.values[c];
        out.values[i] = s;
    }
    return out;
}

EmbeddingMatrix reduce(const EmbeddingMatrix& input, const ReducedSpace& space) {
    if (input.cols != space.ambient_dim) {
        throw DimError("matrix has " + std::to_string(input.cols) + " columns, reducer expects " +
                       std::to_string(space.ambient_dim));
    }
    std::vector<double> coords(input.rows * space.reduced_dim);
    kernels::apply_basis(space.basis, space.reduced_dim, input.data, input.rows, input.cols, coords);
    EmbeddingMatrix out(input.rows, space.reduced_dim);
    std::transform(coords.begin(), coords.end(), out.data.begin(), [](double v) { return static_cast<float>(v); });
    out.source_hash = input.source_hash;
    return out;
}

EmbeddingVector lift(const EmbeddingVector& coords, const ReducedSpace& space) {
    if (coords.dim() != space.reduced_dim) {
        throw DimError("coordinates have dimension " + std::to_string(coords.dim()) + ", reducer expects " +
                       std::to_string(space.reduced_dim));
    }
    EmbeddingVector out(space.ambient_dim);
    for (std::size_t i = 0; i < space.reduced_dim; ++i) {
        const auto b = space.row(i);
        for (std::size_t c = 0; c < space.ambient_dim; ++c) out.values[c] += coords.values[i] * static_cast<double>(b[c]);
    }
    return out;
}

EmbeddingMatrix lift(const EmbeddingMatrix& coords, const ReducedSpace& space) {
    if (coords.cols != space.reduced_dim) {
        throw DimError("matrix has " + std::to_string(coords.cols) + " columns, reducer expects " +
                       std::to_string(space.reduced_dim));
    }
    std::vector<double> wide(coords.data.begin(), coords.data.end());
    std::vector<double> full(coords.rows * space.ambient_dim);
    kernels::lift_coordinates(space.basis, space.reduced_dim, wide, coords.rows, space.ambient_dim, full);
    EmbeddingMatrix out(coords.rows, space.ambient_dim);
    std::transform(full.begin(), full.end(), out.data.begin(), [](double v) { return static_cast<float>(v); });
    out.source_hash = coords.source_hash;
    return out;
}

}  // namespace editioner::spectral
