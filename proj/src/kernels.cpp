#include "editioner/kernels.hpp"

#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace editioner::kernels {

using std::size_t;
using index_t = std::int64_t;  // OpenMP loop counters

template <typename T>
void accumulate_second_moment(std::span<const T> rows, size_t n_rows, size_t dim, std::span<double> acc) {
    const T* x = rows.data();
    double* a = acc.data();
    const auto d = static_cast<index_t>(dim);
    // Row i of the triangle is owned by one thread; rows of data stream past in order.
#pragma omp parallel for schedule(dynamic, 4)
    for (index_t i = 0; i < d; ++i) {
        double* ai = a + i * d;
        for (size_t r = 0; r < n_rows; ++r) {
            const T* xr = x + r * dim;
            const double xi = static_cast<double>(xr[i]);
            for (index_t j = i; j < d; ++j) ai[j] += xi * static_cast<double>(xr[j]);
        }
    }
}

template <typename T>
void gram(std::span<const T> rows, size_t n_rows, size_t dim, std::span<double> out) {
    const T* x = rows.data();
    const auto m = static_cast<index_t>(n_rows);
#pragma omp parallel for schedule(dynamic, 4)
    for (index_t a = 0; a < m; ++a) {
        const T* xa = x + a * dim;
        for (index_t b = a; b < m; ++b) {
            const T* xb = x + b * dim;
            double s = 0.0;
            for (size_t c = 0; c < dim; ++c) s += static_cast<double>(xa[c]) * static_cast<double>(xb[c]);
            out[a * m + b] = s;
            out[b * m + a] = s;
        }
    }
}

void apply_basis(std::span<const float> basis, size_t k, std::span<const float> rows, size_t n_rows, size_t dim,
                 std::span<double> out) {
    const auto m = static_cast<index_t>(n_rows);
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < m; ++r) {
        const float* xr = rows.data() + r * dim;
        for (size_t i = 0; i < k; ++i) {
            const float* bi = basis.data() + i * dim;
            double s = 0.0;
            for (size_t c = 0; c < dim; ++c) s += static_cast<double>(bi[c]) * static_cast<double>(xr[c]);
            out[r * k + i] = s;
        }
    }
}

void lift_coordinates(std::span<const float> basis, size_t k, std::span<const double> coords, size_t n_rows,
                      size_t dim, std::span<double> out) {
    const auto m = static_cast<index_t>(n_rows);
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < m; ++r) {
        double* yr = out.data() + r * dim;
        const double* cr = coords.data() + r * k;
        for (size_t c = 0; c < dim; ++c) yr[c] = 0.0;
        for (size_t i = 0; i < k; ++i) {
            const float* bi = basis.data() + i * dim;
            const double ci = cr[i];
            for (size_t c = 0; c < dim; ++c) yr[c] += ci * static_cast<double>(bi[c]);
        }
    }
}

void row_norms(std::span<const float> rows, size_t n_rows, size_t dim, std::span<double> out) {
    const auto m = static_cast<index_t>(n_rows);
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < m; ++r) {
        const float* xr = rows.data() + r * dim;
        double s = 0.0;
        for (size_t c = 0; c < dim; ++c) s += static_cast<double>(xr[c]) * static_cast<double>(xr[c]);
        out[r] = std::sqrt(s);
    }
}

template void accumulate_second_moment<float>(std::span<const float>, size_t, size_t, std::span<double>);
template void accumulate_second_moment<double>(std::span<const double>, size_t, size_t, std::span<double>);
template void gram<float>(std::span<const float>, size_t, size_t, std::span<double>);
template void gram<double>(std::span<const double>, size_t, size_t, std::span<double>);

namespace serial {

template <typename T>
void accumulate_second_moment(std::span<const T> rows, size_t n_rows, size_t dim, std::span<double> acc) {
    for (size_t i = 0; i < dim; ++i) {
        for (size_t j = i; j < dim; ++j) {
            double s = acc[i * dim + j];
            for (size_t r = 0; r < n_rows; ++r) {
                s += static_cast<double>(rows[r * dim + i]) * static_cast<double>(rows[r * dim + j]);
            }
            acc[i * dim + j] = s;
        }
    }
}

template <typename T>
void gram(std::span<const T> rows, size_t n_rows, size_t dim, std::span<double> out) {
    for (size_t a = 0; a < n_rows; ++a) {
        for (size_t b = 0; b < n_rows; ++b) {
            // Same operand order as the parallel kernel, which only computes b >= a.
            const size_t lo = std::min(a, b), hi = std::max(a, b);
            double s = 0.0;
            for (size_t c = 0; c < dim; ++c) {
                s += static_cast<double>(rows[lo * dim + c]) * static_cast<double>(rows[hi * dim + c]);
            }
            out[a * n_rows + b] = s;
        }
    }
}

void apply_basis(std::span<const float> basis, size_t k, std::span<const float> rows, size_t n_rows, size_t dim,
                 std::span<double> out) {
    for (size_t r = 0; r < n_rows; ++r) {
        for (size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (size_t c = 0; c < dim; ++c) {
                s += static_cast<double>(basis[i * dim + c]) * static_cast<double>(rows[r * dim + c]);
            }
            out[r * k + i] = s;
        }
    }
}

void lift_coordinates(std::span<const float> basis, size_t k, std::span<const double> coords, size_t n_rows,
                      size_t dim, std::span<double> out) {
    for (size_t r = 0; r < n_rows; ++r) {
        for (size_t c = 0; c < dim; ++c) {
            double s = 0.0;
            for (size_t i = 0; i < k; ++i) s += coords[r * k + i] * static_cast<double>(basis[i * dim + c]);
            out[r * dim + c] = s;
        }
    }
}

void row_norms(std::span<const float> rows, size_t n_rows, size_t dim, std::span<double> out) {
    for (size_t r = 0; r < n_rows; ++r) {
        double s = 0.0;
        for (size_t c = 0; c < dim; ++c) {
            s += static_cast<double>(rows[r * dim + c]) * static_cast<double>(rows[r * dim + c]);
        }
        out[r] = std::sqrt(s);
    }
}

template void accumulate_second_moment<float>(std::span<const float>, size_t, size_t, std::span<double>);
template void accumulate_second_moment<double>(std::span<const double>, size_t, size_t, std::span<double>);
template void gram<float>(std::span<const float>, size_t, size_t, std::span<double>);
template void gram<double>(std::span<const double>, size_t, size_t, std::span<double>);

}  // namespace serial

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n < 1 ? 1 : n);
#else
    (void)n;
#endif
}

}  // namespace editioner::kernels
