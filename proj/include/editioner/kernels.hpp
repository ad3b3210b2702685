#pragma once

// Data-parallel inner loops behind the PCA and projection code.
//
// Every parallel kernel partitions over *output* entries and sums each entry
// over its inputs in ascending index order, so results are bitwise identical
// for any OpenMP thread count. The `serial` namespace holds plain reference
// loops with the same per-entry summation order; tests compare the two
// bit-for-bit and the benchmark times them against each other.

#include <cstddef>
#include <span>

namespace editioner::kernels {

/// acc[i*dim + j] += sum_r rows[r][i] * rows[r][j] for j >= i (upper triangle only).
template <typename T>
void accumulate_second_moment(std::span<const T> rows, std::size_t n_rows, std::size_t dim, std::span<double> acc);

/// out[a*n_rows + b] = <rows[a], rows[b]>, full symmetric n_rows x n_rows.
template <typename T>
void gram(std::span<const T> rows, std::size_t n_rows, std::size_t dim, std::span<double> out);

/// out[r*k + i] = <basis[i], rows[r]>: coordinates of each row in a k-row basis.
void apply_basis(std::span<const float> basis, std::size_t k, std::span<const float> rows, std::size_t n_rows,
                 std::size_t dim, std::span<double> out);

/// out[r*dim + c] = sum_i coords[r][i] * basis[i][c].
void lift_coordinates(std::span<const float> basis, std::size_t k, std::span<const double> coords,
                      std::size_t n_rows, std::size_t dim, std::span<double> out);

/// Euclidean norm of each row.
void row_norms(std::span<const float> rows, std::size_t n_rows, std::size_t dim, std::span<double> out);

namespace serial {

template <typename T>
void accumulate_second_moment(std::span<const T> rows, std::size_t n_rows, std::size_t dim, std::span<double> acc);
template <typename T>
void gram(std::span<const T> rows, std::size_t n_rows, std::size_t dim, std::span<double> out);
void apply_basis(std::span<const float> basis, std::size_t k, std::span<const float> rows, std::size_t n_rows,
                 std::size_t dim, std::span<double> out);
void lift_coordinates(std::span<const float> basis, std::size_t k, std::span<const double> coords,
                      std::size_t n_rows, std::size_t dim, std::span<double> out);
void row_norms(std::span<const float> rows, std::size_t n_rows, std::size_t dim, std::span<double> out);

}  // namespace serial

/// Current OpenMP thread budget (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace editioner::kernels
