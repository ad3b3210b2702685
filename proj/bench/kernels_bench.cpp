// Serial reference loops against the OpenMP kernels.

#include "editioner/kernels.hpp"

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

namespace k = editioner::kernels;

namespace {

std::vector<float> random_rows(std::size_t n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

constexpr std::size_t kRows = 2048;
constexpr std::size_t kDim = 384;
constexpr std::size_t kBasis = 32;

void set_threads(benchmark::State& state, bool parallel) {
    k::set_threads(parallel ? static_cast<int>(state.range(0)) : 1);
}

template <bool Parallel>
void BM_SecondMoment(benchmark::State& state) {
    set_threads(state, Parallel);
    const auto rows = random_rows(kRows * kDim);
    std::vector<double> acc(kDim * kDim);
    for (auto _ : state) {
        std::fill(acc.begin(), acc.end(), 0.0);
        if constexpr (Parallel) {
            k::accumulate_second_moment<float>(rows, kRows, kDim, acc);
        } else {
            k::serial::accumulate_second_moment<float>(rows, kRows, kDim, acc);
        }
        benchmark::DoNotOptimize(acc.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows);
}

template <bool Parallel>
void BM_Gram(benchmark::State& state) {
    set_threads(state, Parallel);
    const std::size_t m = 512;
    const auto rows = random_rows(m * 2048);
    std::vector<double> out(m * m);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::gram<float>(rows, m, 2048, out);
        } else {
            k::serial::gram<float>(rows, m, 2048, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_ApplyBasis(benchmark::State& state) {
    set_threads(state, Parallel);
    const auto basis = random_rows(kBasis * kDim);
    const auto rows = random_rows(kRows * kDim);
    std::vector<double> out(kRows * kBasis);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::apply_basis(basis, kBasis, rows, kRows, kDim, out);
        } else {
            k::serial::apply_basis(basis, kBasis, rows, kRows, kDim, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows);
}

template <bool Parallel>
void BM_Lift(benchmark::State& state) {
    set_threads(state, Parallel);
    const auto basis = random_rows(kBasis * kDim);
    const auto f = random_rows(kRows * kBasis);
    const std::vector<double> coords(f.begin(), f.end());
    std::vector<double> out(kRows * kDim);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::lift_coordinates(basis, kBasis, coords, kRows, kDim, out);
        } else {
            k::serial::lift_coordinates(basis, kBasis, coords, kRows, kDim, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows);
}

template <bool Parallel>
void BM_RowNorms(benchmark::State& state) {
    set_threads(state, Parallel);
    const auto rows = random_rows(kRows * kDim * 4);
    std::vector<double> out(kRows * 4);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::row_norms(rows, kRows * 4, kDim, out);
        } else {
            k::serial::row_norms(rows, kRows * 4, kDim, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * kRows * 4);
}

void thread_args(benchmark::internal::Benchmark* b) {
    for (int t : {1, 2, 4, 8}) b->Arg(t);
    b->UseRealTime();
}

}  // namespace

BENCHMARK(BM_SecondMoment<false>)->Arg(1)->UseRealTime();
BENCHMARK(BM_SecondMoment<true>)->Apply(thread_args);
BENCHMARK(BM_Gram<false>)->Arg(1)->UseRealTime();
BENCHMARK(BM_Gram<true>)->Apply(thread_args);
BENCHMARK(BM_ApplyBasis<false>)->Arg(1)->UseRealTime();
BENCHMARK(BM_ApplyBasis<true>)->Apply(thread_args);
BENCHMARK(BM_Lift<false>)->Arg(1)->UseRealTime();
BENCHMARK(BM_Lift<true>)->Apply(thread_args);
BENCHMARK(BM_RowNorms<false>)->Arg(1)->UseRealTime();
BENCHMARK(BM_RowNorms<true>)->Apply(thread_args);

BENCHMARK_MAIN();
