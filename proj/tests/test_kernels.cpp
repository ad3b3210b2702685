#include "editioner/kernels.hpp"
#include "editioner/spectral.hpp"
#include "support.hpp"

#include <random>

#include <doctest.h>

using namespace editioner;

namespace {

// Restores the thread budget a test case changed.
struct ThreadGuard {
    int saved = kernels::max_threads();
    ~ThreadGuard() { kernels::set_threads(saved); }
};

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<float> g(0.0f, 2.0f);
    std::vector<float> v(n);
    for (float& x : v) x = g(rng);
    return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels equal the serial reference bit for bit") {
    ThreadGuard guard;
    std::mt19937_64 rng(3);
    const std::size_t m = 301, d = 67, k = 9;
    const auto rows = random_floats(rng, m * d);
    const auto basis = random_floats(rng, k * d);
    std::vector<double> coords(m * k);
    for (double& c : coords) c = std::normal_distribution<double>(0, 1)(rng);

    std::vector<double> moment_ref(d * d, 0.0), gram_ref(m * m), apply_ref(m * k), lift_ref(m * d), norm_ref(m);
    kernels::serial::accumulate_second_moment<float>(rows, m, d, moment_ref);
    kernels::serial::gram<float>(rows, m, d, gram_ref);
    kernels::serial::apply_basis(basis, k, rows, m, d, apply_ref);
    kernels::serial::lift_coordinates(basis, k, coords, m, d, lift_ref);
    kernels::serial::row_norms(rows, m, d, norm_ref);

    for (int threads : {1, 2, 3, 8}) {
        CAPTURE(threads);
        kernels::set_threads(threads);
        std::vector<double> moment(d * d, 0.0), gram(m * m), apply(m * k), lift(m * d), norms(m);
        kernels::accumulate_second_moment<float>(rows, m, d, moment);
        kernels::gram<float>(rows, m, d, gram);
        kernels::apply_basis(basis, k, rows, m, d, apply);
        kernels::lift_coordinates(basis, k, coords, m, d, lift);
        kernels::row_norms(rows, m, d, norms);
        CHECK(moment == moment_ref);
        CHECK(gram == gram_ref);
        CHECK(apply == apply_ref);
        CHECK(lift == lift_ref);
        CHECK(norms == norm_ref);
    }
}

TEST_CASE("double-precision kernels agree too") {
    ThreadGuard guard;
    std::mt19937_64 rng(4);
    const std::size_t m = 50, d = 31;
    const auto rows = testing_support::gaussian(rng, m * d);
    std::vector<double> moment_ref(d * d, 0.0), gram_ref(m * m);
    kernels::serial::accumulate_second_moment<double>(rows, m, d, moment_ref);
    kernels::serial::gram<double>(rows, m, d, gram_ref);
    kernels::set_threads(4);
    std::vector<double> moment(d * d, 0.0), gram(m * m);
    kernels::accumulate_second_moment<double>(rows, m, d, moment);
    kernels::gram<double>(rows, m, d, gram);
    CHECK(moment == moment_ref);
    CHECK(gram == gram_ref);
}

TEST_CASE("second moment matches a direct sum") {
    const std::vector<float> rows = {1, 2, 3, 4, 5, 6};  // 2 x 3
    std::vector<double> acc(9, 0.0);
    kernels::accumulate_second_moment<float>(rows, 2, 3, acc);
    CHECK(acc[0 * 3 + 0] == 1 + 16);
    CHECK(acc[0 * 3 + 1] == 2 + 20);
    CHECK(acc[0 * 3 + 2] == 3 + 24);
    CHECK(acc[1 * 3 + 1] == 4 + 25);
    CHECK(acc[1 * 3 + 2] == 6 + 30);
    CHECK(acc[2 * 3 + 2] == 9 + 36);
}

TEST_CASE("spectra do not depend on the thread count") {
    ThreadGuard guard;
    std::mt19937_64 rng(8);
    const auto tall = testing_support::to_matrix(testing_support::gaussian(rng, 400 * 30), 400, 30);
    const auto wide = testing_support::to_matrix(testing_support::gaussian(rng, 25 * 90), 25, 90);
    kernels::set_threads(1);
    const auto tall_ref = spectral::compute_spectrum(tall);
    const auto wide_ref = spectral::compute_spectrum(wide);
    for (int threads : {2, 5}) {
        kernels::set_threads(threads);
        const auto t = spectral::compute_spectrum(tall);
        const auto w = spectral::compute_spectrum(wide);
        CHECK(t.values == tall_ref.values);
        CHECK(t.axes == tall_ref.axes);
        CHECK(w.values == wide_ref.values);
        CHECK(w.axes == wide_ref.axes);
    }
}

}  // TEST_SUITE
