#include "editioner/errors.hpp"
#include "editioner/spectral.hpp"
#include "oracle/jacobi_svd.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

using namespace editioner;
using testing_support::ScratchDir;

namespace {

struct OracleSpectrum {
    std::vector<double> values;  // sigma^2 / m, descending
    std::vector<double> axes;    // rows
};

OracleSpectrum oracle_spectrum(const EmbeddingMatrix& data) {
    const auto svd = oracle::jacobi_svd(testing_support::to_double(data), data.rows, data.cols);
    OracleSpectrum o;
    for (double s : svd.singular) o.values.push_back(s * s / static_cast<double>(data.rows));
    o.axes = svd.right;
    return o;
}

// Checks values (relative) and axes with a distinct value (principal angle).
void check_against_oracle(const spectral::Spectrum& s, const EmbeddingMatrix& data, double value_tol,
                          double angle_tol) {
    const auto o = oracle_spectrum(data);
    const std::size_t n = std::min(data.rows, data.cols);
    REQUIRE(s.count() == n);
    const double top = o.values.front();
    for (std::size_t i = 0; i < n; ++i) {
        CAPTURE(i);
        CHECK(std::abs(s.values[i] - o.values[i]) <= value_tol * std::max(o.values[i], 1e-12 * top));
        const double gap_prev = i == 0 ? top : o.values[i - 1] - o.values[i];
        const double gap_next = i + 1 == n ? (data.cols > n ? o.values[i] : top) : o.values[i] - o.values[i + 1];
        if (std::min(gap_prev, gap_next) > 1e-6 * top) {
            CHECK(oracle::line_angle(s.axis(i).data(), o.axes.data() + i * data.cols, data.cols) < angle_tol);
        }
    }
}

EmbeddingMatrix gaussian_matrix(std::mt19937_64& rng, std::size_t m, std::size_t d, double sigma = 1.0) {
    return testing_support::to_matrix(testing_support::gaussian(rng, m * d, sigma), m, d);
}

// rows x d data lying exactly in an r-dim subspace, with a decaying spectrum.
EmbeddingMatrix rank_r_matrix(std::mt19937_64& rng, std::size_t m, std::size_t d, std::size_t r,
                              std::vector<double>* frame_out = nullptr) {
    const auto frame = testing_support::random_frame(rng, r, d);
    std::vector<double> scales(r);
    for (std::size_t i = 0; i < r; ++i) scales[i] = 10.0 / static_cast<double>(i + 1);
    if (frame_out) *frame_out = frame;
    return testing_support::to_matrix(testing_support::points_in_frame(rng, frame, r, d, m, scales), m, d);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("oracle reproduces a known decomposition") {
    // [[3,0],[0,-2],[0,0]] has singular values 3, 2 and right vectors e1, e2.
    const auto svd = oracle::jacobi_svd({3, 0, 0, -2, 0, 0}, 3, 2);
    CHECK(svd.singular[0] == doctest::Approx(3.0));
    CHECK(svd.singular[1] == doctest::Approx(2.0));
    CHECK(std::abs(svd.right[0]) == doctest::Approx(1.0));
    CHECK(std::abs(svd.right[3]) == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    const std::size_t m = 12, d = 7;
    const auto a = testing_support::gaussian(rng, m * d);
    const auto s = oracle::jacobi_svd(a, m, d);
    // A^T A v_i = sigma_i^2 v_i
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            double ata_v = 0;
            for (std::size_t b = 0; b < d; ++b) {
                double ata = 0;
                for (std::size_t r = 0; r < m; ++r) ata += a[r * d + c] * a[r * d + b];
                ata_v += ata * s.right[i * d + b];
            }
            CHECK(ata_v == doctest::Approx(s.singular[i] * s.singular[i] * s.right[i * d + c]).epsilon(1e-10));
        }
    }
}

TEST_CASE("rank-one rows give one value on (1,0,0)") {
    EmbeddingMatrix data(4, 3, {1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0});
    const auto s = spectral::compute_spectrum(data);
    REQUIRE(s.count() == 3);
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(s.values[1] == 0.0);
    CHECK(s.values[2] == 0.0);
    CHECK(s.axis(0)[0] == doctest::Approx(1.0));
    CHECK(std::abs(s.axis(0)[1]) < 1e-12);
    CHECK(std::abs(s.axis(0)[2]) < 1e-12);
    CHECK(s.total_variance == doctest::Approx(1.0));
}

TEST_CASE("100x20 random matrix matches the SVD oracle") {
    std::mt19937_64 rng(100);
    const auto data = gaussian_matrix(rng, 100, 20);
    check_against_oracle(spectral::compute_spectrum(data), data, 1e-8, 1e-6);
}

TEST_CASE("wide matrices take the Gram path and still match the oracle") {
    std::mt19937_64 rng(101);
    for (auto [m, d] : {std::pair<std::size_t, std::size_t>{15, 40}, {30, 31}, {2, 9}}) {
        CAPTURE(m);
        CAPTURE(d);
        const auto data = gaussian_matrix(rng, m, d);
        const auto s = spectral::compute_spectrum(data);
        check_against_oracle(s, data, 1e-8, 1e-6);
    }
}

TEST_CASE("spectrum invariants: descending, nonnegative, orthonormal, sign convention") {
    std::mt19937_64 rng(102);
    for (auto [m, d] : {std::pair<std::size_t, std::size_t>{60, 12}, {10, 25}}) {
        const auto data = gaussian_matrix(rng, m, d, 4.0);
        const auto s = spectral::compute_spectrum(data);
        const std::size_t n = s.count();
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(s.values[i] >= 0.0);
            if (i > 0) CHECK(s.values[i] <= s.values[i - 1]);
            total += s.values[i];
            const auto ax = s.axis(i);
            const auto big = std::max_element(ax.begin(), ax.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
            CHECK(*big > 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                double g = 0;
                for (std::size_t c = 0; c < d; ++c) g += ax[c] * s.axis(j)[c];
                CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
        }
        CHECK(s.total_variance == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("total variance equals the mean squared row norm") {
    std::mt19937_64 rng(103);
    const auto data = gaussian_matrix(rng, 80, 16, 2.0);
    double sq = 0;
    for (float v : data.data) sq += static_cast<double>(v) * v;
    CHECK(spectral::compute_spectrum(data).total_variance == doctest::Approx(sq / 80.0).epsilon(1e-12));
}

TEST_CASE("reconstruction error equals m times the discarded values") {
    std::mt19937_64 rng(104);
    for (auto [m, d] : {std::pair<std::size_t, std::size_t>{90, 18}, {14, 30}}) {
        const auto data = gaussian_matrix(rng, m, d, 3.0);
        const auto o = oracle_spectrum(data);
        const auto s = spectral::compute_spectrum(data);
        const auto dd = testing_support::to_double(data);
        for (std::size_t k : {std::size_t{1}, std::size_t{4}, std::min(m, d) - 1}) {
            double err = 0;
            for (std::size_t r = 0; r < m; ++r) {
                std::vector<double> x(dd.begin() + r * d, dd.begin() + (r + 1) * d);
                std::vector<double> p(d, 0.0);
                for (std::size_t i = 0; i < k; ++i) {
                    double c = 0;
                    for (std::size_t j = 0; j < d; ++j) c += s.axis(i)[j] * x[j];
                    for (std::size_t j = 0; j < d; ++j) p[j] += c * s.axis(i)[j];
                }
                for (std::size_t j = 0; j < d; ++j) err += (x[j] - p[j]) * (x[j] - p[j]);
            }
            double discarded = 0;
            for (std::size_t i = k; i < o.values.size(); ++i) discarded += o.values[i];
            CAPTURE(k);
            CHECK(std::abs(err - discarded * m) <= 1e-4 * discarded * m);
        }
    }
}

TEST_CASE("centered and uncentered spectra agree on mean-free data") {
    std::mt19937_64 rng(105);
    const std::size_t m = 64, d = 10;
    auto raw = testing_support::gaussian(rng, m * d, 2.0);
    // Mirror each row so that the mean is exactly zero in float storage.
    EmbeddingMatrix data(m, d);
    for (std::size_t r = 0; r < m / 2; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const float v = static_cast<float>(raw[r * d + c]);
            data.data[r * d + c] = v;
            data.data[(r + m / 2) * d + c] = -v;
        }
    }
    const auto plain = spectral::compute_spectrum(data, false);
    const auto centered = spectral::compute_spectrum(data, true);
    for (std::size_t i = 0; i < plain.count(); ++i) {
        CHECK(centered.values[i] == doctest::Approx(plain.values[i]).epsilon(1e-12));
        CHECK(oracle::line_angle(plain.axis(i).data(), centered.axis(i).data(), d) < 1e-8);
    }
}

TEST_CASE("centering removes an offset") {
    std::mt19937_64 rng(106);
    const std::size_t m = 50, d = 6;
    auto base = testing_support::gaussian(rng, m * d);
    auto shifted = base;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < d; ++c) shifted[r * d + c] += 100.0;
    const auto a = spectral::compute_spectrum(testing_support::to_matrix(base, m, d), true);
    const auto b = spectral::compute_spectrum(testing_support::to_matrix(shifted, m, d), true);
    for (std::size_t i = 0; i < a.count(); ++i) CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-4));
    const auto u = spectral::compute_spectrum(testing_support::to_matrix(shifted, m, d), false);
    CHECK(u.values[0] > 100.0 * 100.0 * static_cast<double>(d) * 0.9);
}

TEST_CASE("spectrum errors") {
    CHECK_THROWS_AS(spectral::compute_spectrum(EmbeddingMatrix(1, 3, {1, 2, 3})), DataError);
    EmbeddingMatrix bad(2, 2, {1, 2, 3, 4});
    bad.data[3] = std::nanf("");
    CHECK_THROWS_AS(spectral::compute_spectrum(bad), DataError);
}

TEST_CASE("cumulative ratios are nondecreasing and reach one at full rank") {
    std::mt19937_64 rng(107);
    const auto data = gaussian_matrix(rng, 40, 12);
    const auto s = spectral::compute_spectrum(data);
    const auto cum = spectral::cumulative_ratios(s.values, s.total_variance);
    for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] >= cum[i - 1]);
    CHECK(cum.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("streamed spectrum equals the in-memory one") {
    ScratchDir dir("spectral");
    std::mt19937_64 rng(108);
    const auto data = gaussian_matrix(rng, 1000, 24);
    store::write_matrix(data, dir / "d.npy");
    const auto ref = spectral::compute_spectrum(data);
    for (std::size_t chunk : {1, 7, 256, 5000}) {
        store::NpyReader reader(dir / "d.npy");
        const auto s = spectral::compute_spectrum(reader, chunk);
        CHECK(s.values == ref.values);
        CHECK(s.axes == ref.axes);
    }
    const auto wide = gaussian_matrix(rng, 20, 50);
    store::write_matrix(wide, dir / "w.npy");
    store::NpyReader reader(dir / "w.npy");
    CHECK(spectral::compute_spectrum(reader, 8).values == spectral::compute_spectrum(wide).values);
}

TEST_CASE("rank-5 data: reducer at 5 captures everything") {
    std::mt19937_64 rng(109);
    const auto data = rank_r_matrix(rng, 200, 30, 5);
    const auto space = spectral::build_reducer(data, 5);
    CHECK(space.reduced_dim == 5);
    CHECK(space.ambient_dim == 30);
    CHECK(space.captured_variance_ratio >= 1.0 - 1e-9);
    CHECK(space.captured_variance_ratio <= 1.0 + 1e-12);
    space.validate();
}

TEST_CASE("captured ratio grows with the target and stays below one on full-rank data") {
    std::mt19937_64 rng(110);
    const auto data = gaussian_matrix(rng, 120, 15);
    double prev = 0;
    for (std::size_t r = 1; r < 15; ++r) {
        const auto space = spectral::build_reducer(data, r);
        CHECK(space.captured_variance_ratio > prev);
        prev = space.captured_variance_ratio;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("reducer target must be in range") {
    std::mt19937_64 rng(111);
    const auto data = gaussian_matrix(rng, 20, 8);
    CHECK_THROWS_AS(spectral::build_reducer(data, 0), ConfigError);
    CHECK_THROWS_AS(spectral::build_reducer(data, 8), ConfigError);
    const auto wide = gaussian_matrix(rng, 6, 8);
    CHECK_THROWS_AS(spectral::build_reducer(wide, 6), ConfigError);
    CHECK_NOTHROW(spectral::build_reducer(wide, 5));
}

TEST_CASE("reduce and lift on basis rows and unit coordinates") {
    std::mt19937_64 rng(112);
    const auto data = gaussian_matrix(rng, 100, 12);
    const auto space = spectral::build_reducer(data, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto coords = spectral::reduce(EmbeddingVector::from_row(space.row(i)), space);
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(coords.values[j] - (i == j ? 1.0 : 0.0)) < 1e-6);
        EmbeddingVector e(4);
        e.values[i] = 1.0;
        const auto lifted = spectral::lift(e, space);
        for (std::size_t c = 0; c < 12; ++c) CHECK(lifted.values[c] == static_cast<double>(space.row(i)[c]));
    }
    const auto zero = spectral::lift(EmbeddingVector(4), space);
    for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("lift after reduce is a contracting idempotent projector") {
    std::mt19937_64 rng(113);
    const auto data = gaussian_matrix(rng, 150, 20);
    const auto space = spectral::build_reducer(data, 7);
    for (int trial = 0; trial < 50; ++trial) {
        EmbeddingVector x(testing_support::gaussian(rng, 20, 5.0));
        const auto once = spectral::lift(spectral::reduce(x, space), space);
        const auto twice = spectral::lift(spectral::reduce(once, space), space);
        CHECK(once.norm() <= x.norm() * (1 + 1e-12));
        double diff = 0;
        for (std::size_t c = 0; c < 20; ++c) diff += (once.values[c] - twice.values[c]) * (once.values[c] - twice.values[c]);
        CHECK(std::sqrt(diff) <= 1e-6 * once.norm());
    }
}

TEST_CASE("vectors inside the reduced span survive the round trip") {
    std::mt19937_64 rng(114);
    std::vector<double> frame;
    const auto data = rank_r_matrix(rng, 300, 25, 6, &frame);
    const auto space = spectral::build_reducer(data, 6);
    const auto back = spectral::lift(spectral::reduce(data, space), space);
    REQUIRE(back.rows == data.rows);
    for (std::size_t r = 0; r < data.rows; ++r) {
        double diff = 0, n = 0;
        for (std::size_t c = 0; c < 25; ++c) {
            const double a = data.data[r * 25 + c], b = back.data[r * 25 + c];
            diff += (a - b) * (a - b);
            n += a * a;
        }
        REQUIRE(std::sqrt(diff) <= 1e-5 * std::sqrt(n));
    }
}

TEST_CASE("dimension mismatches raise DimError") {
    std::mt19937_64 rng(115);
    const auto data = gaussian_matrix(rng, 40, 10);
    const auto space = spectral::build_reducer(data, 3);
    CHECK_THROWS_AS(spectral::reduce(EmbeddingVector(9), space), DimError);
    CHECK_THROWS_AS(spectral::lift(EmbeddingVector(4), space), DimError);
    CHECK_THROWS_AS(spectral::reduce(EmbeddingMatrix(2, 11), space), DimError);
    CHECK_THROWS_AS(spectral::lift(EmbeddingMatrix(2, 10), space), DimError);
}

TEST_CASE("reducer validation catches a damaged basis") {
    std::mt19937_64 rng(116);
    auto space = spectral::build_reducer(gaussian_matrix(rng, 40, 10), 3);
    CHECK_NOTHROW(space.validate());
    space.basis[4] += 1e-2f;
    CHECK_THROWS_AS(space.validate(), IntegrityError);
}

}  // TEST_SUITE
