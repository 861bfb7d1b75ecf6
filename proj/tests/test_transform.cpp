#include <gtest/gtest.h>

#include <random>

#include <fraclap/config.hpp>
#include <fraclap/transform.hpp>

#include "oracles.hpp"

using namespace fraclap;

namespace {

std::vector<std::complex<double>> random_complex(std::size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::complex<double>> v(count);
    for (auto& z : v) z = {u(rng), u(rng)};
    return v;
}

double max_diff(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

} // namespace

TEST(Transforms, ForwardMatchesDefinition) {
    struct Case { int dim; std::int64_t side; };
    for (auto c : {Case{1, 16}, Case{2, 6}, Case{3, 4}}) {
        std::int64_t total = 1;
        for (int a = 0; a < c.dim; ++a) total *= c.side;
        SpectralBuffer buf = make_buffer(c.dim, c.side);
        buf.values = random_complex(static_cast<std::size_t>(total), 7u + static_cast<unsigned>(c.dim));
        auto want = oracle::dft_forward(buf.values, c.dim, c.side);
        SpectralBuffer got = dft_forward(std::move(buf));
        EXPECT_LT(max_diff(got.values, want), 1e-11) << "dim " << c.dim;
    }
}

TEST(Transforms, InverseMatchesDefinition) {
    SpectralBuffer buf = make_buffer(2, 8);
    buf.values = random_complex(64, 21);
    auto want = oracle::dft_inverse(buf.values, 2, 8);
    SpectralBuffer got = dft_inverse(std::move(buf));
    EXPECT_LT(max_diff(got.values, want), 1e-12);
}

TEST(Transforms, RoundTripIsIdentity) {
    SpectralBuffer buf = make_buffer(3, 4);
    buf.values = random_complex(64, 33);
    auto orig = buf.values;
    SpectralBuffer back = dft_inverse(dft_forward(std::move(buf)));
    EXPECT_LT(max_diff(back.values, orig), 1e-13);
}

TEST(Transforms, ParsevalWithUnnormalizedForward) {
    SpectralBuffer buf = make_buffer(2, 8);
    buf.values = random_complex(64, 5);
    double phys = 0.0;
    for (auto& z : buf.values) phys += std::norm(z);
    SpectralBuffer hat = dft_forward(std::move(buf));
    double spec = 0.0;
    for (auto& z : hat.values) spec += std::norm(z);
    EXPECT_NEAR(spec, 64.0 * phys, 1e-9 * spec);
}

TEST(Transforms, HalfSpectrumAgreesWithFullTransform) {
    const int dim = 2;
    const std::int64_t m = 8;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(64);
    for (auto& v : x) v = u(rng);

    std::vector<std::complex<double>> full(x.begin(), x.end());
    auto want = oracle::dft_forward(full, dim, m);

    const std::int64_t hside = m / 2 + 1;
    std::vector<std::complex<double>> half(static_cast<std::size_t>(8 * hside));
    fft::transform_r2c(x.data(), half.data(), dim, m);
    for (std::int64_t row = 0; row < 8; ++row)
        for (std::int64_t l = 0; l < hside; ++l) {
            auto got = half[static_cast<std::size_t>(row * hside + l)];
            auto ref = want[static_cast<std::size_t>(row * m + l)];
            EXPECT_LT(std::abs(got - ref), 1e-12);
        }

    // c2r inverts it up to the documented factor total
    std::vector<double> back(64);
    fft::transform_c2r(half.data(), back.data(), dim, m);
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back[i], 64.0 * x[i], 1e-11);
}

TEST(Transforms, RealEvenInputHasRealSpectrum) {
    // values depending only on the wrapped distance |shift(k)| are even
    const std::int64_t m = 16;
    SpectralBuffer buf = make_buffer(1, m);
    for (std::int64_t k = 0; k < m; ++k) {
        double t = static_cast<double>(shift_to_signed(k, m));
        buf.values[static_cast<std::size_t>(k)] = {std::exp(-0.3 * t * t), 0.0};
    }
    SpectralBuffer hat = dft_forward(std::move(buf));
    for (auto& z : hat.values) EXPECT_LT(std::abs(z.imag()), 1e-12);
}

TEST(Embedding, PlacesBlockAtOffsetN) {
    ProblemParams p{1, 2, 0.5};
    GridFunction g = make_grid(p);
    g.values = {3.0, 4.0};
    SpectralBuffer b = embed_padded(g);
    ASSERT_EQ(b.values.size(), 4u);
    EXPECT_EQ(b.values[0], std::complex<double>(0.0, 0.0));
    EXPECT_EQ(b.values[1], std::complex<double>(0.0, 0.0));
    EXPECT_EQ(b.values[2], std::complex<double>(3.0, 0.0));
    EXPECT_EQ(b.values[3], std::complex<double>(4.0, 0.0));
}

TEST(Embedding, CropTakesOriginBlock) {
    ProblemParams p{2, 2, 0.5};
    SpectralBuffer b = make_buffer(2, 4);
    for (std::size_t i = 0; i < b.values.size(); ++i)
        b.values[i] = {static_cast<double>(i), 100.0};
    GridFunction g = crop_block(std::move(b), p);
    // origin 2x2 block of a 4x4 row-major array: indices 0,1,4,5; imag parts dropped
    EXPECT_EQ(g.values, (std::vector<double>{0.0, 1.0, 4.0, 5.0}));
}

TEST(Embedding, ZeroExtendKeepsOriginBlock) {
    ProblemParams p{1, 3, 0.5};
    GridFunction g = make_grid(p);
    g.values = {1.0, 2.0, 3.0};
    SpectralBuffer b = zero_extend(g, 2);
    ASSERT_EQ(b.values.size(), 6u);
    EXPECT_EQ(b.values[0].real(), 1.0);
    EXPECT_EQ(b.values[1].real(), 2.0);
    EXPECT_EQ(b.values[2].real(), 3.0);
    EXPECT_EQ(b.values[3].real(), 0.0);
    EXPECT_EQ(b.values[5].real(), 0.0);
}

TEST(Transforms, ThreadSettingDoesNotChangeValues) {
    SpectralBuffer buf = make_buffer(2, 16);
    buf.values = random_complex(256, 99);
    auto copy = buf.values;
    set_thread_count(1);
    SpectralBuffer a = dft_forward(std::move(buf));
    set_thread_count(4);
    SpectralBuffer buf2 = make_buffer(2, 16);
    buf2.values = copy;
    SpectralBuffer b = dft_forward(std::move(buf2));
    set_thread_count(1);
    EXPECT_LT(max_diff(a.values, b.values), 1e-13);
}
