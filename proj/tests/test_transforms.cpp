#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dfr/transforms.hpp"
#include "oracle_helpers.hpp"

using namespace dfr;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

Tensor random_tensor(std::mt19937_64& rng, const std::vector<std::size_t>& dims) {
    Tensor t(dims);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = oracle::uniform(rng, -1.0, 1.0);
    return t;
}
}  // namespace

TEST_CASE("2x2 matrices match the closed-form entries") {
    const TransformMatrix c = build_transform(2, TransformKind::Cst2);
    CHECK(c.entries(0, 0) == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(c.entries(0, 1) == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(c.entries(1, 0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(c.entries(1, 1) == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-15));

    const TransformMatrix s = build_transform(2, TransformKind::Dst2);
    CHECK(s.entries(0, 0) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(s.entries(0, 1) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(s.entries(1, 0) == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(s.entries(1, 1) == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
}

TEST_CASE("DCT-II row 0 at n=4 is constant 1/2") {
    const TransformMatrix c = build_transform(4, TransformKind::Cst2);
    for (int j = 0; j < 4; ++j) CHECK(c.entries(0, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("n=1 transforms are the 1x1 identity") {
    CHECK(build_transform(1, TransformKind::Cst2).entries(0, 0) == doctest::Approx(1.0));
    CHECK(build_transform(1, TransformKind::Dst2).entries(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("n=0 is rejected") {
    CHECK_THROWS_AS(build_transform(0, TransformKind::Dst2), std::invalid_argument);
}

TEST_CASE("rows are orthonormal for n in {1,2,4,8,64}") {
    for (std::size_t n : {1u, 2u, 4u, 8u, 64u}) {
        for (auto kind : {TransformKind::Dst2, TransformKind::Cst2}) {
            const TransformMatrix tm = build_transform(n, kind);
            const Eigen::MatrixXd dev =
                tm.entries * tm.entries.transpose() -
                Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n));
            CHECK(dev.cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("constant grid of ones under DCT-II n=4 gives (2,0,0,0)") {
    Tensor t({4}, 1.0);
    const Tensor c = apply_separable(t, {TransformKind::Cst2});
    CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-14));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(c[i]) < 1e-14);
}

TEST_CASE("sin(x) samples concentrate in the first DST-II coefficient") {
    const std::size_t n = 8;
    Tensor t({n});
    for (std::size_t i = 0; i < n; ++i)
        t[i] = std::sin((2.0 * i + 1.0) * kPi / (2.0 * n));
    const Tensor c = apply_separable(t, {TransformKind::Dst2});
    CHECK(std::abs(c[0]) > 1.0);
    for (std::size_t i = 1; i < n; ++i) CHECK(std::abs(c[i] / c[0]) < 1e-12);
}

TEST_CASE("2D separable pass equals the direct double-loop quadrature sum") {
    // kinds (Cst2, Dst2): coefficient (a,b) must equal
    // sum_ij f(x_i,y_j) C[a,i] S[b,j]
    std::mt19937_64 rng(11);
    Tensor t = random_tensor(rng, {6, 5});
    const Tensor c = apply_separable(t, {TransformKind::Cst2, TransformKind::Dst2});
    const TransformMatrix C = build_transform(6, TransformKind::Cst2);
    const TransformMatrix S = build_transform(5, TransformKind::Dst2);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 5; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < 5; ++j)
                    s += t.at(i, j) * C.entries(a, i) * S.entries(b, j);
            CHECK(std::abs(c.at(a, b) - s) < 1e-12);
        }
}

TEST_CASE("apply_separable equals naive_apply on random tensors up to rank 3") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rank = 1 + trial % 3;
        std::vector<std::size_t> dims(rank);
        std::vector<TransformKind> kinds(rank);
        for (std::size_t a = 0; a < rank; ++a) {
            dims[a] = 1 + rng() % 16;
            kinds[a] = rng() % 2 ? TransformKind::Dst2 : TransformKind::Cst2;
        }
        const Tensor t = random_tensor(rng, dims);
        const Tensor fast = apply_separable(t, kinds);
        const Tensor slow = naive_apply(t, kinds);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i)
            CHECK(std::abs(fast[i] - slow[i]) < 1e-12);
    }
}

TEST_CASE("naive_apply of a zero grid is zero") {
    Tensor t({4, 3}, 0.0);
    const Tensor c = naive_apply(t, {TransformKind::Dst2, TransformKind::Cst2});
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 0.0);
}

TEST_CASE("rank mismatch between samples and kinds is rejected") {
    Tensor t({4, 4});
    CHECK_THROWS_AS(apply_separable(t, {TransformKind::Dst2}), std::invalid_argument);
    CHECK_THROWS_AS(naive_apply(t, {TransformKind::Dst2}), std::invalid_argument);
}

TEST_CASE("quadrature exactness: midpoint DST reproduces sin/sin integrals") {
    // int_0^pi sin(kx) sin(mx) dx = (pi/2) delta_km, exact for k+m < 2N
    const std::size_t n = 12;
    for (int k = 1; k <= static_cast<int>(n); ++k) {
        Tensor t({n});
        for (std::size_t i = 0; i < n; ++i)
            t[i] = std::sin(k * (2.0 * i + 1.0) * kPi / (2.0 * n));
        const Tensor c = apply_separable(t, {TransformKind::Dst2});
        for (int m = 1; m <= static_cast<int>(n); ++m) {
            if (k + m >= 2 * static_cast<int>(n)) continue;
            const auto qr = quadrature_row(n, TransformKind::Dst2, m);
            REQUIRE(qr.has_value());
            const double integral = (kPi / n) * qr->unscale * c[qr->row];
            const double expected = (k == m) ? kPi / 2.0 : 0.0;
            CHECK(std::abs(integral - expected) < 1e-10);
        }
    }
}

TEST_CASE("quadrature_row edge wavenumbers") {
    CHECK_FALSE(quadrature_row(8, TransformKind::Dst2, 0).has_value());  // sin(0x) == 0
    CHECK_FALSE(quadrature_row(8, TransformKind::Cst2, 8).has_value());  // cos(8 x_i) == 0
    CHECK(quadrature_row(8, TransformKind::Dst2, 8).has_value());
    CHECK(quadrature_row(8, TransformKind::Cst2, 0).has_value());
    CHECK_THROWS_AS(quadrature_row(8, TransformKind::Dst2, 9), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_row(8, TransformKind::Cst2, 9), std::invalid_argument);

    // cos(n x_i) really is identically zero at the midpoints
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(std::cos(8.0 * (2.0 * i + 1.0) * kPi / 16.0)) < 1e-12);
}

TEST_CASE("partial transform rows agree with the full matrix") {
    const Eigen::MatrixXd part = build_transform_rows(16, TransformKind::Cst2, 5);
    const TransformMatrix full = build_transform(16, TransformKind::Cst2);
    CHECK((part - full.entries.topRows(5)).cwiseAbs().maxCoeff() == 0.0);
}
