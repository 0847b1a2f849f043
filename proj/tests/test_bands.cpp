#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "qcav/bands.hpp"
#include "qcav/errors.hpp"

using namespace qcav;

namespace {

// Brute-force Fourier coefficient of the permittivity by midpoint quadrature
// over the unit cell, using only the reciprocal-basis duality relation.  No
// Bessel functions anywhere.
double epsilon_fourier_integral(const LatticeSpec& spec, int m, int n, int grid) {
    const Vec2 b1 = reciprocal_vector(1, 0);
    const Vec2 b2 = reciprocal_vector(0, 1);
    const double det = b1.x * b2.y - b1.y * b2.x;
    const double a1x = b2.y / det, a1y = -b2.x / det;
    const double a2x = -b1.y / det, a2y = b1.x / det;
    const double r2 = spec.hole_radius_ratio * spec.hole_radius_ratio;
    constexpr double two_pi = 6.283185307179586476925286766559;

    double acc = 0.0;
    for (int iu = 0; iu < grid; ++iu) {
        const double u = (iu + 0.5) / grid;
        for (int iv = 0; iv < grid; ++iv) {
            const double v = (iv + 0.5) / grid;
            double dmin = 1e9;
            for (int i = -1; i <= 1; ++i)
                for (int j = -1; j <= 1; ++j) {
                    const double x = (u - i) * a1x + (v - j) * a2x;
                    const double y = (u - i) * a1y + (v - j) * a2y;
                    dmin = std::min(dmin, x * x + y * y);
                }
            const double eps = dmin < r2 ? spec.eps_hole : spec.eps_background;
            acc += eps * std::cos(two_pi * (m * u + n * v));
        }
    }
    return acc / (static_cast<double>(grid) * static_cast<double>(grid));
}

}  // namespace

TEST_SUITE("bands") {

TEST_CASE("reciprocal basis keeps complete hexagonal shells") {
    CHECK(reciprocal_basis(7).size() == 7);
    CHECK(reciprocal_basis(18).size() == 7);
    CHECK(reciprocal_basis(19).size() == 19);
    CHECK(reciprocal_basis(36).size() == 19);
    CHECK(reciprocal_basis(37).size() == 37);
    CHECK(reciprocal_basis(271).size() == 271);
    CHECK(reciprocal_basis(300).size() == 271);
    CHECK_THROWS_AS(reciprocal_basis(6), std::invalid_argument);

    const auto basis = reciprocal_basis(271);
    std::set<std::pair<int, int>> seen(basis.begin(), basis.end());
    CHECK(seen.size() == basis.size());
    for (const auto& [m, n] : basis) CHECK(seen.count({-m, -n}) == 1);
}

TEST_CASE("reciprocal vectors form the triangular dual lattice") {
    const Vec2 b1 = reciprocal_vector(1, 0);
    const Vec2 b2 = reciprocal_vector(0, 1);
    const double l1 = std::hypot(b1.x, b1.y);
    const double l2 = std::hypot(b2.x, b2.y);
    CHECK(l1 == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(l2 == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(std::fabs(b1.x * b2.x + b1.y * b2.y) / (l1 * l2) == doctest::Approx(0.5).epsilon(1e-14));

    const Vec2 g = reciprocal_vector(2, -3);
    CHECK(g.x == doctest::Approx(2.0 * b1.x - 3.0 * b2.x).epsilon(1e-14));
    CHECK(g.y == doctest::Approx(2.0 * b1.y - 3.0 * b2.y).epsilon(1e-14));
}

TEST_CASE("filling fraction and permittivity fourier coefficients") {
    LatticeSpec spec;
    CHECK(filling_fraction(spec) == doctest::Approx(0.32648388556215924).epsilon(1e-14));

    const double f = filling_fraction(spec);
    CHECK(epsilon_fourier(spec, 0, 0)
          == doctest::Approx(f * spec.eps_hole + (1.0 - f) * spec.eps_background).epsilon(1e-13));
    // Bessel-form coefficients against the brute-force cell integral.
    for (const auto& [m, n] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, -1}}) {
        CAPTURE(m);
        CAPTURE(n);
        const double ref = epsilon_fourier_integral(spec, m, n, 600);
        CHECK(std::fabs(epsilon_fourier(spec, m, n) - ref) < 3e-3);
    }
    // Inversion symmetry of a centrosymmetric cell.
    CHECK(epsilon_fourier(spec, 1, 1) == doctest::Approx(epsilon_fourier(spec, -1, -1)).epsilon(1e-14));
}

TEST_CASE("frozen band frequencies at the zone corners") {
    LatticeSpec spec;  // eps 8.12
    const auto m_bands = te_bands(spec, k_m(), 271, 3);
    CHECK(m_bands[0] == doctest::Approx(0.22198166300300862).epsilon(1e-9));
    CHECK(m_bands[1] == doctest::Approx(0.31723393106539388).epsilon(1e-9));
    CHECK(m_bands[2] == doctest::Approx(0.42299287640906635).epsilon(1e-9));
    const auto k_bands = te_bands(spec, k_k(), 271, 3);
    CHECK(k_bands[0] == doctest::Approx(0.25076391239257073).epsilon(1e-9));
    CHECK(k_bands[1] == doctest::Approx(0.33931484603347078).epsilon(1e-9));
    CHECK(k_bands[2] == doctest::Approx(0.34010371197767136).epsilon(1e-9));

    LatticeSpec deep = spec;
    deep.eps_background = 12.11;
    const auto dm = te_bands(deep, k_m(), 271, 3);
    CHECK(dm[0] == doctest::Approx(0.18287930674931277).epsilon(1e-9));
    CHECK(dm[1] == doctest::Approx(0.27171522790670782).epsilon(1e-9));
    const auto dk = te_bands(deep, k_k(), 271, 3);
    CHECK(dk[0] == doctest::Approx(0.20603271158228179).epsilon(1e-9));
    CHECK(dk[1] == doctest::Approx(0.28813284878568141).epsilon(1e-9));
    CHECK(dk[2] == doctest::Approx(0.28876369577636768).epsilon(1e-9));

    CHECK(std::is_sorted(m_bands.begin(), m_bands.end()));
    for (const double w : m_bands) CHECK(w >= 0.0);
}

TEST_CASE("acoustic band vanishes at the zone center") {
    LatticeSpec spec;
    const auto g_bands = te_bands(spec, k_gamma(), 271, 2);
    CHECK(std::fabs(g_bands[0]) < 1e-9);
    CHECK(g_bands[1] > 0.4);
}

TEST_CASE("plane wave truncation drift stays under half a percent") {
    LatticeSpec spec;
    const auto coarse_m = te_bands(spec, k_m(), 127, 2);
    const auto fine_m = te_bands(spec, k_m(), 271, 2);
    const auto coarse_k = te_bands(spec, k_k(), 127, 2);
    const auto fine_k = te_bands(spec, k_k(), 271, 2);
    for (int b = 0; b < 2; ++b) {
        CHECK(std::fabs(coarse_m[b] - fine_m[b]) / fine_m[b] < 0.005);
        CHECK(std::fabs(coarse_k[b] - fine_k[b]) / fine_k[b] < 0.005);
    }
}

TEST_CASE("band frequencies respect the lattice point symmetry") {
    LatticeSpec spec;
    const auto m1 = te_bands(spec, k_m(), 271, 3);
    const auto m2 = te_bands(spec, Vec2{-0.5, 0.28867513459481287}, 271, 3);
    const auto k1 = te_bands(spec, k_k(), 271, 3);
    const auto k2 = te_bands(spec, Vec2{2.0 / 3.0, 0.0}, 271, 3);
    for (int b = 0; b < 3; ++b) {
        CHECK(m1[b] == doctest::Approx(m2[b]).epsilon(1e-9));
        CHECK(k1[b] == doctest::Approx(k2[b]).epsilon(1e-9));
    }
}

TEST_CASE("gap location and lattice constant calibration") {
    LatticeSpec spec;
    const auto bs = compute_band_structure(spec, 6, 271, 6);
    REQUIRE(bs.k_points.size() == 19);
    REQUIRE(bs.bands.size() == 19);
    CHECK(bs.bands.front().size() == 6);
    CHECK(bs.k_frac.front() == 0.0);
    CHECK(bs.k_frac.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::is_sorted(bs.k_frac.begin(), bs.k_frac.end()));

    const auto gap = find_gap(bs);
    REQUIRE(gap.found);
    CHECK(gap.bottom == doctest::Approx(0.25076391239257073).epsilon(1e-9));
    CHECK(gap.top == doctest::Approx(0.31723393106539388).epsilon(1e-9));
    CHECK(gap.midgap == doctest::Approx(0.28399892172898233).epsilon(1e-9));
    CHECK(gap.midgap == doctest::Approx(0.5 * (gap.bottom + gap.top)).epsilon(1e-14));

    const double a = calibrated_lattice_constant_nm(gap, 1272.0);
    CHECK(a == doctest::Approx(361.24662843926552).epsilon(1e-9));
    CHECK(a == doctest::Approx(gap.midgap * 1272.0).epsilon(1e-14));
    CHECK(wavelength_in_gap(gap, a, 1272.0));
    CHECK_FALSE(wavelength_in_gap(gap, a, a / 0.32));   // above the upper band edge
    CHECK_FALSE(wavelength_in_gap(gap, a, a / 0.24));   // below the lower band edge
}

TEST_CASE("band solver input validation") {
    LatticeSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.hole_radius_ratio = 0.6;
    CHECK_THROWS_AS(spec.validate(), std::domain_error);
    spec = LatticeSpec{};
    spec.eps_background = 0.9;
    CHECK_THROWS_AS(spec.validate(), std::domain_error);
    spec = LatticeSpec{};
    CHECK_THROWS_AS(te_bands(spec, k_m(), 271, 0), std::invalid_argument);
    CHECK_THROWS_AS(te_bands(spec, k_m(), 7, 8), std::invalid_argument);
    CHECK_THROWS_AS(compute_band_structure(spec, 0, 19, 2), std::invalid_argument);
    CHECK_THROWS_AS(find_gap(BandStructure{}), std::invalid_argument);
    GapReport none;
    CHECK_THROWS_AS(calibrated_lattice_constant_nm(none, 1272.0), degenerate_model_error);
    CHECK_FALSE(wavelength_in_gap(none, 340.0, 1272.0));
}

}
