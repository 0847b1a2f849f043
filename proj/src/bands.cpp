#include "qcav/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qcav/errors.hpp"
#include "qcav/linalg.hpp"

namespace qcav {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kTwoPi = 6.283185307179586476925286766559;

}

void LatticeSpec::validate() const {
    if (!(lattice_constant_nm > 0.0))
        throw std::domain_error("LatticeSpec: lattice_constant_nm must be > 0");
    if (!(hole_radius_ratio >= 0.0 && hole_radius_ratio < 0.5))
        throw std::domain_error("LatticeSpec: hole_radius_ratio must be in [0, 0.5)");
    if (!(eps_hole >= 1.0))
        throw std::domain_error("LatticeSpec: eps_hole must be >= 1");
    if (!(eps_background > eps_hole))
        throw std::domain_error("LatticeSpec: eps_background must exceed eps_hole");
}

Vec2 reciprocal_vector(int m, int n) {
    return {static_cast<double>(m),
            (-static_cast<double>(m) + 2.0 * static_cast<double>(n)) / kSqrt3};
}

std::vector<std::pair<int, int>> reciprocal_basis(int n_plane_waves) {
    if (n_plane_waves < 7)
        throw std::invalid_argument("reciprocal_basis: need at least 7 plane waves");
    int shell = 1;
    while (3 * (shell + 1) * (shell + 2) + 1 <= n_plane_waves) ++shell;
    std::vector<std::pair<int, int>> basis;
    basis.reserve(static_cast<std::size_t>(3 * shell * (shell + 1) + 1));
    for (int m = -shell; m <= shell; ++m)
        for (int n = -shell; n <= shell; ++n)
            if (std::abs(m + n) <= shell) basis.emplace_back(m, n);
    return basis;
}

double filling_fraction(const LatticeSpec& spec) {
    return kTwoPi * spec.hole_radius_ratio * spec.hole_radius_ratio / kSqrt3;
}

double epsilon_fourier(const LatticeSpec& spec, int m, int n) {
    spec.validate();
    const double f = filling_fraction(spec);
    if (m == 0 && n == 0)
        return f * spec.eps_hole + (1.0 - f) * spec.eps_background;
    if (spec.hole_radius_ratio == 0.0) return 0.0;
    const Vec2 g = reciprocal_vector(m, n);
    const double gr = kTwoPi * std::hypot(g.x, g.y) * spec.hole_radius_ratio;
    return (spec.eps_hole - spec.eps_background) * 2.0 * f * std::cyl_bessel_j(1, gr) / gr;
}

std::vector<double> te_bands(const LatticeSpec& spec, Vec2 k, int n_plane_waves,
                             int n_bands) {
    spec.validate();
    const auto basis = reciprocal_basis(n_plane_waves);
    const int n = static_cast<int>(basis.size());
    if (n_bands < 1 || n_bands > n)
        throw std::invalid_argument("te_bands: n_bands out of range");

    // Fourier coefficients depend only on the index difference; tabulate once.
    int shell = 0;
    for (const auto& [m, gn] : basis) shell = std::max({shell, std::abs(m), std::abs(gn)});
    const int span = 4 * shell + 1;
    std::vector<double> table(static_cast<std::size_t>(span) * span);
    for (int dm = -2 * shell; dm <= 2 * shell; ++dm)
        for (int dn = -2 * shell; dn <= 2 * shell; ++dn)
            table[static_cast<std::size_t>(dm + 2 * shell) * span + (dn + 2 * shell)] =
                epsilon_fourier(spec, dm, dn);

    std::vector<double> eps(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int dm = basis[i].first - basis[j].first;
            const int dn = basis[i].second - basis[j].second;
            eps[static_cast<std::size_t>(i) * n + j] =
                table[static_cast<std::size_t>(dm + 2 * shell) * span + (dn + 2 * shell)];
        }
    if (!invert_spd(eps.data(), n))
        throw degenerate_model_error(
            "te_bands: permittivity matrix not positive definite; increase the plane-wave count");

    std::vector<Vec2> kg(basis.size());
    for (int i = 0; i < n; ++i) {
        const Vec2 g = reciprocal_vector(basis[i].first, basis[i].second);
        kg[static_cast<std::size_t>(i)] = {k.x + g.x, k.y + g.y};
    }
    std::vector<double> mat(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double dot = kg[i].x * kg[j].x + kg[i].y * kg[j].y;
            mat[static_cast<std::size_t>(i) * n + j] = eps[static_cast<std::size_t>(i) * n + j] * dot;
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = 0.5 * (mat[static_cast<std::size_t>(i) * n + j]
                                    + mat[static_cast<std::size_t>(j) * n + i]);
            mat[static_cast<std::size_t>(i) * n + j] = s;
            mat[static_cast<std::size_t>(j) * n + i] = s;
        }

    auto ev = jacobi_eigenvalues(std::move(mat), n);
    std::vector<double> out(static_cast<std::size_t>(n_bands));
    for (int b = 0; b < n_bands; ++b) out[static_cast<std::size_t>(b)] = std::sqrt(std::max(ev[static_cast<std::size_t>(b)], 0.0));
    return out;
}

BandStructure compute_band_structure(const LatticeSpec& spec, int n_per_segment,
                                     int n_plane_waves, int n_bands) {
    if (n_per_segment < 1)
        throw std::invalid_argument("compute_band_structure: n_per_segment must be >= 1");
    const Vec2 corners[4] = {k_gamma(), k_m(), k_k(), k_gamma()};

    BandStructure bs;
    bs.n_plane_waves = static_cast<int>(reciprocal_basis(n_plane_waves).size());
    for (int seg = 0; seg < 3; ++seg) {
        for (int i = 0; i < n_per_segment; ++i) {
            const double t = static_cast<double>(i) / n_per_segment;
            bs.k_points.push_back({corners[seg].x + t * (corners[seg + 1].x - corners[seg].x),
                                   corners[seg].y + t * (corners[seg + 1].y - corners[seg].y)});
        }
    }
    bs.k_points.push_back(corners[3]);

    bs.k_frac.resize(bs.k_points.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 1; i < bs.k_points.size(); ++i) {
        total += std::hypot(bs.k_points[i].x - bs.k_points[i - 1].x,
                            bs.k_points[i].y - bs.k_points[i - 1].y);
        bs.k_frac[i] = total;
    }
    if (total > 0.0)
        for (auto& f : bs.k_frac) f /= total;

    bs.bands.resize(bs.k_points.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(bs.k_points.size()); ++i)
        bs.bands[static_cast<std::size_t>(i)] =
            te_bands(spec, bs.k_points[static_cast<std::size_t>(i)], n_plane_waves, n_bands);
    return bs;
}

GapReport find_gap(const BandStructure& bs, int lower_band, int upper_band) {
    if (bs.bands.empty()) throw std::invalid_argument("find_gap: empty band structure");
    const auto lo = static_cast<std::size_t>(lower_band);
    const auto hi = static_cast<std::size_t>(upper_band);
    GapReport gap;
    gap.bottom = 0.0;
    gap.top = std::numeric_limits<double>::max();
    for (const auto& b : bs.bands) {
        if (hi >= b.size()) throw std::invalid_argument("find_gap: band index out of range");
        gap.bottom = std::max(gap.bottom, b[lo]);
        gap.top = std::min(gap.top, b[hi]);
    }
    gap.found = gap.top > gap.bottom;
    gap.midgap = 0.5 * (gap.bottom + gap.top);
    return gap;
}

double calibrated_lattice_constant_nm(const GapReport& gap, double target_nm) {
    if (!gap.found) throw degenerate_model_error("calibrated_lattice_constant_nm: no gap found");
    if (!(target_nm > 0.0))
        throw std::domain_error("calibrated_lattice_constant_nm: target wavelength must be > 0");
    return gap.midgap * target_nm;
}

bool wavelength_in_gap(const GapReport& gap, double lattice_constant_nm,
                       double lambda_nm) {
    if (!(lattice_constant_nm > 0.0) || !(lambda_nm > 0.0))
        throw std::domain_error("wavelength_in_gap: lengths must be > 0");
    if (!gap.found) return false;
    const double u = lattice_constant_nm / lambda_nm;
    return u > gap.bottom && u < gap.top;
}

}
