#pragma once

#include <utility>
#include <vector>

namespace qcav {

// Triangular-lattice photonic crystal slab treated as a 2D problem with an
// effective background permittivity.
struct LatticeSpec {
    double lattice_constant_nm = 340.0;
    double hole_radius_ratio = 0.3;    // r/a
    double eps_background = 8.12;      // slab effective permittivity
    double eps_hole = 1.0;

    void validate() const;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Reciprocal vector m b1 + n b2 in units of 2 pi / a.
Vec2 reciprocal_vector(int m, int n);

// Largest complete hexagonal shell set with at most n_plane_waves vectors
// (shell s holds 3 s (s + 1) + 1 vectors).
std::vector<std::pair<int, int>> reciprocal_basis(int n_plane_waves);

// Fourier coefficient of the permittivity for the reciprocal vector (m, n);
// circular holes give the Bessel form 2 f J1(|G| r)/(|G| r).
double epsilon_fourier(const LatticeSpec& spec, int m, int n);

// Air filling fraction 2 pi (r/a)^2 / sqrt(3).
double filling_fraction(const LatticeSpec& spec);

// Lowest TE-polarized band frequencies a/lambda at Bloch vector k (units of
// 2 pi / a).  Inverse-permittivity-matrix (Ho-Chan-Soukoulis) formulation.
std::vector<double> te_bands(const LatticeSpec& spec, Vec2 k, int n_plane_waves,
                             int n_bands);

inline Vec2 k_gamma() { return {0.0, 0.0}; }
inline Vec2 k_m() { return {0.0, 0.5773502691896258}; }
inline Vec2 k_k() { return {1.0 / 3.0, 0.5773502691896258}; }

struct BandStructure {
    std::vector<Vec2> k_points;
    std::vector<double> k_frac;              // cumulative path fraction in [0, 1]
    std::vector<std::vector<double>> bands;  // [k][band], a/lambda
    int n_plane_waves = 0;
};

// Gamma-M-K-Gamma path with n_per_segment points per leg; k points are
// independent and computed in parallel.
BandStructure compute_band_structure(const LatticeSpec& spec, int n_per_segment,
                                     int n_plane_waves, int n_bands);

struct GapReport {
    bool found = false;
    double bottom = 0.0;   // max of the lower band, a/lambda
    double top = 0.0;      // min of the upper band
    double midgap = 0.0;
};

GapReport find_gap(const BandStructure& bs, int lower_band = 0, int upper_band = 1);

// Lattice constant that centers the gap on the target wavelength.
double calibrated_lattice_constant_nm(const GapReport& gap, double target_nm);

bool wavelength_in_gap(const GapReport& gap, double lattice_constant_nm,
                       double lambda_nm);

}
