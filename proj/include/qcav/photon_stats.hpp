#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qcav/emitter.hpp"

namespace qcav {

// Detector response applied after the beamsplitter: Gaussian timing jitter
// followed by a non-paralyzable dead time.
struct DetectorModel {
    double dead_time_ps = 0.0;
    double jitter_sigma_ps = 0.0;
};

// 50:50 splitter with per-photon routing; detector response applied per arm.
std::pair<PhotonStream, PhotonStream> hbt_split(const PhotonStream& s,
                                                std::uint64_t seed,
                                                const DetectorModel& det = {});

PhotonStream apply_dead_time(const PhotonStream& s, double dead_time_ps);
PhotonStream apply_jitter(const PhotonStream& s, double sigma_ps, std::uint64_t seed);

// Symmetric cross-correlation histogram.  Delays are binned to the nearest
// multiple of bin_width_ps; g2 normalizes counts by the uncorrelated
// accidental rate N_a N_b bin / T.
struct G2Histogram {
    std::uint64_t bin_width_ps = 0;
    std::vector<std::int64_t> delay_ps;   // bin centers, -max..+max
    std::vector<std::uint64_t> counts;
    std::vector<double> g2;
    double accidental_per_bin = 0.0;

    double g2_zero() const;
    // Poisson propagation of the zero-bin count (floored at one count).
    double g2_zero_sigma() const;
};

G2Histogram g2_histogram(const PhotonStream& a, const PhotonStream& b,
                         std::uint64_t bin_width_ps, std::uint64_t max_delay_ps);
// Single-threaded reference implementation; bitwise-identical results.
G2Histogram g2_histogram_serial(const PhotonStream& a, const PhotonStream& b,
                                std::uint64_t bin_width_ps, std::uint64_t max_delay_ps);

// Pulsed correlation: coincidences grouped per repetition-period peak.
// g2_zero is the center-peak area over the mean side-peak area.
struct PulsedG2 {
    double rep_period_ns = 0.0;
    std::vector<std::int32_t> peak_index;
    std::vector<std::uint64_t> peak_area;
    double g2_zero = 0.0;
    double g2_zero_sigma = 0.0;
};

PulsedG2 pulsed_g2(const PhotonStream& a, const PhotonStream& b,
                   double rep_period_ns, int n_side_peaks);

// Time since the last pulse for every tag, histogrammed over one period.
struct DecayHistogram {
    std::uint64_t bin_width_ps = 0;
    std::vector<double> t_ns;             // bin centers
    std::vector<std::uint64_t> counts;
};

DecayHistogram decay_histogram(const PhotonStream& s, double rep_period_ns,
                               std::uint64_t bin_width_ps);

// Removes uncorrelated background from a raw g2(0) given the signal fraction
// rho = S/(S+B):  g2_corr = (g2_raw - (1 - rho^2)) / rho^2.
double background_corrected_g2(double g2_raw, double signal_fraction);

}
