#include "qcav/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcav/rng.hpp"

namespace qcav {

namespace {

// Nearest-multiple bin index of a signed delay; symmetric about zero.
inline std::int64_t delay_bin(std::int64_t d, std::int64_t bin) {
    if (d >= 0) return (d + bin / 2) / bin;
    return -((-d + bin / 2) / bin);
}

void check_pair(const PhotonStream& a, const PhotonStream& b) {
    a.validate();
    b.validate();
    if (a.duration_ps != b.duration_ps)
        throw std::invalid_argument("g2_histogram: streams have different durations");
}

void correlate_range(const std::vector<std::uint64_t>& a,
                     const std::vector<std::uint64_t>& b,
                     std::size_t i_begin, std::size_t i_end,
                     std::int64_t bin, std::int64_t n_side,
                     std::vector<std::uint64_t>& hist) {
    const std::int64_t window = (n_side + 1) * bin;
    std::size_t lo = 0;
    for (std::size_t i = i_begin; i < i_end; ++i) {
        const auto t = static_cast<std::int64_t>(a[i]);
        while (lo < b.size() && static_cast<std::int64_t>(b[lo]) < t - window) ++lo;
        for (std::size_t j = lo; j < b.size(); ++j) {
            const auto u = static_cast<std::int64_t>(b[j]);
            if (u > t + window) break;
            const std::int64_t idx = delay_bin(u - t, bin);
            if (idx >= -n_side && idx <= n_side)
                ++hist[static_cast<std::size_t>(idx + n_side)];
        }
    }
}

G2Histogram assemble_g2(const PhotonStream& a, const PhotonStream& b,
                        std::uint64_t bin_width_ps, std::uint64_t max_delay_ps,
                        std::vector<std::uint64_t> counts) {
    const auto bin = static_cast<std::int64_t>(bin_width_ps);
    const auto n_side = static_cast<std::int64_t>(max_delay_ps / bin_width_ps);
    G2Histogram h;
    h.bin_width_ps = bin_width_ps;
    h.counts = std::move(counts);
    h.delay_ps.resize(h.counts.size());
    for (std::int64_t k = -n_side; k <= n_side; ++k)
        h.delay_ps[static_cast<std::size_t>(k + n_side)] = k * bin;
    if (a.duration_ps > 0) {
        h.accidental_per_bin = static_cast<double>(a.size()) * static_cast<double>(b.size())
                             * static_cast<double>(bin_width_ps)
                             / static_cast<double>(a.duration_ps);
    }
    h.g2.resize(h.counts.size(), 0.0);
    if (h.accidental_per_bin > 0.0)
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            h.g2[i] = static_cast<double>(h.counts[i]) / h.accidental_per_bin;
    return h;
}

}

double G2Histogram::g2_zero() const {
    return g2.empty() ? 0.0 : g2[g2.size() / 2];
}

double G2Histogram::g2_zero_sigma() const {
    if (counts.empty() || accidental_per_bin <= 0.0) return 0.0;
    const double n = std::max<double>(static_cast<double>(counts[counts.size() / 2]), 1.0);
    return std::sqrt(n) / accidental_per_bin;
}

G2Histogram g2_histogram_serial(const PhotonStream& a, const PhotonStream& b,
                                std::uint64_t bin_width_ps, std::uint64_t max_delay_ps) {
    if (bin_width_ps == 0) throw std::invalid_argument("g2_histogram: bin width must be > 0");
    check_pair(a, b);
    const auto n_side = static_cast<std::int64_t>(max_delay_ps / bin_width_ps);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(2 * n_side + 1), 0);
    correlate_range(a.tags_ps, b.tags_ps, 0, a.size(),
                    static_cast<std::int64_t>(bin_width_ps), n_side, counts);
    return assemble_g2(a, b, bin_width_ps, max_delay_ps, std::move(counts));
}

G2Histogram g2_histogram(const PhotonStream& a, const PhotonStream& b,
                         std::uint64_t bin_width_ps, std::uint64_t max_delay_ps) {
    if (bin_width_ps == 0) throw std::invalid_argument("g2_histogram: bin width must be > 0");
    check_pair(a, b);
    const auto n_side = static_cast<std::int64_t>(max_delay_ps / bin_width_ps);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(2 * n_side + 1), 0);

#pragma omp parallel
    {
        std::vector<std::uint64_t> local(counts.size(), 0);
#pragma omp for schedule(static) nowait
        for (long long chunk = 0; chunk < 64; ++chunk) {
            const std::size_t begin = a.size() * static_cast<std::size_t>(chunk) / 64;
            const std::size_t end = a.size() * static_cast<std::size_t>(chunk + 1) / 64;
            correlate_range(a.tags_ps, b.tags_ps, begin, end,
                            static_cast<std::int64_t>(bin_width_ps), n_side, local);
        }
#pragma omp critical
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += local[i];
    }
    return assemble_g2(a, b, bin_width_ps, max_delay_ps, std::move(counts));
}

std::pair<PhotonStream, PhotonStream> hbt_split(const PhotonStream& s,
                                                std::uint64_t seed,
                                                const DetectorModel& det) {
    s.validate();
    if (!(det.dead_time_ps >= 0.0) || !(det.jitter_sigma_ps >= 0.0))
        throw std::domain_error("hbt_split: detector parameters must be >= 0");
    Rng rng(seed);
    PhotonStream arm_a, arm_b;
    arm_a.duration_ps = arm_b.duration_ps = s.duration_ps;
    arm_a.seed = arm_b.seed = seed;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto& arm = rng.bernoulli(0.5) ? arm_a : arm_b;
        arm.tags_ps.push_back(s.tags_ps[i]);
        arm.channels.push_back(s.channels[i]);
    }
    auto finish = [&](PhotonStream& arm, std::uint64_t jitter_seed) {
        if (det.jitter_sigma_ps > 0.0)
            arm = apply_jitter(arm, det.jitter_sigma_ps, jitter_seed);
        if (det.dead_time_ps > 0.0)
            arm = apply_dead_time(arm, det.dead_time_ps);
    };
    finish(arm_a, mix_seed(seed, 1));
    finish(arm_b, mix_seed(seed, 2));
    return {std::move(arm_a), std::move(arm_b)};
}

PhotonStream apply_dead_time(const PhotonStream& s, double dead_time_ps) {
    if (!(dead_time_ps >= 0.0)) throw std::domain_error("apply_dead_time: dead time must be >= 0");
    PhotonStream out;
    out.duration_ps = s.duration_ps;
    out.seed = s.seed;
    const auto dead = static_cast<std::uint64_t>(dead_time_ps);
    bool have_last = false;
    std::uint64_t last = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (have_last && s.tags_ps[i] - last < dead) continue;
        out.tags_ps.push_back(s.tags_ps[i]);
        out.channels.push_back(s.channels[i]);
        last = s.tags_ps[i];
        have_last = true;
    }
    return out;
}

PhotonStream apply_jitter(const PhotonStream& s, double sigma_ps, std::uint64_t seed) {
    if (!(sigma_ps >= 0.0)) throw std::domain_error("apply_jitter: sigma must be >= 0");
    Rng rng(seed);
    std::vector<std::pair<std::int64_t, Channel>> rec;
    rec.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = static_cast<double>(s.tags_ps[i]) + sigma_ps * rng.gaussian();
        rec.emplace_back(static_cast<std::int64_t>(std::llround(t)), s.channels[i]);
    }
    std::stable_sort(rec.begin(), rec.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    PhotonStream out;
    out.duration_ps = s.duration_ps;
    out.seed = s.seed;
    for (const auto& [t, c] : rec) {
        if (t < 0) continue;
        auto tag = static_cast<std::uint64_t>(t);
        if (!out.tags_ps.empty() && tag <= out.tags_ps.back()) tag = out.tags_ps.back() + 1;
        if (tag >= out.duration_ps) continue;
        out.tags_ps.push_back(tag);
        out.channels.push_back(c);
    }
    return out;
}

PulsedG2 pulsed_g2(const PhotonStream& a, const PhotonStream& b,
                   double rep_period_ns, int n_side_peaks) {
    if (!(rep_period_ns > 0.0)) throw std::invalid_argument("pulsed_g2: rep period must be > 0");
    if (n_side_peaks < 2)
        throw std::invalid_argument("pulsed_g2: need at least two side peaks per side");
    check_pair(a, b);
    const auto period = static_cast<std::int64_t>(std::llround(rep_period_ns * 1000.0));
    const auto k_max = static_cast<std::int64_t>(n_side_peaks);
    std::vector<std::uint64_t> area(static_cast<std::size_t>(2 * k_max + 1), 0);
    correlate_range(a.tags_ps, b.tags_ps, 0, a.size(), period, k_max, area);

    PulsedG2 out;
    out.rep_period_ns = rep_period_ns;
    out.peak_area = std::move(area);
    out.peak_index.resize(out.peak_area.size());
    for (std::int64_t k = -k_max; k <= k_max; ++k)
        out.peak_index[static_cast<std::size_t>(k + k_max)] = static_cast<std::int32_t>(k);

    const std::size_t center = out.peak_area.size() / 2;
    double side_sum = 0.0;
    for (std::size_t i = 0; i < out.peak_area.size(); ++i)
        if (i != center) side_sum += static_cast<double>(out.peak_area[i]);
    if (side_sum > 0.0) {
        const double side_mean = side_sum / static_cast<double>(2 * k_max);
        const double n0 = static_cast<double>(out.peak_area[center]);
        out.g2_zero = n0 / side_mean;
        out.g2_zero_sigma = (out.g2_zero > 0.0 ? out.g2_zero : 1.0 / side_mean)
                          * std::sqrt(1.0 / std::max(n0, 1.0) + 1.0 / side_sum);
    }
    return out;
}

DecayHistogram decay_histogram(const PhotonStream& s, double rep_period_ns,
                               std::uint64_t bin_width_ps) {
    if (!(rep_period_ns > 0.0)) throw std::invalid_argument("decay_histogram: rep period must be > 0");
    if (bin_width_ps == 0) throw std::invalid_argument("decay_histogram: bin width must be > 0");
    s.validate();
    const auto period = static_cast<std::uint64_t>(std::llround(rep_period_ns * 1000.0));
    const std::size_t n_bins = static_cast<std::size_t>(period / bin_width_ps);
    if (n_bins == 0) throw std::invalid_argument("decay_histogram: bin wider than period");

    DecayHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.counts.assign(n_bins, 0);
    h.t_ns.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        h.t_ns[i] = (static_cast<double>(i) + 0.5) * static_cast<double>(bin_width_ps) * 1e-3;
    for (const auto tag : s.tags_ps) {
        const std::size_t b = static_cast<std::size_t>((tag % period) / bin_width_ps);
        if (b < n_bins) ++h.counts[b];
    }
    return h;
}

double background_corrected_g2(double g2_raw, double signal_fraction) {
    if (!(signal_fraction > 0.0 && signal_fraction <= 1.0))
        throw std::domain_error("background_corrected_g2: signal fraction must be in (0, 1]");
    const double rho2 = signal_fraction * signal_fraction;
    return (g2_raw - (1.0 - rho2)) / rho2;
}

}
