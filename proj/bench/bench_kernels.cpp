// Timing comparison between the OpenMP kernels and their serial references.
// Prints one line per kernel; exits nonzero if the parallel and serial
// correlators ever disagree.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qcav/bands.hpp"
#include "qcav/emitter.hpp"
#include "qcav/photon_stats.hpp"

using namespace qcav;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

PhotonStream uniform_stream(std::size_t n, std::uint64_t duration_ps, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint64_t> dist(0, duration_ps - 1);
    std::vector<std::uint64_t> t(n);
    for (auto& x : t) x = dist(gen);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    PhotonStream s;
    s.tags_ps = std::move(t);
    s.channels.assign(s.tags_ps.size(), Channel::zpl);
    s.duration_ps = duration_ps;
    return s;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: max %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif

    // Correlator: 2M tags per arm, 100 ps bins, +-100 ns window.
    const auto a = uniform_stream(2'000'000, 20'000'000'000ULL, 11);
    const auto b = uniform_stream(2'000'000, 20'000'000'000ULL, 12);

    double t0 = now_s();
    const auto hp = g2_histogram(a, b, 100, 100'000);
    const double t_par = now_s() - t0;
    t0 = now_s();
    const auto hs = g2_histogram_serial(a, b, 100, 100'000);
    const double t_ser = now_s() - t0;

    std::uint64_t pairs = 0;
    for (const auto c : hp.counts) pairs += c;
    std::printf("correlator: %zu x %zu tags, %llu pairs | parallel %.3f s, serial %.3f s, "
                "speedup %.2fx\n",
                a.size(), b.size(), static_cast<unsigned long long>(pairs), t_par, t_ser,
                t_ser / t_par);
    if (hp.counts != hs.counts || hp.g2 != hs.g2) {
        std::printf("correlator: MISMATCH between parallel and serial results\n");
        return 1;
    }

    // CW Gillespie source: sharded parallel stream generation.
    const EmitterParams p;
    t0 = now_s();
    const auto s4 = simulate_cw(p, 10.0, 2'000'000'000ULL, 21, 64);
    const double t_shards = now_s() - t0;
    t0 = now_s();
    const auto s1 = simulate_cw(p, 10.0, 2'000'000'000ULL, 21, 1);
    const double t_single = now_s() - t0;
    std::printf("cw source: %zu tags sharded %.3f s, %zu tags single shard %.3f s\n", s4.size(),
                t_shards, s1.size(), t_single);

    // Band structure: k points run in an OpenMP loop.
    LatticeSpec spec;
    t0 = now_s();
    const auto bs = compute_band_structure(spec, 8, 271, 6);
    std::printf("bands: %zu k-points at %d plane waves in %.3f s\n", bs.k_points.size(),
                bs.n_plane_waves, now_s() - t0);
    return 0;
}
