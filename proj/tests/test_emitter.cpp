#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "qcav/emitter.hpp"
#include "qcav/errors.hpp"

using namespace qcav;

namespace {

// Independent oracle: fixed-step RK4 on the G/S/T rate equations.  Shares no
// code with the closed-form implementation under test.
struct RateOde {
    double pump, to_ground, isc, triplet;

    explicit RateOde(const EmitterParams& p, double f)
        : pump(p.pump_rate),
          to_ground(p.radiative_rate * (f * p.debye_waller + 1.0 - p.debye_waller)
                    + p.nonradiative_rate),
          isc(p.isc_rate),
          triplet(p.triplet_decay_rate) {}

    void deriv(const double y[3], double dy[3]) const {
        dy[0] = -pump * y[0] + to_ground * y[1] + triplet * y[2];
        dy[1] = pump * y[0] - (to_ground + isc) * y[1];
        dy[2] = isc * y[1] - triplet * y[2];
    }

    void advance(double y[3], double t_end, double h) const {
        double k1[3], k2[3], k3[3], k4[3], tmp[3];
        double t = 0.0;
        while (t < t_end) {
            const double step = std::min(h, t_end - t);
            deriv(y, k1);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
            deriv(tmp, k2);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
            deriv(tmp, k3);
            for (int i = 0; i < 3; ++i) tmp[i] = y[i] + step * k3[i];
            deriv(tmp, k4);
            for (int i = 0; i < 3; ++i)
                y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t += step;
        }
    }
};

double ode_excited_at(const EmitterParams& p, double f, double tau_ns) {
    RateOde ode(p, f);
    double y[3] = {1.0, 0.0, 0.0};
    ode.advance(y, tau_ns, 0.002);
    return y[1];
}

double ode_excited_steady(const EmitterParams& p, double f) {
    RateOde ode(p, f);
    double y[3] = {1.0, 0.0, 0.0};
    ode.advance(y, 40000.0, 0.01);
    return y[1];
}

void compare_g2_to_ode(const EmitterParams& p, double f) {
    const double s_ss = ode_excited_steady(p, f);
    const G2Law law = analytic_g2_law(p, f);
    for (double tau : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 120.0, 300.0}) {
        const double expected = ode_excited_at(p, f, tau) / s_ss;
        CHECK(law(tau) == doctest::Approx(expected).epsilon(2e-6));
    }
}

}

TEST_SUITE("emitter") {

TEST_CASE("default rates reproduce the calibrated lifetimes") {
    const EmitterParams p;
    CHECK(1.0 / p.total_decay_rate(1.0) == doctest::Approx(53.6).epsilon(1e-12));
    // Enhancement only touches the ZPL share of the radiative rate.
    const double f = 48.17235430481428;
    CHECK(1.0 / p.total_decay_rate(f) == doctest::Approx(6.7).epsilon(1e-12));
    CHECK(p.zpl_fraction(1.0) == doctest::Approx(0.15).epsilon(1e-9));
    // Enhancement concentrates the branching into the ZPL: 15% -> 89%.
    CHECK(p.zpl_fraction(f) == doctest::Approx(0.8947479622694411).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    EmitterParams p;
    p.pump_rate = -1.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p = EmitterParams{};
    p.radiative_rate = 0.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p = EmitterParams{};
    p.debye_waller = 1.5;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    CHECK_NOTHROW(EmitterParams{}.validate());
}

TEST_CASE("steady state matches long-time ODE integration") {
    const EmitterParams p;
    for (double f : {1.0, 10.0, 48.17235430481428}) {
        const auto ss = steady_state_populations(p, f);
        CHECK(ss.ground + ss.excited + ss.triplet == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ss.excited == doctest::Approx(ode_excited_steady(p, f)).epsilon(1e-8));
    }
    EmitterParams hot = p;
    hot.pump_rate = 0.5;
    const auto ss = steady_state_populations(hot, 1.0);
    CHECK(ss.excited == doctest::Approx(ode_excited_steady(hot, 1.0)).epsilon(1e-8));
    // Flux balance: pumping out of G equals decay into G plus shelving drain.
    const double a = hot.total_decay_rate(1.0);
    CHECK(hot.pump_rate * ss.ground
          == doctest::Approx((a - hot.isc_rate) * ss.excited + hot.triplet_decay_rate * ss.triplet)
                 .epsilon(1e-10));
}

TEST_CASE("two-level limit when shelving is off") {
    EmitterParams p;
    p.isc_rate = 0.0;
    const auto ss = steady_state_populations(p, 1.0);
    const double a = p.total_decay_rate(1.0);
    CHECK(ss.triplet == 0.0);
    CHECK(ss.excited == doctest::Approx(p.pump_rate / (p.pump_rate + a)).epsilon(1e-12));
}

TEST_CASE("degenerate kinetics are reported") {
    EmitterParams p;
    p.triplet_decay_rate = 0.0;  // populated shelf with no way back
    // The steady state is well defined (everything ends up shelved), but a
    // cw correlation of a source that stops emitting is not.
    const auto ss = steady_state_populations(p, 1.0);
    CHECK(ss.triplet == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ss.excited == doctest::Approx(0.0));
    CHECK_THROWS_AS(analytic_g2_law(p, 1.0), degenerate_model_error);
    EmitterParams q;
    q.pump_rate = 0.0;
    CHECK_THROWS_AS(analytic_g2_law(q, 1.0), degenerate_model_error);
}

TEST_CASE("analytic g2 against the ODE oracle, overdamped") {
    const EmitterParams p;  // default: slow shelving, strongly overdamped
    compare_g2_to_ode(p, 1.0);
    compare_g2_to_ode(p, 48.17235430481428);
    EmitterParams hot = p;
    hot.pump_rate = 0.5;
    compare_g2_to_ode(hot, 20.578576802333758);
}

TEST_CASE("analytic g2 against the ODE oracle, oscillatory branch") {
    EmitterParams p;
    p.pump_rate = 1.0;
    p.radiative_rate = 0.1;
    p.nonradiative_rate = 0.0;
    p.isc_rate = 0.9;
    p.triplet_decay_rate = 1.0;
    // (pump + A + triplet)^2 < 4 (pump isc + pump triplet + A triplet)
    const G2Law law = analytic_g2_law(p, 1.0);
    CHECK(law.oscillatory);
    compare_g2_to_ode(p, 1.0);
}

TEST_CASE("analytic g2 against the ODE oracle, repeated eigenvalue") {
    EmitterParams p;
    p.pump_rate = 1.0;
    p.radiative_rate = 1.0;
    p.nonradiative_rate = 0.0;
    p.isc_rate = 1.0;
    p.triplet_decay_rate = 1.0;
    const G2Law law = analytic_g2_law(p, 1.0);
    CHECK(law.linear_term);
    compare_g2_to_ode(p, 1.0);
}

TEST_CASE("g2 limits") {
    const EmitterParams p;
    const G2Law law = analytic_g2_law(p, 1.0);
    CHECK(law(0.0) == 0.0);  // exact single-photon zero
    CHECK(law(1e7) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law(-5.0) == law(5.0));  // symmetric in the delay sign
}

TEST_CASE("cw stream obeys its own invariants") {
    const EmitterParams p;
    const auto s = simulate_cw(p, 1.0, 500000000ull, 42, 1);
    CHECK_NOTHROW(s.validate());
    CHECK(s.duration_ps == 500000000ull);
    CHECK(s.size() > 0);
    CHECK(count_channel(s, Channel::zpl) + count_channel(s, Channel::sideband) == s.size());
}

TEST_CASE("cw photon rate matches the steady state") {
    const EmitterParams p;
    const double f = 48.17235430481428;
    const std::uint64_t dur_ps = 20000000000ull;  // 20 ms
    const auto s = simulate_cw(p, f, dur_ps, 7, 4);
    const auto ss = steady_state_populations(p, f);
    const double emit_rate = ss.excited * (p.total_decay_rate(f) - p.isc_rate
                                           - p.nonradiative_rate);  // photons per ns
    const double expected = emit_rate * static_cast<double>(dur_ps) * 1e-3;
    const double n = static_cast<double>(s.size());
    CHECK(std::fabs(n - expected) < 5.0 * std::sqrt(expected));
    // ZPL share of emissions.
    const double zf = p.zpl_fraction(f);
    const double nz = static_cast<double>(count_channel(s, Channel::zpl));
    CHECK(std::fabs(nz - zf * n) < 5.0 * std::sqrt(zf * (1.0 - zf) * n));
}

TEST_CASE("cw simulation is deterministic per seed and shard count") {
    const EmitterParams p;
    const auto a = simulate_cw(p, 5.0, 200000000ull, 99, 4);
    const auto b = simulate_cw(p, 5.0, 200000000ull, 99, 4);
    CHECK(a.tags_ps == b.tags_ps);
    CHECK(a.channels == b.channels);
    const auto c = simulate_cw(p, 5.0, 200000000ull, 100, 4);
    CHECK(a.tags_ps != c.tags_ps);
}

#ifdef _OPENMP
TEST_CASE("cw sharding is independent of the thread count") {
    const EmitterParams p;
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto serial = simulate_cw(p, 5.0, 300000000ull, 11, 6);
    omp_set_num_threads(3);
    const auto parallel = simulate_cw(p, 5.0, 300000000ull, 11, 6);
    omp_set_num_threads(saved);
    CHECK(serial.tags_ps == parallel.tags_ps);
    CHECK(serial.channels == parallel.channels);
}
#endif

TEST_CASE("pulsed stream folds to an exponential of the configured lifetime") {
    const EmitterParams p;
    const double f = 48.17235430481428;  // tau = 6.7 ns
    const auto s = simulate_pulsed(p, f, 100.0, 300000, 0.9, 5);
    CHECK_NOTHROW(s.validate());
    CHECK(s.duration_ps == 300000ull * 100000ull);
    // Mean folded delay of a truncated exponential.
    const double tau = 6.7, period = 100.0;
    double sum = 0.0;
    for (const auto t : s.tags_ps) sum += static_cast<double>(t % 100000ull) * 1e-3;
    const double mean = sum / static_cast<double>(s.size());
    const double e = std::exp(-period / tau);
    const double expect = tau - period * e / (1.0 - e);
    CHECK(std::fabs(mean - expect) < 5.0 * tau / std::sqrt(static_cast<double>(s.size())));
}

TEST_CASE("pulsed emission count tracks the excitation probability") {
    const EmitterParams p;
    const auto half = simulate_pulsed(p, 1.0, 200.0, 200000, 0.45, 8);
    const auto full = simulate_pulsed(p, 1.0, 200.0, 200000, 0.9, 8);
    const double ratio = static_cast<double>(half.size()) / static_cast<double>(full.size());
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.02));
    CHECK(full.size() < 200000);
}

TEST_CASE("background merge preserves order and labels") {
    const EmitterParams p;
    const auto s = simulate_cw(p, 1.0, 1000000000ull, 3, 1);
    const auto merged = add_background(s, 2.0e6, 17);
    CHECK_NOTHROW(merged.validate());
    const auto nbg = count_channel(merged, Channel::background);
    CHECK(merged.size() == s.size() + nbg);
    const double expected = 2.0e6 * 1e-3;  // 1 ms at 2 MHz
    CHECK(std::fabs(static_cast<double>(nbg) - expected) < 5.0 * std::sqrt(expected));
    const auto again = add_background(s, 2.0e6, 17);
    CHECK(merged.tags_ps == again.tags_ps);
}

TEST_CASE("stream validation rejects malformed records") {
    PhotonStream s;
    s.duration_ps = 1000;
    s.tags_ps = {10, 10};
    s.channels = {Channel::zpl, Channel::zpl};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // not strictly increasing
    s.tags_ps = {10, 2000};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // beyond duration
    s.tags_ps = {10, 20};
    s.channels = {Channel::zpl};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // label mismatch
    s.channels = {Channel::zpl, Channel::sideband};
    CHECK_NOTHROW(s.validate());
}

}
