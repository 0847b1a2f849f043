#include <doctest.h>

#include <cmath>
#include <random>

#include "qcav/cavity.hpp"

using namespace qcav;

TEST_SUITE("cavity") {

TEST_CASE("purcell factor from the measured lifetimes") {
    const double fp = purcell_from_lifetimes(Lifetime(33.3), Lifetime(6.7), Lifetime(53.6), 0.15);
    CHECK(fp == doctest::Approx(28.992537313432834).epsilon(1e-14));
    CHECK_THROWS_AS(purcell_from_lifetimes(Lifetime(33.3), Lifetime(6.7), Lifetime(53.6), 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(purcell_from_lifetimes(Lifetime(33.3), Lifetime(6.7), Lifetime(53.6), 1.2),
                    std::domain_error);
}

TEST_CASE("beta factor value and exact complement") {
    CHECK(beta_factor(Lifetime(6.7), Lifetime(53.6))
          == doctest::Approx(0.8888888888888888).epsilon(1e-15));
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> dist(0.1, 400.0);
    for (int i = 0; i < 200; ++i) {
        const double a = dist(gen), b = dist(gen);
        const double sum = beta_factor(Lifetime(a), Lifetime(b)) + beta_factor(Lifetime(b), Lifetime(a));
        CHECK(sum == 1.0);  // bitwise, not approximately
    }
}

TEST_CASE("lorentzian enhancement filter") {
    CavityParams c;
    c.resonance_nm = 1275.0;
    c.quality_factor = 3209.0;
    c.peak_enhancement = 30.0;
    CHECK(enhancement_vs_detuning(c, 0.0) == 30.0);
    CHECK(enhancement_vs_detuning(c, 0.23)
          == doctest::Approx(12.818316433581012).epsilon(1e-14));
    CHECK(enhancement_vs_detuning(c, -0.23) == enhancement_vs_detuning(c, 0.23));
    // Half maximum at delta = lambda / (2 Q).
    const double half_delta = c.resonance_nm / (2.0 * c.quality_factor);
    CHECK(enhancement_vs_detuning(c, half_delta) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("ideal purcell figure of merit") {
    CavityParams c;
    c.quality_factor = 3209.0;
    c.mode_volume = 0.66;
    CHECK(ideal_purcell(c) == doctest::Approx(369.47690716847944).epsilon(1e-14));
    c.quality_factor = 6000.0;
    CHECK(ideal_purcell(c) == doctest::Approx(690.8262521068484).epsilon(1e-14));
}

TEST_CASE("fano lineshape limits") {
    FanoParams f;
    f.center = 1272.0;
    f.width = 0.4;
    f.asymmetry = 1.5;
    f.amplitude = 0.8;
    f.baseline = 0.2;
    // At the dip Omega = -q the response falls to the baseline.
    const double dip_x = f.center - 0.5 * f.width * f.asymmetry;
    CHECK(fano_reflectivity(f, dip_x) == doctest::Approx(f.baseline).epsilon(1e-12));
    // Far wings approach baseline + amplitude (tail decays like 2q/Omega).
    CHECK(fano_reflectivity(f, f.center + 1e5)
          == doctest::Approx(f.baseline + f.amplitude).epsilon(1e-4));
    // Peak sits at Omega = 1/q.
    const double peak_x = f.center + 0.5 * f.width / f.asymmetry;
    const double peak = fano_reflectivity(f, peak_x);
    CHECK(peak == doctest::Approx(f.baseline + f.amplitude * (1.0 + f.asymmetry * f.asymmetry))
                      .epsilon(1e-12));
    CHECK(peak > fano_reflectivity(f, peak_x + 0.01));
    CHECK(peak > fano_reflectivity(f, peak_x - 0.01));
    CHECK(f.quality_factor() == doctest::Approx(1272.0 / 0.4));
}

TEST_CASE("dipole polarization response") {
    CHECK(dipole_intensity(90.0, 90.0, 0.9, 100.0) == doctest::Approx(100.0));
    CHECK(dipole_intensity(0.0, 90.0, 0.9, 100.0) == doctest::Approx(10.0));
    CHECK(dipole_intensity(180.0, 90.0, 0.9, 100.0) == doctest::Approx(10.0));
    // Half visibility point at 45 degrees off axis.
    CHECK(dipole_intensity(45.0, 90.0, 0.9, 100.0) == doctest::Approx(55.0));
    // v = 0 is flat.
    CHECK(dipole_intensity(17.0, 90.0, 0.0, 42.0) == doctest::Approx(42.0));
}

TEST_CASE("gas tuning approaches saturation monotonically") {
    TuningState t;
    double prev = t.lambda_nm;
    for (int i = 0; i < 60; ++i) {
        t = apply_tuning_cycles(t, 1);
        if (i < 12) CHECK(t.lambda_nm > prev);  // strictly moving while far from saturation
        CHECK(t.lambda_nm >= prev);
        CHECK(t.lambda_nm <= t.lambda_saturation_nm);
        prev = t.lambda_nm;
    }
    CHECK(t.cycles_applied == 60);
    // The gap underflows to zero well before 60 cycles.
    CHECK(t.lambda_nm == t.lambda_saturation_nm);
    // Batch application equals repeated single cycles.
    TuningState u;
    u = apply_tuning_cycles(u, 60);
    CHECK(u.lambda_nm == t.lambda_nm);
}

TEST_CASE("tuning matches the closed-form gap recurrence") {
    TuningState t;
    double gap = t.lambda_saturation_nm - t.lambda_nm;
    const double s = t.shift_per_cycle_nm;
    for (int i = 0; i < 10; ++i) gap *= std::exp(-s / gap);
    const auto after = apply_tuning_cycles(t, 10);
    CHECK(after.lambda_nm == doctest::Approx(t.lambda_saturation_nm - gap).epsilon(1e-12));
    // Early cycles shift by roughly the nominal step.
    const auto one = apply_tuning_cycles(t, 1);
    CHECK(one.lambda_nm - t.lambda_nm == doctest::Approx(s).epsilon(0.05));
}

TEST_CASE("peak enhancement calibration inverts the lifetime") {
    const EmitterParams p;
    const double f0 = calibrate_peak_enhancement(p, 6.7);
    CHECK(f0 == doctest::Approx(48.17235430481428).epsilon(1e-14));
    CHECK(1.0 / p.total_decay_rate(f0) == doctest::Approx(6.7).epsilon(1e-12));
    CHECK(calibrate_peak_enhancement(p, 53.6) == doctest::Approx(1.0).epsilon(1e-10));
    // Lifetimes longer than any physical decay cannot be matched.
    CHECK_THROWS_AS(calibrate_peak_enhancement(p, 1e7), std::domain_error);
}

TEST_CASE("cavity parameter validation") {
    CavityParams c;
    c.peak_enhancement = 30.0;
    CHECK_NOTHROW(c.validate());
    c.quality_factor = 0.0;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
    c = CavityParams{};
    c.mode_volume = -0.1;
    CHECK_THROWS_AS(c.validate(), std::domain_error);
}

}
