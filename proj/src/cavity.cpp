#include "qcav/cavity.hpp"

#include <cmath>
#include <stdexcept>

namespace qcav {

void CavityParams::validate() const {
    if (!(resonance_nm > 0.0)) throw std::domain_error("CavityParams: resonance_nm must be > 0");
    if (!(quality_factor > 0.0)) throw std::domain_error("CavityParams: quality_factor must be > 0");
    if (!(mode_volume > 0.0)) throw std::domain_error("CavityParams: mode_volume must be > 0");
    if (!(refractive_index >= 1.0)) throw std::domain_error("CavityParams: refractive_index must be >= 1");
    if (!(peak_enhancement >= 0.0)) throw std::domain_error("CavityParams: peak_enhancement must be >= 0");
    if (!std::isfinite(axis_angle_deg)) throw std::domain_error("CavityParams: axis_angle_deg must be finite");
}

double purcell_from_lifetimes(Lifetime tau_bulk, Lifetime tau_on, Lifetime tau_off,
                              double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::domain_error("purcell_from_lifetimes: eta must be in (0, 1]");
    return (tau_bulk.ns() / tau_on.ns() - tau_bulk.ns() / tau_off.ns()) / eta;
}

double beta_factor(Lifetime tau_on, Lifetime tau_off) {
    // beta = tau_off / (tau_on + tau_off); the complement form keeps
    // beta(a, b) + beta(b, a) == 1 exactly in floating point.
    const double s = tau_on.ns() + tau_off.ns();
    if (tau_off.ns() > tau_on.ns()) return 1.0 - tau_on.ns() / s;
    return tau_off.ns() / s;
}

double enhancement_vs_detuning(const CavityParams& c, double detuning_nm) {
    c.validate();
    const double x = 2.0 * c.quality_factor * detuning_nm / c.resonance_nm;
    return c.peak_enhancement / (1.0 + x * x);
}

double ideal_purcell(const CavityParams& c) {
    c.validate();
    constexpr double pi = 3.14159265358979323846;
    return 3.0 * c.quality_factor / (4.0 * pi * pi * c.mode_volume);
}

double FanoParams::quality_factor() const {
    if (!(width > 0.0)) throw std::domain_error("FanoParams: width must be > 0");
    return std::fabs(center) / width;
}

double fano_reflectivity(const FanoParams& f, double x) {
    if (!(f.width > 0.0)) throw std::domain_error("fano_reflectivity: width must be > 0");
    const double omega = 2.0 * (x - f.center) / f.width;
    const double num = f.asymmetry + omega;
    return f.baseline + f.amplitude * num * num / (1.0 + omega * omega);
}

double dipole_intensity(double theta_deg, double theta0_deg, double visibility,
                        double i0) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::domain_error("dipole_intensity: visibility must be in [0, 1]");
    constexpr double deg = 3.14159265358979323846 / 180.0;
    const double c = std::cos((theta_deg - theta0_deg) * deg);
    return i0 * (1.0 - visibility + visibility * c * c);
}

TuningState apply_tuning_cycles(TuningState t, int n_cycles) {
    if (n_cycles < 0) throw std::domain_error("apply_tuning_cycles: n_cycles must be >= 0");
    if (!(t.shift_per_cycle_nm >= 0.0))
        throw std::domain_error("apply_tuning_cycles: shift_per_cycle_nm must be >= 0");
    if (t.lambda_nm > t.lambda_saturation_nm)
        throw std::domain_error("apply_tuning_cycles: resonance beyond saturation wavelength");
    for (int i = 0; i < n_cycles; ++i) {
        const double gap = t.lambda_saturation_nm - t.lambda_nm;
        if (gap <= 0.0) break;
        const double next_gap = gap * std::exp(-t.shift_per_cycle_nm / gap);
        t.lambda_nm = t.lambda_saturation_nm - next_gap;
    }
    t.cycles_applied += n_cycles;
    return t;
}

double calibrate_peak_enhancement(const EmitterParams& p, double tau_on_ns) {
    p.validate();
    if (!(tau_on_ns > 0.0))
        throw std::domain_error("calibrate_peak_enhancement: tau_on_ns must be > 0");
    const double gamma_on = 1.0 / tau_on_ns;
    const double f0 = ((gamma_on - p.nonradiative_rate - p.isc_rate) / p.radiative_rate
                       - (1.0 - p.debye_waller)) / p.debye_waller;
    if (!(f0 > 0.0))
        throw std::domain_error("calibrate_peak_enhancement: target lifetime exceeds the uncoupled lifetime");
    return f0;
}

}
