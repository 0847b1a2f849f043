#pragma once

#include "qcav/emitter.hpp"
#include "qcav/units.hpp"

namespace qcav {

struct CavityParams {
    double resonance_nm = 1272.0;
    double quality_factor = 3209.0;
    double mode_volume = 0.66;        // in (lambda/n)^3
    double refractive_index = 3.48;
    double peak_enhancement = 0.0;    // on-resonance lifetime enhancement F0
    double axis_angle_deg = 90.0;

    void validate() const;
};

// Purcell factor from measured lifetimes with the ZPL branching fraction eta:
// Fp = (tau_bulk/tau_on - tau_bulk/tau_off) / eta.
double purcell_from_lifetimes(Lifetime tau_bulk, Lifetime tau_on, Lifetime tau_off,
                              double eta);

// Fraction of decay routed through the cavity-coupled channel,
// beta = (1/tau_on) / (1/tau_on + 1/tau_off).
double beta_factor(Lifetime tau_on, Lifetime tau_off);

// Lorentzian spectral filter on the peak enhancement:
// F(delta) = F0 / (1 + (2 Q delta / lambda)^2).
double enhancement_vs_detuning(const CavityParams& c, double detuning_nm);

// Upper bound 3 Q / (4 pi^2 V) for an ideally placed and aligned dipole.
double ideal_purcell(const CavityParams& c);

// Fano lineshape R = C + A (q + Omega)^2 / (1 + Omega^2), Omega = 2(x - x0)/w.
// The spectral axis is whatever unit x0/width are declared in (nm by default).
enum class SpectralAxis { wavelength_nm, frequency_thz };

struct FanoParams {
    double center = 0.0;       // x0
    double width = 1.0;        // w (FWHM-like scale)
    double asymmetry = 0.0;    // q
    double amplitude = 1.0;    // A
    double baseline = 0.0;     // C
    SpectralAxis axis = SpectralAxis::wavelength_nm;

    double quality_factor() const;  // |x0| / w
};

double fano_reflectivity(const FanoParams& f, double x);

// Polarization response of a linear dipole analyzed at angle theta:
// I(theta) = I0 * (1 - v + v cos^2(theta - theta0)).
double dipole_intensity(double theta_deg, double theta0_deg, double visibility,
                        double i0);

// Gas-condensation spectral tuning.  Each cycle moves the resonance toward the
// saturation wavelength: gap' = gap * exp(-s / gap), which keeps the shift close
// to s per cycle while far from saturation and composes associatively.
struct TuningState {
    double lambda_nm = 1269.0;
    double shift_per_cycle_nm = 0.5;
    double lambda_saturation_nm = 1275.0;
    int cycles_applied = 0;
};

TuningState apply_tuning_cycles(TuningState t, int n_cycles);

// Peak enhancement that reproduces a target on-resonance lifetime for the
// given emitter, inverting tau_on = 1 / Gamma_tot(F0).
double calibrate_peak_enhancement(const EmitterParams& p, double tau_on_ns);

}
