#pragma once

#include <stdexcept>

namespace qcav {

// hc in meV*nm (CODATA value of 1239.84198 eV*nm).
inline constexpr double kHcMevNm = 1239841.98;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

class PhotonEnergy {
public:
    explicit PhotonEnergy(double mev) : mev_(mev) {
        if (!(mev > 0.0)) throw std::domain_error("PhotonEnergy: value must be positive");
    }
    double mev() const { return mev_; }

private:
    double mev_;
};

class Wavelength {
public:
    explicit Wavelength(double nm) : nm_(nm) {
        if (!(nm > 0.0)) throw std::domain_error("Wavelength: value must be positive");
    }
    double nm() const { return nm_; }

private:
    double nm_;
};

class Linewidth {
public:
    explicit Linewidth(double ghz) : ghz_(ghz) {
        if (!(ghz > 0.0)) throw std::domain_error("Linewidth: value must be positive");
    }
    double ghz() const { return ghz_; }

private:
    double ghz_;
};

class Lifetime {
public:
    explicit Lifetime(double ns) : ns_(ns) {
        if (!(ns > 0.0)) throw std::domain_error("Lifetime: value must be positive");
    }
    double ns() const { return ns_; }

private:
    double ns_;
};

Wavelength energy_to_wavelength(PhotonEnergy e);
PhotonEnergy wavelength_to_energy(Wavelength lambda);

// Q = nu / delta_nu with nu taken from the center wavelength.
double quality_factor(Wavelength center, Linewidth fwhm);

// Signed spectral detuning in nm, emitter minus cavity.
double detuning_nm(Wavelength emitter, Wavelength cavity);

}
