#include "qcav/units.hpp"

namespace qcav {

Wavelength energy_to_wavelength(PhotonEnergy e) {
    return Wavelength(kHcMevNm / e.mev());
}

PhotonEnergy wavelength_to_energy(Wavelength lambda) {
    return PhotonEnergy(kHcMevNm / lambda.nm());
}

double quality_factor(Wavelength center, Linewidth fwhm) {
    const double nu_ghz = kSpeedOfLight / (center.nm() * 1e-9) * 1e-9;
    return nu_ghz / fwhm.ghz();
}

double detuning_nm(Wavelength emitter, Wavelength cavity) {
    return emitter.nm() - cavity.nm();
}

}
