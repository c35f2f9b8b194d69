#include "chiplattice/atom.hpp"

#include <cmath>
#include <complex>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"

namespace chiplattice {

namespace cst = constants;

void AtomSpecies::validate() const {
  require(mass > 0.0 && std::isfinite(mass), ErrorKind::invalid_input, "atom mass must be positive");
  require(transition_angular_frequency > 0.0, ErrorKind::invalid_input,
          "atom transition frequency must be positive");
  require(natural_linewidth > 0.0, ErrorKind::invalid_input, "atom linewidth must be positive");
  require(saturation_intensity > 0.0, ErrorKind::invalid_input,
          "atom saturation intensity must be positive");
  require(std::isfinite(lande_g_factor), ErrorKind::invalid_input, "g-factor must be finite");
}

AtomSpecies rubidium87_d2() {
  AtomSpecies rb;
  rb.mass = 1.44316e-25;
  rb.transition_angular_frequency = cst::two_pi * 384.2304844685e12;
  rb.natural_linewidth = cst::two_pi * 6.0666e6;
  rb.saturation_intensity = 25.0;
  rb.lande_g_factor = -0.5;
  rb.label = "Rb87-D2";
  return rb;
}

AtomSpecies atom_preset(const std::string& name) {
  if (name == "Rb87-D2") return rubidium87_d2();
  fail(ErrorKind::invalid_input, "unknown atom preset '" + name + "'");
}

double LaserSpec::wavenumber() const { return cst::two_pi / wavelength; }

void LaserSpec::validate(const AtomSpecies& species) const {
  require(wavelength > 0.0 && std::isfinite(wavelength), ErrorKind::invalid_input,
          "laser wavelength must be positive");
  require(angular_frequency > 0.0, ErrorKind::invalid_input, "laser frequency must be positive");
  const double from_lambda = cst::two_pi * cst::c / wavelength;
  require(std::abs(from_lambda - angular_frequency) <= 1e-9 * angular_frequency,
          ErrorKind::invalid_input, "laser wavelength and frequency disagree");
  const double expected = angular_frequency - species.transition_angular_frequency;
  require(std::abs(expected - detuning) <= 1e-9 * angular_frequency, ErrorKind::invalid_input,
          "laser detuning inconsistent with wavelength and transition frequency");
}

LaserSpec LaserSpec::from_detuning(const AtomSpecies& species, double detuning) {
  species.validate();
  LaserSpec laser;
  laser.detuning = detuning;
  laser.angular_frequency = species.transition_angular_frequency + detuning;
  require(laser.angular_frequency > 0.0, ErrorKind::invalid_input,
          "detuning leaves a non-positive laser frequency");
  laser.wavelength = cst::two_pi * cst::c / laser.angular_frequency;
  return laser;
}

LaserSpec LaserSpec::from_wavelength(const AtomSpecies& species, double wavelength) {
  species.validate();
  require(wavelength > 0.0, ErrorKind::invalid_input, "laser wavelength must be positive");
  LaserSpec laser;
  laser.wavelength = wavelength;
  laser.angular_frequency = cst::two_pi * cst::c / wavelength;
  laser.detuning = laser.angular_frequency - species.transition_angular_frequency;
  return laser;
}

double polarizability(const AtomSpecies& species, const LaserSpec& laser) {
  species.validate();
  require(laser.angular_frequency > 0.0, ErrorKind::invalid_input,
          "laser frequency must be positive");
  const double w0 = species.transition_angular_frequency;
  const double wl = laser.angular_frequency;
  const double gamma = species.natural_linewidth;
  const std::complex<double> denom(w0 * w0 - wl * wl, -(wl * wl * wl / (w0 * w0)) * gamma);
  const std::complex<double> alpha =
      6.0 * cst::pi * cst::epsilon0 * cst::c * cst::c * cst::c * (gamma / (w0 * w0)) / denom;
  return alpha.real();
}

double dipole_potential_per_intensity(const AtomSpecies& species, const LaserSpec& laser) {
  const double w0 = species.transition_angular_frequency;
  return 3.0 * cst::pi * cst::c * cst::c / (2.0 * w0 * w0 * w0) *
         (species.natural_linewidth / laser.detuning);
}

double recoil_energy(const AtomSpecies& species, const LaserSpec& laser) {
  species.validate();
  require(laser.wavelength > 0.0, ErrorKind::invalid_input, "laser wavelength must be positive");
  const double k = laser.wavenumber();
  return cst::hbar * cst::hbar * k * k / (2.0 * species.mass);
}

double lamb_dicke(const AtomSpecies& species, const LaserSpec& laser, double trap_frequency_hz) {
  require(trap_frequency_hz > 0.0, ErrorKind::invalid_input, "trap frequency must be positive");
  return std::sqrt(recoil_energy(species, laser) / (cst::h * trap_frequency_hz));
}

double zeeman_resonance_field(const AtomSpecies& species, double trap_frequency_hz) {
  require(trap_frequency_hz > 0.0, ErrorKind::invalid_input, "trap frequency must be positive");
  require(species.lande_g_factor != 0.0, ErrorKind::no_resonance,
          "g_F = 0: Zeeman splitting cannot match the motional quantum");
  return cst::h * trap_frequency_hz / (std::abs(species.lande_g_factor) * cst::mu_B);
}

double scattering_rate(const AtomSpecies& species, const LaserSpec& laser, double local_intensity) {
  species.validate();
  require(local_intensity >= 0.0, ErrorKind::invalid_input, "intensity must be non-negative");
  require(laser.detuning != 0.0, ErrorKind::invalid_input, "scattering rate needs non-zero detuning");
  const double gamma = species.natural_linewidth;
  const double ratio = gamma / laser.detuning;
  return 0.5 * gamma * (local_intensity / species.saturation_intensity) * 0.25 * ratio * ratio;
}

double heating_rate_estimate(const AtomSpecies& species, const LaserSpec& laser,
                             double local_intensity) {
  return scattering_rate(species, laser, local_intensity) * 2.0 * recoil_energy(species, laser) /
         cst::k_B;
}

bool is_far_detuned(const AtomSpecies& species, const LaserSpec& laser) {
  return std::abs(laser.detuning) > 100.0 * species.natural_linewidth;
}

}  // namespace chiplattice
