#pragma once

#include <string>

namespace chiplattice {

/// Two-level description of the atom as seen by a far-detuned laser.
struct AtomSpecies {
  double mass = 0.0;                          // kg
  double transition_angular_frequency = 0.0;  // rad/s
  double natural_linewidth = 0.0;             // rad/s (FWHM, angular)
  double saturation_intensity = 0.0;          // W/m^2
  double lande_g_factor = 0.0;                // g_F, signed
  std::string label;

  void validate() const;
};

/// 87Rb D2 line, F = 1 ground-state g-factor, π-polarised saturation intensity.
AtomSpecies rubidium87_d2();

/// Looks up a preset by name ("Rb87-D2"); throws invalid_input for unknown names.
AtomSpecies atom_preset(const std::string& name);

struct LaserSpec {
  double wavelength = 0.0;         // m
  double angular_frequency = 0.0;  // rad/s
  double detuning = 0.0;           // rad/s, omega_L - omega_0

  double wavenumber() const;
  void validate(const AtomSpecies& species) const;

  static LaserSpec from_detuning(const AtomSpecies& species, double detuning);
  static LaserSpec from_wavelength(const AtomSpecies& species, double wavelength);
};

// Real part of the Lorentz-oscillator polarisability, C m^2 / V.
// Positive below resonance, so the light shift -alpha<E E*>/2 is attractive.
double polarizability(const AtomSpecies& species, const LaserSpec& laser);

// Independent check for polarizability(): far-detuned two-level dipole potential per unit
// intensity, U/I = (3 pi c^2 / 2 w0^3) (Gamma / Delta). J per W/m^2.
double dipole_potential_per_intensity(const AtomSpecies& species, const LaserSpec& laser);

double recoil_energy(const AtomSpecies& species, const LaserSpec& laser);

/// eta = sqrt(E_R / (h f_trap)).
double lamb_dicke(const AtomSpecies& species, const LaserSpec& laser, double trap_frequency_hz);

/// Bias field (T) at which adjacent-m_F Zeeman splitting equals one motional quantum h f_trap.
double zeeman_resonance_field(const AtomSpecies& species, double trap_frequency_hz);

/// Photon scattering rate (1/s), low-saturation far-detuned limit.
double scattering_rate(const AtomSpecies& species, const LaserSpec& laser, double local_intensity);

/// Recoil heating (K/s): every scattered photon deposits ~2 E_R.
double heating_rate_estimate(const AtomSpecies& species, const LaserSpec& laser,
                             double local_intensity);

/// True when |Delta| is large enough for the far-detuned formulas (|Delta| > 100 Gamma).
bool is_far_detuned(const AtomSpecies& species, const LaserSpec& laser);

}  // namespace chiplattice
