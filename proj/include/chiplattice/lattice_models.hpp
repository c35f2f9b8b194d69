#pragma once

#include <array>
#include <numbers>

#include "chiplattice/field.hpp"

namespace chiplattice {

/// arctan(sqrt 2): the incidence angle at which three beams 120 degrees apart in azimuth
/// are mutually orthogonal.
inline const double kAclIncidenceAngle = std::atan(std::numbers::sqrt2);

/// Atom-chip lattice: three P-polarised beams reflected off a mirror at z = offset.
struct AclConfig {
  std::array<double, 3> intensities{0.0, 0.0, 0.0};  // W/m^2 per incident beam
  double wavelength = 0.0;                            // m
  double incidence_angle = kAclIncidenceAngle;        // rad from the mirror normal
  std::array<double, 3> incidence_offsets{0.0, 0.0, 0.0};  // rad, per-beam misalignment
  std::array<double, 3> azimuths{0.0, 2.0 * std::numbers::pi / 3.0, 4.0 * std::numbers::pi / 3.0};
  std::array<double, 3> phases{0.0, 0.0, 0.0};  // rad
  double mirror_offset = 0.0;                   // m
  // Common reflection phase on top of the perfect-conductor rule. pi reproduces the
  // closed form (zero intensity at the mirror plane).
  double reflection_phase = std::numbers::pi;

  static AclConfig uniform(double intensity, double wavelength);
  void validate() const;
};

/// Three mutually incoherent retro-reflected pairs along x, y and z.
struct SclConfig {
  double intensity = 0.0;  // W/m^2 per beam
  double wavelength = 0.0;

  void validate() const;
};

/// Incident beams only, mirror enabled; call expanded()/apply_mirror() for all six.
BeamSet build_acl(const AclConfig& cfg);

/// Pair along x polarised z, along y polarised x, along z polarised y; one group per pair.
BeamSet build_scl(const SclConfig& cfg);

/// Closed-form ACL potential for equal intensities at phi = arctan(sqrt 2), zero phases and
/// the mirror at z = 0.
double acl_closed_form(double intensity, double alpha, double wavelength, const Vec3& r);

/// -(2 alpha I / c eps0) (cos^2 kx + cos^2 ky + cos^2 kz).
double scl_closed_form(double intensity, double alpha, double wavelength, const Vec3& r);

/// Analytic site depths, (alpha I / c eps0) units folded in.
double acl_reference_depth(double intensity, double alpha);  // -12 alpha I / c eps0
double scl_reference_depth(double intensity, double alpha);  // -6 alpha I / c eps0

}  // namespace chiplattice
