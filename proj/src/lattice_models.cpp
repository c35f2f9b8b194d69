#include "chiplattice/lattice_models.hpp"

#include <cmath>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"

namespace chiplattice {

namespace cst = constants;

AclConfig AclConfig::uniform(double intensity, double wavelength) {
  AclConfig cfg;
  cfg.intensities = {intensity, intensity, intensity};
  cfg.wavelength = wavelength;
  return cfg;
}

void AclConfig::validate() const {
  require(wavelength > 0.0, ErrorKind::invalid_input, "ACL wavelength must be positive");
  for (double i : intensities)
    require(i >= 0.0 && std::isfinite(i), ErrorKind::invalid_input,
            "ACL intensities must be non-negative");
  for (double off : incidence_offsets) {
    const double phi = incidence_angle + off;
    require(phi > 0.0 && phi < cst::pi / 2.0, ErrorKind::geometry,
            "ACL incidence angle must lie in (0, pi/2)");
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double d = std::remainder(azimuths[a] - azimuths[b], cst::two_pi);
      require(std::abs(d) > 1e-9, ErrorKind::geometry, "ACL azimuths must be distinct");
    }
}

void SclConfig::validate() const {
  require(wavelength > 0.0, ErrorKind::invalid_input, "SCL wavelength must be positive");
  require(intensity > 0.0, ErrorKind::invalid_input, "SCL intensity must be positive");
}

BeamSet build_acl(const AclConfig& cfg) {
  cfg.validate();
  const double k = cst::two_pi / cfg.wavelength;
  BeamSet set;
  set.wavelength = cfg.wavelength;
  set.mirror.enabled = true;
  set.mirror.normal = Vec3::UnitZ();
  set.mirror.offset = cfg.mirror_offset;
  set.mirror.reflection_phase = cfg.reflection_phase;
  for (int i = 0; i < 3; ++i) {
    const double phi = cfg.incidence_angle + cfg.incidence_offsets[i];
    const double cb = std::cos(cfg.azimuths[i]);
    const double sb = std::sin(cfg.azimuths[i]);
    Beam b;
    b.wavevector = k * Vec3(std::sin(phi) * cb, std::sin(phi) * sb, -std::cos(phi));
    // In the plane of incidence, orthogonal to k, positive z-component.
    const Vec3 pol(std::cos(phi) * cb, std::cos(phi) * sb, std::sin(phi));
    b.polarization = pol.normalized().cast<std::complex<double>>();
    b.amplitude = Beam::amplitude_for_intensity(cfg.intensities[i]);
    b.phase = cfg.phases[i];
    b.coherence_group = 0;
    b.source = i;
    set.beams.push_back(b);
  }
  return set;
}

BeamSet build_scl(const SclConfig& cfg) {
  cfg.validate();
  const double k = cst::two_pi / cfg.wavelength;
  const double amplitude = Beam::amplitude_for_intensity(cfg.intensity);
  BeamSet set;
  set.wavelength = cfg.wavelength;
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  const Vec3 pols[3] = {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  for (int pair = 0; pair < 3; ++pair) {
    for (int dir = 0; dir < 2; ++dir) {
      Beam b;
      b.wavevector = (dir == 0 ? k : -k) * axes[pair];
      b.polarization = pols[pair].cast<std::complex<double>>();
      b.amplitude = amplitude;
      b.coherence_group = pair;
      b.source = 2 * pair + dir;
      set.beams.push_back(b);
    }
  }
  return set;
}

double acl_closed_form(double intensity, double alpha, double wavelength, const Vec3& r) {
  const double k = cst::two_pi / wavelength;
  const double cos_phi = 1.0 / std::sqrt(3.0);
  const double sin_phi = std::sqrt(2.0 / 3.0);
  const double tan_phi = std::numbers::sqrt2;
  const double cz = std::cos(k * r.z() * cos_phi);
  const double sz = std::sin(k * r.z() * cos_phi);
  const double xy = std::cos(k * r.x() / sin_phi) * std::cos(k * r.y() / tan_phi);
  const double yy = std::cos(k * r.y() * tan_phi);
  const double braces = -4.0 / 3.0 * cz * cz * (-3.0 + 2.0 * xy + yy) +
                        8.0 / 3.0 * sz * sz * (3.0 + 4.0 * xy + 2.0 * yy);
  return -1.0 / (2.0 * cst::c * cst::epsilon0) * intensity * alpha * braces;
}

double scl_closed_form(double intensity, double alpha, double wavelength, const Vec3& r) {
  const double k = cst::two_pi / wavelength;
  double sum = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double c = std::cos(k * r[d]);
    sum += c * c;
  }
  return -2.0 * alpha * intensity / (cst::c * cst::epsilon0) * sum;
}

double acl_reference_depth(double intensity, double alpha) {
  return -12.0 * alpha * intensity / (cst::c * cst::epsilon0);
}

double scl_reference_depth(double intensity, double alpha) {
  return -6.0 * alpha * intensity / (cst::c * cst::epsilon0);
}

}  // namespace chiplattice
