#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <map>
#include <vector>

namespace chiplattice {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

/// One monochromatic plane wave, E(r) = amplitude * polarization * exp(i (k.r + phase)).
///
/// `source` identifies the independent phase knob of the beam: incident beams own one each,
/// reflected partners inherit the knob of their incident beam and set `reflected`.
struct Beam {
  Vec3 wavevector = Vec3::Zero();
  CVec3 polarization = CVec3::Zero();
  double amplitude = 0.0;  // V/m
  double phase = 0.0;      // rad
  int coherence_group = 0;
  int source = -1;
  bool reflected = false;

  double intensity() const;
  static double amplitude_for_intensity(double intensity);
};

/// Planar mirror {r : r.normal = offset}. The normal points into the half-space the atoms
/// occupy, so beams heading for the mirror have k.normal < 0.
struct Mirror {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;            // m
  double reflection_phase = 0.0;  // rad, shared by every reflected beam
  bool enabled = false;
};

struct BeamSet {
  std::vector<Beam> beams;
  Mirror mirror;
  double wavelength = 0.0;  // m
  // Set once reflected partners have been appended; apply_mirror is idempotent on such sets.
  bool mirror_applied = false;

  void validate() const;
};

/// Checks |k| = 2 pi / lambda, unit transverse polarisation and non-negative amplitude.
void validate_beam(const Beam& beam, double wavelength);

/// Perfect-conductor reflection: tangential field negated, normal component kept,
/// phase advanced by the mirror's common reflection phase plus 2 (k.n) offset.
Beam reflect_beam(const Beam& beam, const Mirror& mirror);

/// Appends one reflected partner per incident beam. Identity when the mirror is disabled.
BeamSet apply_mirror(const BeamSet& set);

/// The complete radiating set: `set` itself, or its mirror-expanded copy.
BeamSet expanded(const BeamSet& set);

std::map<int, CVec3> complex_field(const BeamSet& set, const Vec3& r);

/// U = -(alpha / 2) <E E*>, with <E E*> = |E|^2 / 2 summed over coherence groups.
double stark_potential(const BeamSet& set, double alpha, const Vec3& r);
Vec3 potential_gradient(const BeamSet& set, double alpha, const Vec3& r);
Mat3 potential_hessian(const BeamSet& set, double alpha, const Vec3& r);

struct PotentialDerivatives {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

/// Value, gradient and Hessian in one pass over the beams. `set` must already be expanded.
PotentialDerivatives potential_derivatives(const BeamSet& set, double alpha, const Vec3& r);

/// Upper bound on -U from constructive interference: (alpha / 2 c eps0) (sum_i sqrt(I_i))^2,
/// taken per coherence group.
double constructive_bound(const BeamSet& set, double alpha);

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  double coordinate(std::size_t i) const;
};

/// Samples ordered x-slowest, z-fastest: index = (ix * ny + iy) * nz + iz.
struct PotentialGrid {
  std::array<GridAxis, 3> axes;
  std::vector<double> values;  // J

  std::size_t size() const { return values.size(); }
  Vec3 point(std::size_t index) const;
};

/// An axis is either sampled (count >= 2, max > min) or fixed (count == 1, max == min).
PotentialGrid potential_grid(const BeamSet& set, double alpha, const std::array<GridAxis, 3>& axes);

}  // namespace chiplattice
