#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chiplattice/field.hpp"
#include "chiplattice/lattice_models.hpp"

namespace chiplattice {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool contains(const Vec3& r, double margin = 0.0) const;
};

/// One critical point reached by a descent.
struct Minimum {
  Vec3 position = Vec3::Zero();
  double value = 0.0;  // J
};

struct MinimaSet {
  std::vector<Minimum> sites;      // within 1e-6 relative of the deepest minimum
  std::vector<Minimum> secondary;  // shallower local minima
  double u_min = 0.0;
};

struct DescentOptions {
  int max_iterations = 200;
  // Stop once |grad U| < gradient_tol * scale / lambda, scale = constructive bound.
  double gradient_tol = 1e-12;
};

/// Saddle-free damped Newton descent from `start`. Returns nullopt when the iteration stalls
/// on a critical point that is not a minimum.
std::optional<Minimum> descend(const BeamSet& expanded_set, double alpha, const Vec3& start,
                               const DescentOptions& opt = {});

/// Seeds a grid over `cell`, descends every seed, keeps positive-definite critical points
/// and deduplicates within lambda / 100. Sites are sorted lexicographically.
MinimaSet find_minima(const BeamSet& set, double alpha, const Box& cell, int seed_resolution);

/// Hessian eigenfrequencies (Hz), ascending. Throws not_a_minimum unless positive definite.
std::array<double, 3> trap_frequencies(const BeamSet& set, double alpha, const Vec3& minimum,
                                       double mass);

struct Quartics {
  double d4_x = 0.0;  // J/m^4
  double d4_z = 0.0;
};

/// Fourth directional derivative along a unit vector: 7-point central stencil at step h,
/// Richardson-combined with h/2.
double fourth_derivative(const std::function<double(double)>& f, double h);

/// d4U/dx4 and d4U/dz4 at `minimum`, step lambda / 50.
Quartics quartic_derivatives(const BeamSet& set, double alpha, const Vec3& minimum);

struct NebOptions {
  int images = 64;
  // String stationarity and saddle gradient, units |U_min| / lambda.
  double tolerance = 1e-8;
  int max_iterations = 200000;
  // Transverse offset of the initial path midpoint, lambda. Breaks the symmetry of straight
  // paths that cross an exact maximum.
  double bump = 1e-4;
  Vec3 bump_direction = Vec3(0.3, 0.5, 0.8);
};

struct BarrierResult {
  double barrier = 0.0;  // J, saddle minus the deeper endpoint
  Vec3 saddle = Vec3::Zero();
  double saddle_value = 0.0;
  double max_perpendicular_force = 0.0;  // |grad U| at the saddle, |U_min| / lambda
  int iterations = 0;
};

/// Lowest saddle between two minima: a string relaxed onto the minimum-energy path, then the
/// highest image refined onto the first-order saddle by eigenvector following.
BarrierResult min_barrier(const BeamSet& set, double alpha, const Vec3& a, const Vec3& b,
                          const NebOptions& opt = {});

struct PrincipalVectors {
  std::array<Vec3, 3> r{};      // canonical, right-handed
  Vec3 origin = Vec3::Zero();   // least-squares lattice origin
  double fit_residual = 0.0;    // m, rms
  std::size_t basis_size = 1;
};

/// Reduces a set of minima to a canonical Bravais triple.
///
/// Candidates are difference vectors accepted by `is_translation` (default: the point set is
/// mapped onto itself inside its bounding box). The shortest three independent ones are
/// least-squares refined over integer coordinates and canonicalised: each vector's first
/// significant component positive, ordered by length then by descending (x, y, z), and the
/// third flipped if needed to make the triple right-handed.
PrincipalVectors principal_vectors(const std::vector<Vec3>& minima, double wavelength,
                                   const std::function<bool(const Vec3&)>& is_translation = {});

struct AnalysisOptions {
  Box cell;
  int seed_resolution = 12;
  NebOptions neb;
  double adjacency_tol = 1e-3;  // lambda, neighbour-shell grouping
  bool barriers = true;
};

Box default_search_box(double wavelength, bool acl);

struct NeighbourBarrier {
  double distance = 0.0;  // m
  Vec3 displacement = Vec3::Zero();
  int multiplicity = 0;
  BarrierResult result;
};

struct LatticeReport {
  std::vector<Minimum> minima;     // one per basis site, mapped into the fundamental cell
  std::vector<Minimum> secondary;  // shallower minima, also mapped
  std::size_t sites_found = 0;
  double u_min = 0.0;
  std::vector<std::array<double, 3>> trap_frequencies;  // per entry of `minima`
  double isotropy_deviation = 0.0;
  Quartics quartics;
  std::vector<NeighbourBarrier> barriers;
  double min_barrier = 0.0;
  PrincipalVectors principal;
  double max_gradient = 0.0;  // over reported minima, |U_min| / lambda
};

LatticeReport analyze_lattice(const BeamSet& set, double alpha, double mass,
                              const AnalysisOptions& opt);

// ---- phase stability ----------------------------------------------------------------------

/// One phase offset per knob: knob s < n_sources shifts every beam with `source == s`, the last
/// knob (when the mirror is enabled) shifts every reflected beam.
struct PhaseKnobs {
  int sources = 0;
  bool mirror = false;
  int count() const { return sources + (mirror ? 1 : 0); }
};

PhaseKnobs phase_knobs(const BeamSet& set);

/// Same beams with the knob offsets applied; the result is fully expanded.
BeamSet perturb_phases(const BeamSet& set, const std::vector<double>& delta);

struct PhaseTranslation {
  Vec3 t = Vec3::Zero();          // U_perturbed(r) = U(r - t)
  std::vector<double> global;     // per coherence group
  double residual = 0.0;          // rad, max |misfit|
};

/// Least-squares solution of -k_l . t + c_g = delta phi_l over all expanded beams.
PhaseTranslation translation_from_phases(const BeamSet& set, const std::vector<double>& delta);

struct StabilityTrial {
  std::vector<double> delta;
  PhaseTranslation translation;
  double grid_deviation = 0.0;  // max |U_pert(r) - U(r - t)| / |U_min| over the check grid
};

struct StabilityReport {
  bool is_phase_stable = false;
  std::vector<StabilityTrial> trials;
  double max_residual = 0.0;
  double max_grid_deviation = 0.0;
  int independent_phase_count = 0;
};

struct StabilityOptions {
  double residual_tol = 1e-8;
  double grid_tol = 1e-8;
  int grid = 16;
  Box cell;  // check-grid bounds
};

int independent_phase_count(const BeamSet& set);

StabilityReport verify_phase_stability(const BeamSet& set, double alpha,
                                       const std::vector<std::vector<double>>& perturbations,
                                       const StabilityOptions& opt);

// ---- misalignment ---------------------------------------------------------------------------

struct ProfileSample {
  Vec3 position = Vec3::Zero();
  double depth = 0.0;           // J (U at the local minimum)
  double frequency = 0.0;       // Hz, mean of the three eigenfrequencies
};

struct MisalignmentReport {
  double delta_phi = 0.0;
  std::vector<ProfileSample> profile;
  double depth_variation = 0.0;      // J, peak to peak
  double frequency_variation = 0.0;  // Hz, peak to peak
  double spatial_period = 0.0;       // m, spectral peak; 0 when the profile is flat
  double predicted_period = 0.0;     // m, half the slowest z beat of the field; 0 when aligned
  double in_plane_spread = 0.0;      // max relative depth/frequency spread at fixed z
};

struct MisalignmentOptions {
  double z_start = 0.0;  // m; defaults to the first site above the mirror when 0
  int in_plane_neighbours = 6;
};

/// Slowest non-trivial z-beat of the beam set, aliased onto the layer spacing of the aligned
/// lattice. Zero when every pairwise z wavevector difference is a multiple of the layer
/// reciprocal.
double predicted_beat_period(const BeamSet& set, double layer_spacing);

/// Tilts beam 0 of `cfg` by each delta_phi and profiles depth and frequency site by site up
/// the z chain over `z_span`.
std::vector<MisalignmentReport> misalignment_scan(const AclConfig& cfg, double alpha, double mass,
                                                  const std::vector<double>& delta_phi,
                                                  double z_span,
                                                  const MisalignmentOptions& opt = {});

/// Dominant period of samples (z_i, v_i): periodogram peak refined by a sinusoid fit.
double dominant_period(const std::vector<double>& z, const std::vector<double>& v);

}  // namespace chiplattice
