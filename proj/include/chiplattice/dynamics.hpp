#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chiplattice/atom.hpp"
#include "chiplattice/field.hpp"

namespace chiplattice {

/// Parallelepiped origin + sum_k u_k edges[k], u in [0, 1)^3.
struct Cell {
  Vec3 origin = Vec3::Zero();
  std::array<Vec3, 3> edges{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

  Vec3 at(const Vec3& u) const;
  double volume() const;
  void validate() const;
  /// Lattice unit cell spanned by `r` and centred on `site`.
  static Cell centred(const Vec3& site, const std::array<Vec3, 3>& r);
};

struct Ensemble {
  std::vector<Vec3> positions;   // m
  std::vector<Vec3> velocities;  // m/s
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

/// Maxwell-Boltzmann velocities, positions uniform over `region`. Particle i draws from its
/// own stream seeded by (seed, i), so any subset of particles is reproducible on its own.
Ensemble sample_thermal(double temperature, const AtomSpecies& species, const Cell& region,
                        std::size_t n, std::uint64_t seed);

struct EquilibriumOptions {
  double intensity_scale = 1.0;
  // Lattice depth at full scale, J; used as the rejection floor when negative.
  double u_min = 0.0;
  // When set, particles are redrawn until 1/2 m v^2 + s (U - U_min) < bound_energy (J).
  bool bound_only = false;
  double bound_energy = 0.0;
  std::uint64_t max_trials = 20'000'000;  // per particle
};

/// Thermal equilibrium in the lattice: positions Boltzmann-weighted by
/// exp(-s (U - U_min) / k_B T) over `region` (rejection sampling), velocities Maxwell-Boltzmann.
Ensemble sample_equilibrium(double temperature, const AtomSpecies& species, const BeamSet& set,
                            double alpha, const Cell& region, std::size_t n, std::uint64_t seed,
                            const EquilibriumOptions& opt);

struct SimulationConfig {
  double time_step = 0.0;            // s
  double duration = 0.0;             // s
  double modulation_depth = 0.0;     // epsilon
  double modulation_frequency = 0.0; // Hz
  double intensity_scale = 1.0;      // s0 in s(t) = s0 (1 + eps sin 2 pi f t)
  double ramp_time = 0.0;            // s, linear ramp of s0 from 0 before the modulated phase
  bool gravity = false;              // g along -z (away from the mirror)
  double reference_frequency = 0.0;  // Hz; when > 0 the step must satisfy dt <= 1 / (50 f)
  int record_stride = 0;             // energy history stride in steps, 0 = none

  void validate() const;
  std::size_t steps() const;
};

struct Trajectory {
  Ensemble initial;
  Ensemble final;
  // Energies in the unmodulated Hamiltonian at scale s0 (plus gravity when enabled), J.
  std::vector<double> initial_energy;
  std::vector<double> final_energy;
  // Position of every particle when the ramp ends (equal to the start when there is no ramp).
  std::vector<Vec3> hold_start;
  std::vector<std::vector<double>> energy_history;  // [particle][record]
};

/// Velocity Verlet under force -s(t) grad U (- m g z). Particles are independent, batched
/// through the kernels and split across workers; results do not depend on the split.
Trajectory integrate(const Ensemble& ens, const BeamSet& set, double alpha, double mass,
                     const SimulationConfig& cfg);

/// Unmodulated energy 1/2 m v^2 + s0 U(r) (+ m g z).
double particle_energy(const BeamSet& expanded_set, double alpha, double mass, double scale,
                       bool gravity, const Vec3& r, const Vec3& v);

struct HeatingPoint {
  double modulation_frequency = 0.0;  // Hz
  double mean_gain = 0.0;             // J
  double stderr_gain = 0.0;           // J
};

struct HeatingScan {
  std::vector<HeatingPoint> curve;
  double resonance = 0.0;  // Hz, argmax of the mean gain
};

struct HeatingOptions {
  double time_step = 0.0;  // s
  double reference_frequency = 0.0;
  bool gravity = false;
};

/// One ensemble, integrated once per modulation frequency.
HeatingScan parametric_heating_scan(const Ensemble& ens, const BeamSet& set, double alpha,
                                    double mass, const std::vector<double>& modulation_frequencies,
                                    double modulation_depth, double hold,
                                    const HeatingOptions& opt);

enum class CaptureMethod { energy_criterion, trajectory };
CaptureMethod capture_method_from_string(const std::string& name);
std::string to_string(CaptureMethod m);

struct CaptureOptions {
  Cell region;                 // one unit cell around a site
  double u_min = 0.0;          // site depth at full intensity, J
  double min_barrier = 0.0;    // at full intensity, J
  double escape_radius = 0.0;  // m, trajectory: captured if it ends within this of the hold start
  double hold = 15e-3;         // s
  double ramp_time = 300e-6;   // s, trajectory loading ramp
  double time_step = 0.0;      // s
  double reference_frequency = 0.0;
  bool gravity = false;
};

struct CaptureResult {
  double fraction = 0.0;
  std::size_t captured = 0;
  std::size_t total = 0;
};

/// energy_criterion: atoms in thermal equilibrium with the lattice at scale s; captured when
/// the total energy lies below the lowest escape saddle s (U_min + barrier).
/// trajectory: a uniform cloud over one cell, lattice ramped to s then held; captured when the
/// atom stays within one cell of where the hold began.
CaptureResult capture_fraction(double temperature, const AtomSpecies& species, const BeamSet& set,
                               double alpha, double intensity_scale, std::size_t n,
                               std::uint64_t seed, CaptureMethod method,
                               const CaptureOptions& opt);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

}  // namespace chiplattice
