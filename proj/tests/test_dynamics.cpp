#include <cmath>
#include <numeric>

#include "doctest.h"

#include "chiplattice/analysis.hpp"
#include "chiplattice/atom.hpp"
#include "chiplattice/constants.hpp"
#include "chiplattice/dynamics.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/lattice_models.hpp"

using namespace chiplattice;
namespace cst = chiplattice::constants;

namespace {

struct Lattice {
  AtomSpecies rb = rubidium87_d2();
  LaserSpec laser = LaserSpec::from_detuning(rb, -cst::two_pi * 13.25e9);
  double alpha = polarizability(rb, laser);
  double lambda = laser.wavelength;
  BeamSet set = expanded(build_acl(AclConfig::uniform(849.6, laser.wavelength)));
  Vec3 site = Vec3(0, 0, laser.wavelength * std::sqrt(3.0) / 4.0);
  double u_min = stark_potential(set, alpha, site);
  double f_trap = trap_frequencies(set, alpha, site, rb.mass)[0];
  std::array<Vec3, 3> r{laser.wavelength * Vec3(std::sqrt(2.0 / 3.0), 0, 0),
                        laser.wavelength * Vec3(std::sqrt(1.0 / 6.0), std::sqrt(0.5), 0),
                        laser.wavelength * Vec3(0, 0, std::sqrt(3.0) / 2.0)};
};

const Lattice& lat() {
  static const Lattice l;
  return l;
}

Ensemble single(const Vec3& r, const Vec3& v) {
  Ensemble e;
  e.positions = {r};
  e.velocities = {v};
  return e;
}

}  // namespace

TEST_CASE("thermal sampling") {
  const Lattice& l = lat();
  const double t = 8.4e-6;
  const Cell cell = Cell::centred(l.site, l.r);
  const Ensemble e = sample_thermal(t, l.rb, cell, 100000, 42);
  double ke = 0.0, vx2 = 0.0;
  for (const auto& v : e.velocities) {
    ke += 0.5 * l.rb.mass * v.squaredNorm();
    vx2 += v.x() * v.x();
  }
  ke /= e.size();
  CHECK(ke == doctest::Approx(1.5 * cst::k_B * t).epsilon(0.02));
  // sqrt(k T / m) per axis
  CHECK(std::sqrt(vx2 / e.size()) == doctest::Approx(0.028348).epsilon(0.02));

  const Ensemble again = sample_thermal(t, l.rb, cell, 100000, 42);
  CHECK(again.positions == e.positions);
  CHECK(again.velocities == e.velocities);
  // Particle i does not depend on the ensemble size.
  const Ensemble head = sample_thermal(t, l.rb, cell, 10, 42);
  for (std::size_t i = 0; i < 10; ++i) CHECK(head.velocities[i] == e.velocities[i]);
  const Ensemble other = sample_thermal(t, l.rb, cell, 10, 43);
  CHECK(other.velocities[0] != e.velocities[0]);
}

TEST_CASE("atom at rest in a minimum stays put") {
  const Lattice& l = lat();
  SimulationConfig cfg;
  cfg.time_step = 1.0 / (100.0 * l.f_trap);
  cfg.duration = 1e4 * cfg.time_step;
  const Trajectory tr = integrate(single(l.site, Vec3::Zero()), l.set, l.alpha, l.rb.mass, cfg);
  CHECK((tr.final.positions[0] - l.site).norm() < l.lambda / 1e6);
}

TEST_CASE("energy conservation and oscillation frequency") {
  const Lattice& l = lat();
  SimulationConfig cfg;
  cfg.time_step = 1.0 / (100.0 * l.f_trap);
  cfg.duration = 1e5 * cfg.time_step;
  const Vec3 v0(0.01, 0.004, -0.006);  // ~ a few uK
  const Trajectory tr = integrate(single(l.site, v0), l.set, l.alpha, l.rb.mass, cfg);
  CHECK(std::abs(tr.final_energy[0] - tr.initial_energy[0]) < 1e-4 * std::abs(tr.initial_energy[0]));

  // Small-amplitude oscillation along x: count zero crossings of the displacement.
  SimulationConfig small;
  small.time_step = 1.0 / (200.0 * l.f_trap);
  small.duration = small.time_step;
  Ensemble e = single(l.site + Vec3(l.lambda * 1e-3, 0, 0), Vec3::Zero());
  int crossings = 0;
  double prev = e.positions[0].x() - l.site.x();
  const int steps = 200 * 50;
  for (int i = 0; i < steps; ++i) {
    e = integrate(e, l.set, l.alpha, l.rb.mass, small).final;
    const double x = e.positions[0].x() - l.site.x();
    if ((x > 0) != (prev > 0)) ++crossings;
    prev = x;
  }
  const double measured = crossings / 2.0 / (steps * small.time_step);
  CHECK(measured == doctest::Approx(l.f_trap).epsilon(0.01));
}

TEST_CASE("time step guard") {
  const Lattice& l = lat();
  SimulationConfig cfg;
  cfg.time_step = 1.0 / (10.0 * l.f_trap);
  cfg.duration = 1e-4;
  cfg.reference_frequency = l.f_trap;
  CHECK_THROWS_AS(integrate(single(l.site, Vec3::Zero()), l.set, l.alpha, l.rb.mass, cfg), Error);
}

TEST_CASE("parametric heating") {
  const Lattice& l = lat();
  EquilibriumOptions eq;
  eq.u_min = l.u_min;
  eq.bound_only = true;
  eq.bound_energy = 0.8 * std::abs(l.u_min);
  const Cell cell = Cell::centred(l.site, l.r);
  const Ensemble ens = sample_equilibrium(0.5e-6, l.rb, l.set, l.alpha, cell, 200, 7, eq);
  HeatingOptions ho;
  ho.time_step = 1.0 / (100.0 * l.f_trap);
  ho.reference_frequency = l.f_trap;
  const double f2 = 2.0 * l.f_trap;
  const HeatingScan coarse = parametric_heating_scan(ens, l.set, l.alpha, l.rb.mass,
                                                     {l.f_trap, 0.97 * f2}, 0.02, 2e-3, ho);
  CHECK(coarse.curve[0].mean_gain < coarse.curve[1].mean_gain);

  HeatingOptions fine = ho;
  fine.time_step /= 2.0;
  const HeatingScan halved =
      parametric_heating_scan(ens, l.set, l.alpha, l.rb.mass, {0.97 * f2}, 0.02, 2e-3, fine);
  CHECK(halved.curve[0].mean_gain == doctest::Approx(coarse.curve[1].mean_gain).epsilon(0.02));

  const HeatingScan flat =
      parametric_heating_scan(ens, l.set, l.alpha, l.rb.mass, {0.97 * f2}, 0.0, 2e-3, ho);
  CHECK(std::abs(flat.curve[0].mean_gain) < 1e-3 * coarse.curve[1].mean_gain + 1e-6 * std::abs(l.u_min));
}

TEST_CASE("results do not depend on the worker count") {
  const Lattice& l = lat();
  const Cell cell = Cell::centred(l.site, l.r);
  const Ensemble ens = sample_thermal(2e-6, l.rb, cell, 300, 5);
  SimulationConfig cfg;
  cfg.time_step = 1.0 / (100.0 * l.f_trap);
  cfg.duration = 200 * cfg.time_step;
  setenv("CHIPLATTICE_THREADS", "1", 1);
  const Trajectory a = integrate(ens, l.set, l.alpha, l.rb.mass, cfg);
  setenv("CHIPLATTICE_THREADS", "3", 1);
  const Trajectory b = integrate(ens, l.set, l.alpha, l.rb.mass, cfg);
  unsetenv("CHIPLATTICE_THREADS");
  CHECK(a.final_energy == b.final_energy);
  CHECK(ks_two_sample_p(a.final_energy, b.final_energy) > 0.01);
}

TEST_CASE("KS p-value") {
  std::vector<double> a, b, c;
  for (int i = 0; i < 500; ++i) {
    a.push_back(std::fmod(i * 0.618034, 1.0));
    b.push_back(std::fmod(i * 0.414214 + 0.1, 1.0));
    c.push_back(0.5 + 0.5 * std::fmod(i * 0.732051, 1.0));
  }
  CHECK(ks_two_sample_p(a, b) > 0.5);
  CHECK(ks_two_sample_p(a, c) < 1e-6);
}

TEST_CASE("capture limits") {
  const Lattice& l = lat();
  CaptureOptions co;
  co.region = Cell::centred(l.site, l.r);
  co.u_min = l.u_min;
  co.min_barrier = 0.8 * std::abs(l.u_min);
  co.escape_radius = l.r[2].norm();
  co.time_step = 1.0 / (100.0 * l.f_trap);
  CHECK(capture_fraction(5e-8, l.rb, l.set, l.alpha, 1.0, 200, 3, CaptureMethod::energy_criterion, co)
            .fraction == 1.0);
  CHECK(capture_fraction(8.4e-6, l.rb, l.set, l.alpha, 0.0, 200, 3, CaptureMethod::energy_criterion, co)
            .fraction == 0.0);
  co.hold = 2e-3;
  co.ramp_time = 100e-6;
  CHECK(capture_fraction(8.4e-6, l.rb, l.set, l.alpha, 0.0, 100, 3, CaptureMethod::trajectory, co)
            .fraction == 0.0);
  try {
    capture_method_from_string("monte-carlo");
    FAIL("expected unknown_method");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_method);
  }
  CHECK(capture_method_from_string("trajectory") == CaptureMethod::trajectory);
  CHECK(to_string(CaptureMethod::energy_criterion) == "energy-criterion");
}

TEST_CASE("equilibrium sampling is Boltzmann weighted") {
  const Lattice& l = lat();
  EquilibriumOptions eq;
  eq.u_min = l.u_min;
  const Cell cell = Cell::centred(l.site, l.r);
  const double t = 1e-6;
  const Ensemble e = sample_equilibrium(t, l.rb, l.set, l.alpha, cell, 20000, 9, eq);
  // Deep harmonic well: <U - U_min> ~ 3/2 k T.
  double pe = 0.0;
  for (const auto& r : e.positions) pe += stark_potential(l.set, l.alpha, r) - l.u_min;
  pe /= e.size();
  CHECK(pe == doctest::Approx(1.5 * cst::k_B * t).epsilon(0.1));
}
