#include <cmath>

#include "doctest.h"

#include "chiplattice/atom.hpp"
#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"

using namespace chiplattice;
namespace cst = chiplattice::constants;

namespace {

// Hand-evaluated references for 87Rb, lambda = 780.24 nm.
constexpr double kMass = 1.44316e-25;
constexpr double kLambda = 780.24e-9;

LaserSpec at_780() { return LaserSpec::from_wavelength(rubidium87_d2(), kLambda); }

}  // namespace

TEST_CASE("recoil energy matches the hand value and scales with lambda and mass") {
  const AtomSpecies rb = rubidium87_d2();
  const LaserSpec l = at_780();
  const double er_oracle = cst::h / (2.0 * kMass * kLambda * kLambda);  // in Hz
  CHECK(recoil_energy(rb, l) / cst::h == doctest::Approx(er_oracle).epsilon(1e-12));
  CHECK(recoil_energy(rb, l) / cst::h == doctest::Approx(3770.99).epsilon(1e-4));

  const LaserSpec l2 = LaserSpec::from_wavelength(rb, 2.0 * kLambda);
  CHECK(recoil_energy(rb, l2) == doctest::Approx(recoil_energy(rb, l) / 4.0).epsilon(1e-12));
  AtomSpecies heavy = rb;
  heavy.mass *= 2.0;
  CHECK(recoil_energy(heavy, l) == doctest::Approx(recoil_energy(rb, l) / 2.0).epsilon(1e-12));
}

TEST_CASE("Lamb-Dicke parameter") {
  const AtomSpecies rb = rubidium87_d2();
  const LaserSpec l = at_780();
  const double er = recoil_energy(rb, l);
  CHECK(lamb_dicke(rb, l, er / cst::h) == doctest::Approx(1.0).epsilon(1e-12));
  for (double f : {10e3, 46.6e3, 200e3}) {
    const double eta = lamb_dicke(rb, l, f);
    CHECK(eta * eta * cst::h * f == doctest::Approx(er).epsilon(1e-12));
  }
  CHECK(lamb_dicke(rb, l, 49.7e3) == doctest::Approx(0.27544).epsilon(2e-4));
  CHECK(lamb_dicke(rb, l, 46.6e3) == doctest::Approx(0.28446).epsilon(2e-4));
  CHECK_THROWS_AS(lamb_dicke(rb, l, 0.0), Error);
}

TEST_CASE("Zeeman resonance field") {
  AtomSpecies rb = rubidium87_d2();
  const double b = zeeman_resonance_field(rb, 46.6e3);
  // h f / (|g_F| mu_B) with mu_B / h = 1.39962449 MHz/G.
  CHECK(b / cst::milligauss == doctest::Approx(46.6e3 / (0.5 * 1.39962449e6) * 1e3).epsilon(1e-7));
  CHECK(zeeman_resonance_field(rb, 93.2e3) == doctest::Approx(2.0 * b).epsilon(1e-12));
  AtomSpecies g1 = rb;
  g1.lande_g_factor = 1.0;
  CHECK(zeeman_resonance_field(g1, 46.6e3) == doctest::Approx(b / 2.0).epsilon(1e-12));
  AtomSpecies g0 = rb;
  g0.lande_g_factor = 0.0;
  try {
    zeeman_resonance_field(g0, 46.6e3);
    FAIL("expected no_resonance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_resonance);
  }
}

TEST_CASE("scattering rate") {
  const AtomSpecies rb = rubidium87_d2();
  const LaserSpec l = LaserSpec::from_detuning(rb, -cst::two_pi * 13.25e9);
  CHECK(scattering_rate(rb, l, 0.0) == 0.0);
  const double g1 = scattering_rate(rb, l, 1000.0);
  CHECK(scattering_rate(rb, l, 3000.0) == doctest::Approx(3.0 * g1).epsilon(1e-12));
  // Gamma^3 I / (8 Delta^2 I_sat) with the preset's numbers typed in by hand.
  const double gamma = cst::two_pi * 6.0666e6, delta = cst::two_pi * 13.25e9;
  CHECK(g1 == doctest::Approx(gamma * gamma * gamma * 1000.0 / (8.0 * delta * delta * 25.0))
                  .epsilon(1e-12));
  CHECK_THROWS_AS(scattering_rate(rb, l, -1.0), Error);
}

TEST_CASE("polarisability sign and far-detuned limit") {
  const AtomSpecies rb = rubidium87_d2();
  const double red = polarizability(rb, LaserSpec::from_detuning(rb, -cst::two_pi * 10e9));
  const double blue = polarizability(rb, LaserSpec::from_detuning(rb, cst::two_pi * 10e9));
  CHECK(red > 0.0);
  CHECK(blue < 0.0);
  double prev = red;
  for (double ghz : {100.0, 1e3, 1e4, 1e5}) {
    const double a = polarizability(rb, LaserSpec::from_detuning(rb, -cst::two_pi * ghz * 1e9));
    CHECK(a > 0.0);
    CHECK(a < prev);
    prev = a;
  }
  CHECK(prev < red * 1e-3);
}

TEST_CASE("polarisability agrees with the two-level dipole potential") {
  const AtomSpecies rb = rubidium87_d2();
  for (double ghz : {5.0, 13.25, 30.0, 60.0, 100.0}) {
    for (double sign : {-1.0, 1.0}) {
      const LaserSpec l = LaserSpec::from_detuning(rb, sign * cst::two_pi * ghz * 1e9);
      // U / I for a single travelling wave: -alpha / (2 c eps0).
      const double u_per_i = -polarizability(rb, l) / (2.0 * cst::c * cst::epsilon0);
      // Independent dipole oracle, written out here: (3 pi c^2 / 2 w0^3) Gamma / Delta.
      const double w0 = cst::two_pi * 384.2304844685e12;
      const double oracle =
          3.0 * cst::pi * cst::c * cst::c / (2.0 * w0 * w0 * w0) * (cst::two_pi * 6.0666e6) /
          l.detuning;
      CHECK(u_per_i == doctest::Approx(oracle).epsilon(1e-2));
      CHECK(dipole_potential_per_intensity(rb, l) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-beam light shift at the nominal parameters") {
  const AtomSpecies rb = rubidium87_d2();
  const LaserSpec l = LaserSpec::from_detuning(rb, -cst::two_pi * 13.25e9);
  const double i = 2.0 * 42.7e-3 / (cst::pi * 4e-3 * 4e-3);  // peak of a 1/e^2 Gaussian
  const double u = -polarizability(rb, l) * i / (2.0 * cst::c * cst::epsilon0);
  CHECK(cst::to_microkelvin(u) == doctest::Approx(-1.696925).epsilon(1e-3));
}

TEST_CASE("laser parameter bookkeeping") {
  const AtomSpecies rb = rubidium87_d2();
  const LaserSpec l = LaserSpec::from_detuning(rb, -cst::two_pi * 13.25e9);
  CHECK_NOTHROW(l.validate(rb));
  CHECK(l.wavelength > 780.24e-9);
  LaserSpec bad = l;
  bad.wavelength *= 1.01;
  CHECK_THROWS_AS(bad.validate(rb), Error);
  CHECK(is_far_detuned(rb, l));
  CHECK_FALSE(is_far_detuned(rb, LaserSpec::from_detuning(rb, -cst::two_pi * 100e6)));
  CHECK_THROWS_AS(atom_preset("Cs133"), Error);
  CHECK(atom_preset("Rb87-D2").mass == rb.mass);
}
