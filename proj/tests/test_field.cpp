#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/field.hpp"
#include "chiplattice/lattice_models.hpp"

using namespace chiplattice;
namespace cst = chiplattice::constants;
using cd = std::complex<double>;

namespace {

constexpr double kLambda = 780.27e-9;
constexpr double kAlpha = 5.6e-37;  // C m^2 / V, order of the 13 GHz value
constexpr double kI = 850.0;

Beam plane(Vec3 k_dir, CVec3 pol, double intensity, double phase = 0.0, int group = 0) {
  Beam b;
  b.wavevector = k_dir.normalized() * (cst::two_pi / kLambda);
  b.polarization = pol.normalized();
  b.amplitude = Beam::amplitude_for_intensity(intensity);
  b.phase = phase;
  b.coherence_group = group;
  return b;
}

// Direct sum over beams, grouped by coherence group.
double oracle_potential(const BeamSet& full, double alpha, const Vec3& r) {
  std::map<int, CVec3> e;
  for (const auto& b : full.beams) {
    const cd ph = std::exp(cd(0.0, b.wavevector.dot(r) + b.phase));
    auto [it, fresh] = e.try_emplace(b.coherence_group, CVec3::Zero());
    it->second += b.amplitude * ph * b.polarization;
  }
  double s = 0.0;
  for (const auto& [g, v] : e) s += v.squaredNorm();
  return -alpha / 4.0 * s;
}

BeamSet acl() {
  AclConfig c = AclConfig::uniform(kI, kLambda);
  return build_acl(c);
}

Vec3 random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), std::abs(u(rng)));
}

}  // namespace

TEST_CASE("normal-incidence reflection") {
  Mirror m;
  m.enabled = true;
  const Beam in = plane(Vec3(0, 0, -1), CVec3(1, 0, 0), kI);
  const Beam out = reflect_beam(in, m);
  const double k = cst::two_pi / kLambda;
  CHECK((out.wavevector - Vec3(0, 0, k)).norm() < 1e-9 * k);
  CHECK((out.polarization - CVec3(-1, 0, 0)).norm() < 1e-15);
  CHECK(out.reflected);
  CHECK(out.amplitude == in.amplitude);

  const Beam away = plane(Vec3(0, 0, 1), CVec3(1, 0, 0), kI);
  CHECK_THROWS_AS(reflect_beam(away, m), Error);
}

TEST_CASE("apply_mirror") {
  BeamSet s = acl();
  CHECK(s.beams.size() == 3);
  const BeamSet full = apply_mirror(s);
  CHECK(full.beams.size() == 6);
  CHECK(apply_mirror(full).beams.size() == 6);

  BeamSet empty;
  empty.wavelength = kLambda;
  empty.mirror.enabled = true;
  CHECK(apply_mirror(empty).beams.empty());

  BeamSet off = s;
  off.mirror.enabled = false;
  const BeamSet same = apply_mirror(off);
  REQUIRE(same.beams.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same.beams[i].wavevector == off.beams[i].wavevector);
}

TEST_CASE("single beam and standing wave intensities") {
  BeamSet s;
  s.wavelength = kLambda;
  s.beams = {plane(Vec3(0, 0, -1), CVec3(1, 0, 0), kI)};
  const double e0 = s.beams[0].amplitude;
  for (double z : {0.0, 0.1234e-6, 0.5e-6}) {
    const auto e = complex_field(s, Vec3(0.3e-6, 0, z));
    CHECK(e.at(0).norm() == doctest::Approx(e0).epsilon(1e-12));
  }

  s.beams.push_back(plane(Vec3(0, 0, 1), CVec3(1, 0, 0), kI));
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double z = kLambda * i / 400.0;
    const double e2 = complex_field(s, Vec3(0, 0, z)).at(0).squaredNorm();
    lo = std::min(lo, e2);
    hi = std::max(hi, e2);
    const double e2_half = complex_field(s, Vec3(0, 0, z + kLambda / 2.0)).at(0).squaredNorm();
    CHECK(e2_half == doctest::Approx(e2).epsilon(1e-9).scale(e0 * e0));
  }
  CHECK(lo < 1e-12 * e0 * e0);
  CHECK(hi == doctest::Approx(4.0 * e0 * e0).epsilon(1e-9));

  // Counter-propagating beams in different groups add intensities, no fringes.
  s.beams[1].coherence_group = 1;
  for (double z : {0.0, 0.1e-6, 0.2e-6})
    CHECK(stark_potential(s, kAlpha, Vec3(0, 0, z)) ==
          doctest::Approx(-kAlpha / 4.0 * 2.0 * e0 * e0).epsilon(1e-12));
}

TEST_CASE("potential matches a direct plane-wave sum") {
  const BeamSet full = expanded(acl());
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r = random_point(rng, 3 * kLambda);
    CHECK(stark_potential(full, kAlpha, r) ==
          doctest::Approx(oracle_potential(full, kAlpha, r)).epsilon(1e-12));
  }
  CHECK(stark_potential(full, 0.0, Vec3(1e-7, 2e-7, 3e-7)) == 0.0);
}

TEST_CASE("analytic gradient and Hessian agree with finite differences") {
  const BeamSet full = expanded(acl());
  const double h = kLambda / 1e4;
  std::mt19937_64 rng(11);
  const double scale = constructive_bound(full, kAlpha);
  for (int n = 0; n < 100; ++n) {
    const Vec3 r = random_point(rng, 2 * kLambda);
    const PotentialDerivatives d = potential_derivatives(full, kAlpha, r);
    CHECK(d.value == doctest::Approx(stark_potential(full, kAlpha, r)).epsilon(1e-13));
    Vec3 g_fd;
    Mat3 h_fd;
    for (int a = 0; a < 3; ++a) {
      Vec3 ea = Vec3::Zero();
      ea[a] = h;
      g_fd[a] = (stark_potential(full, kAlpha, r + ea) - stark_potential(full, kAlpha, r - ea)) /
                (2 * h);
      h_fd.col(a) = (potential_gradient(full, kAlpha, r + ea) -
                     potential_gradient(full, kAlpha, r - ea)) / (2 * h);
    }
    // Relative to the natural magnitudes k |U| and k^2 |U|.
    const double k = cst::two_pi / kLambda;
    CHECK((d.gradient - g_fd).norm() < 1e-6 * k * scale);
    CHECK((d.hessian - h_fd).norm() < 1e-6 * k * k * scale);
    CHECK((d.gradient - potential_gradient(full, kAlpha, r)).norm() < 1e-12 * k * scale);
    CHECK((d.hessian - potential_hessian(full, kAlpha, r)).norm() < 1e-12 * k * k * scale);
  }
}

TEST_CASE("gradient vanishes and Hessian is isotropic at an ACL minimum") {
  const BeamSet full = expanded(acl());
  const Vec3 site(0, 0, kLambda * std::sqrt(3.0) / 4.0);
  const PotentialDerivatives d = potential_derivatives(full, kAlpha, site);
  CHECK(d.gradient.norm() < 1e-9 * std::abs(d.value) / kLambda);
  Eigen::SelfAdjointEigenSolver<Mat3> es(d.hessian);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff() <
        1e-9 * es.eigenvalues().maxCoeff());
}

TEST_CASE("invariants") {
  const BeamSet full = expanded(acl());
  std::mt19937_64 rng(3);
  const double bound = constructive_bound(full, kAlpha);
  // (alpha / 2 c eps0) (sum sqrt I)^2 over six beams
  CHECK(bound ==
        doctest::Approx(kAlpha / (2 * cst::c * cst::epsilon0) * 36.0 * kI).epsilon(1e-12));
  BeamSet shifted = full;
  for (auto& b : shifted.beams) b.phase += 1.234;
  for (int i = 0; i < 100; ++i) {
    const Vec3 r = random_point(rng, 2 * kLambda);
    const double u = stark_potential(full, kAlpha, r);
    CHECK(u <= 0.0);
    CHECK(u >= -bound * (1 + 1e-12));
    CHECK(stark_potential(shifted, kAlpha, r) == doctest::Approx(u).epsilon(1e-12).scale(bound));
  }
}

TEST_CASE("potential grids") {
  const BeamSet full = expanded(acl());
  std::array<GridAxis, 3> axes{GridAxis{0.0, kLambda, 2}, GridAxis{-kLambda, 0.0, 2},
                               GridAxis{0.1 * kLambda, 0.9 * kLambda, 2}};
  const PotentialGrid g = potential_grid(full, kAlpha, axes);
  REQUIRE(g.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    const Vec3 p = g.point(i);
    CHECK(p.x() == axes[0].coordinate(i / 4));
    CHECK(p.z() == axes[2].coordinate(i % 2));
    CHECK(g.values[i] == doctest::Approx(stark_potential(full, kAlpha, p)).epsilon(1e-12));
  }

  // One point: fixed axes only.
  std::array<GridAxis, 3> one{GridAxis{1e-7, 1e-7, 1}, GridAxis{0, 0, 1}, GridAxis{2e-7, 2e-7, 1}};
  CHECK(potential_grid(full, kAlpha, one).size() == 1);
  std::array<GridAxis, 3> bad{GridAxis{0, 1e-7, 1}, GridAxis{0, 0, 1}, GridAxis{0, 0, 1}};
  CHECK_THROWS_AS(potential_grid(full, kAlpha, bad), Error);

  // y = 0 slice along z at x = 0: the site layers repeat every lambda sqrt3 / 2, two minima
  // per lambda sqrt 3 along z.
  const int n = 2000;
  std::array<GridAxis, 3> line{GridAxis{0, 0, 1}, GridAxis{0, 0, 1},
                               GridAxis{0.0, kLambda * std::sqrt(3.0), n}};
  const PotentialGrid zl = potential_grid(full, kAlpha, line);
  int minima = 0;
  for (int i = 1; i + 1 < n; ++i)
    if (zl.values[i] < zl.values[i - 1] && zl.values[i] < zl.values[i + 1] &&
        zl.values[i] < 0.5 * acl_reference_depth(kI, kAlpha))
      ++minima;
  CHECK(minima == 2);
}

TEST_CASE("lattice periodicity") {
  const BeamSet full = expanded(acl());
  const Vec3 r1 = kLambda * Vec3(std::sqrt(2.0 / 3.0), 0, 0);
  const Vec3 r2 = kLambda * Vec3(std::sqrt(1.0 / 6.0), std::sqrt(0.5), 0);
  const Vec3 r3 = kLambda * Vec3(0, 0, std::sqrt(3.0) / 2.0);
  const double depth = std::abs(acl_reference_depth(kI, kAlpha));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 r = random_point(rng, kLambda);
    const double u = stark_potential(full, kAlpha, r);
    for (const Vec3& t : {r1, r2, r3})
      CHECK(std::abs(stark_potential(full, kAlpha, r + t) - u) < 1e-10 * depth);
  }
}

TEST_CASE("beam validation") {
  Beam b = plane(Vec3(0, 0, -1), CVec3(1, 0, 0), kI);
  CHECK_NOTHROW(validate_beam(b, kLambda));
  Beam longitudinal = b;
  longitudinal.polarization = CVec3(0, 0, 1);
  CHECK_THROWS_AS(validate_beam(longitudinal, kLambda), Error);
  Beam wrong_k = b;
  wrong_k.wavevector *= 1.01;
  CHECK_THROWS_AS(validate_beam(wrong_k, kLambda), Error);
  CHECK_THROWS_AS(Beam::amplitude_for_intensity(-1.0), Error);
}
