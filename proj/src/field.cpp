#include "chiplattice/field.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/kernels.hpp"
#include "chiplattice/parallel.hpp"

namespace chiplattice {

namespace cst = constants;
using cd = std::complex<double>;

double Beam::intensity() const { return 0.5 * cst::c * cst::epsilon0 * amplitude * amplitude; }

double Beam::amplitude_for_intensity(double intensity) {
  require(intensity >= 0.0, ErrorKind::invalid_input, "beam intensity must be non-negative");
  return std::sqrt(2.0 * intensity / (cst::c * cst::epsilon0));
}

void validate_beam(const Beam& beam, double wavelength) {
  const double k = cst::two_pi / wavelength;
  require(std::abs(beam.wavevector.norm() - k) <= 1e-12 * k, ErrorKind::invalid_input,
          "beam |k| differs from 2 pi / lambda");
  require(std::abs(beam.polarization.norm() - 1.0) <= 1e-12, ErrorKind::invalid_input,
          "beam polarisation is not a unit vector");
  const cd transverse = beam.polarization.dot(beam.wavevector.cast<cd>());
  require(std::abs(transverse) <= 1e-12 * k, ErrorKind::invalid_input,
          "beam polarisation is not transverse to k");
  require(beam.amplitude >= 0.0 && std::isfinite(beam.amplitude), ErrorKind::invalid_input,
          "beam amplitude must be non-negative");
  require(std::isfinite(beam.phase), ErrorKind::invalid_input, "beam phase must be finite");
}

void BeamSet::validate() const {
  require(wavelength > 0.0 && std::isfinite(wavelength), ErrorKind::invalid_input,
          "beam set wavelength must be positive");
  for (const auto& b : beams) validate_beam(b, wavelength);
  require(std::abs(mirror.normal.norm() - 1.0) <= 1e-12, ErrorKind::invalid_input,
          "mirror normal must be a unit vector");
}

Beam reflect_beam(const Beam& beam, const Mirror& mirror) {
  const Vec3& n = mirror.normal;
  const double kn = beam.wavevector.dot(n);
  require(kn < 0.0, ErrorKind::geometry, "beam propagates away from the mirror (k.n >= 0)");

  Beam out = beam;
  out.wavevector = beam.wavevector - 2.0 * kn * n;
  const CVec3 nc = n.cast<cd>();
  const cd normal_part = nc.dot(beam.polarization);  // conjugates n, which is real
  CVec3 pol = -beam.polarization + 2.0 * normal_part * nc;
  out.polarization = pol / pol.norm();
  out.phase = beam.phase + mirror.reflection_phase + 2.0 * kn * mirror.offset;
  out.reflected = true;
  return out;
}

BeamSet apply_mirror(const BeamSet& set) {
  if (!set.mirror.enabled || set.mirror_applied) return set;
  BeamSet out = set;
  out.beams.reserve(set.beams.size() * 2);
  for (const auto& b : set.beams) {
    if (b.reflected) continue;
    out.beams.push_back(reflect_beam(b, set.mirror));
  }
  out.mirror_applied = true;
  return out;
}

BeamSet expanded(const BeamSet& set) { return apply_mirror(set); }

namespace {

const BeamSet& radiating(const BeamSet& set, BeamSet& storage) {
  if (!set.mirror.enabled || set.mirror_applied) return set;
  storage = apply_mirror(set);
  return storage;
}

}  // namespace

std::map<int, CVec3> complex_field(const BeamSet& set, const Vec3& r) {
  BeamSet storage;
  const BeamSet& full = radiating(set, storage);
  std::map<int, CVec3> fields;
  for (const auto& b : full.beams) {
    const cd w = std::polar(b.amplitude, b.wavevector.dot(r) + b.phase);
    auto [it, inserted] = fields.try_emplace(b.coherence_group, CVec3::Zero());
    it->second += w * b.polarization;
  }
  return fields;
}

PotentialDerivatives potential_derivatives(const BeamSet& set, double alpha, const Vec3& r) {
  // Per group: E = sum b_i with b_i = a_i e^{i phi_i}; dE/dr_d = sum i k_d b_i;
  // d2E/dr_d dr_e = -sum k_d k_e b_i. |E|^2 derivatives follow by the product rule.
  PotentialDerivatives out;
  const double prefactor = -alpha / 4.0;

  std::map<int, std::size_t> slot;
  for (const auto& b : set.beams) slot.try_emplace(b.coherence_group, slot.size());
  const std::size_t groups = slot.size();
  std::vector<CVec3> e(groups, CVec3::Zero());
  std::vector<std::array<CVec3, 3>> de(groups);
  std::vector<std::array<CVec3, 6>> dde(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    de[g].fill(CVec3::Zero());
    dde[g].fill(CVec3::Zero());
  }
  static constexpr int pair_d[6] = {0, 0, 0, 1, 1, 2};
  static constexpr int pair_e[6] = {0, 1, 2, 1, 2, 2};

  for (const auto& b : set.beams) {
    const std::size_t g = slot[b.coherence_group];
    const cd w = std::polar(b.amplitude, b.wavevector.dot(r) + b.phase);
    const CVec3 bv = w * b.polarization;
    e[g] += bv;
    for (int d = 0; d < 3; ++d) de[g][d] += cd(0.0, b.wavevector[d]) * bv;
    for (int p = 0; p < 6; ++p)
      dde[g][p] -= (b.wavevector[pair_d[p]] * b.wavevector[pair_e[p]]) * bv;
  }

  for (std::size_t g = 0; g < groups; ++g) {
    out.value += e[g].squaredNorm();
    for (int d = 0; d < 3; ++d) out.gradient[d] += 2.0 * e[g].dot(de[g][d]).real();
    for (int p = 0; p < 6; ++p) {
      const int d = pair_d[p];
      const int ee = pair_e[p];
      const double h = 2.0 * (de[g][d].dot(de[g][ee]).real() + e[g].dot(dde[g][p]).real());
      out.hessian(d, ee) += h;
      if (d != ee) out.hessian(ee, d) += h;
    }
  }
  out.value *= prefactor;
  out.gradient *= prefactor;
  out.hessian *= prefactor;
  return out;
}

double stark_potential(const BeamSet& set, double alpha, const Vec3& r) {
  double sum = 0.0;
  for (const auto& [group, field] : complex_field(set, r)) sum += field.squaredNorm();
  return -alpha / 4.0 * sum;
}

Vec3 potential_gradient(const BeamSet& set, double alpha, const Vec3& r) {
  BeamSet storage;
  return potential_derivatives(radiating(set, storage), alpha, r).gradient;
}

Mat3 potential_hessian(const BeamSet& set, double alpha, const Vec3& r) {
  BeamSet storage;
  return potential_derivatives(radiating(set, storage), alpha, r).hessian;
}

double constructive_bound(const BeamSet& set, double alpha) {
  BeamSet storage;
  const BeamSet& full = radiating(set, storage);
  std::map<int, double> root_sum;
  for (const auto& b : full.beams) root_sum[b.coherence_group] += std::sqrt(b.intensity());
  double total = 0.0;
  for (const auto& [g, s] : root_sum) total += s * s;
  return alpha / (2.0 * cst::c * cst::epsilon0) * total;
}

double GridAxis::coordinate(std::size_t i) const {
  if (count <= 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

Vec3 PotentialGrid::point(std::size_t index) const {
  const std::size_t nz = axes[2].count;
  const std::size_t ny = axes[1].count;
  const std::size_t iz = index % nz;
  const std::size_t iy = (index / nz) % ny;
  const std::size_t ix = index / (nz * ny);
  return {axes[0].coordinate(ix), axes[1].coordinate(iy), axes[2].coordinate(iz)};
}

PotentialGrid potential_grid(const BeamSet& set, double alpha,
                             const std::array<GridAxis, 3>& axes) {
  for (const auto& a : axes) {
    require(a.count >= 1, ErrorKind::invalid_input, "grid resolution must be positive");
    require(std::isfinite(a.min) && std::isfinite(a.max), ErrorKind::invalid_input,
            "grid bounds must be finite");
    if (a.count == 1) {
      require(a.min == a.max, ErrorKind::invalid_input,
              "a single-sample axis needs equal bounds (fixed coordinate)");
    } else {
      require(a.max > a.min, ErrorKind::invalid_input, "degenerate grid bounds");
    }
  }
  PotentialGrid grid;
  grid.axes = axes;
  const std::size_t n = axes[0].count * axes[1].count * axes[2].count;
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = grid.point(i);
    x[i] = p.x();
    y[i] = p.y();
    z[i] = p.z();
  }
  grid.values.assign(n, 0.0);
  const kernels::PackedField packed = kernels::pack(expanded(set), alpha);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    const std::size_t len = end - begin;
    kernels::potential(packed,
                       {std::span<const double>(x).subspan(begin, len),
                        std::span<const double>(y).subspan(begin, len),
                        std::span<const double>(z).subspan(begin, len)},
                       std::span<double>(grid.values).subspan(begin, len));
  });
  return grid;
}

}  // namespace chiplattice
