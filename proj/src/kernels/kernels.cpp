#include "chiplattice/kernels.hpp"

#include <cstdlib>
#include <map>
#include <string>

#include "chiplattice/error.hpp"
#include "chiplattice/field.hpp"

namespace chiplattice::kernels {

PackedField pack(const BeamSet& set, double alpha) {
  require(!set.mirror.enabled || set.mirror_applied, ErrorKind::invalid_input,
          "pack() needs a mirror-expanded beam set");
  std::map<int, std::vector<const Beam*>> groups;
  for (const auto& b : set.beams) groups[b.coherence_group].push_back(&b);

  PackedField f;
  f.prefactor = -alpha / 4.0;
  f.group_begin.push_back(0);
  for (const auto& [g, members] : groups) {
    for (const Beam* b : members) {
      f.kx.push_back(b->wavevector.x());
      f.ky.push_back(b->wavevector.y());
      f.kz.push_back(b->wavevector.z());
      f.phase.push_back(b->phase);
      const CVec3 a = b->amplitude * b->polarization;
      f.ax_re.push_back(a.x().real());
      f.ax_im.push_back(a.x().imag());
      f.ay_re.push_back(a.y().real());
      f.ay_im.push_back(a.y().imag());
      f.az_re.push_back(a.z().real());
      f.az_im.push_back(a.z().imag());
    }
    f.group_begin.push_back(f.kx.size());
  }
  return f;
}

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(CHIPLATTICE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() { return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() {
  static const Isa chosen = [] {
    const char* env = std::getenv("CHIPLATTICE_ISA");
    if (env != nullptr && std::string(env) == "scalar") return Isa::scalar;
    return detect_isa();
  }();
  return chosen;
}

namespace {

void check_sizes(PointsView p, std::span<double> u) {
  require(p.y.size() == p.x.size() && p.z.size() == p.x.size() && u.size() == p.x.size(),
          ErrorKind::invalid_input, "kernel input spans differ in length");
}

}  // namespace

void potential(const PackedField& field, PointsView points, std::span<double> u, Isa isa) {
  check_sizes(points, u);
#if defined(CHIPLATTICE_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) return avx2::potential(field, points, u);
#endif
  (void)isa;
  scalar::potential(field, points, u);
}

void potential_gradient(const PackedField& field, PointsView points, std::span<double> u,
                        GradientView grad, Isa isa) {
  check_sizes(points, u);
  require(grad.gx.size() == u.size() && grad.gy.size() == u.size() && grad.gz.size() == u.size(),
          ErrorKind::invalid_input, "gradient spans differ in length");
#if defined(CHIPLATTICE_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_available(Isa::avx2))
    return avx2::potential_gradient(field, points, u, grad);
#endif
  (void)isa;
  scalar::potential_gradient(field, points, u, grad);
}

}  // namespace chiplattice::kernels
