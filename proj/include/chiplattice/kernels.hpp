#pragma once

// Batched plane-wave potential evaluation.
//
// Every kernel variant evaluates U(r) = prefactor * sum_groups |sum_i a_i exp(i (k_i.r + phase_i))|^2
// and optionally its gradient over structure-of-arrays point lists. The scalar variant is the
// reference; SIMD variants must agree with it to a few ulps of the constructive bound and are
// selected at runtime.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace chiplattice {
struct BeamSet;
}

namespace chiplattice::kernels {

/// Beams flattened for the inner loops; beams of one coherence group are contiguous.
struct PackedField {
  std::vector<double> kx, ky, kz, phase;
  // Complex amplitude vector a = E0 * polarization, split into real/imag per component.
  std::vector<double> ax_re, ax_im, ay_re, ay_im, az_re, az_im;
  std::vector<std::size_t> group_begin;  // size = groups + 1
  double prefactor = 0.0;                // -alpha / 4

  std::size_t beam_count() const { return kx.size(); }
  std::size_t group_count() const { return group_begin.empty() ? 0 : group_begin.size() - 1; }
};

/// Packs an expanded BeamSet (mirror partners included) for polarisability `alpha`.
PackedField pack(const BeamSet& set, double alpha);

struct PointsView {
  std::span<const double> x, y, z;
  std::size_t size() const { return x.size(); }
};

struct GradientView {
  std::span<double> gx, gy, gz;
};

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Best ISA supported by this CPU and build.
Isa detect_isa();

/// detect_isa(), unless CHIPLATTICE_ISA=scalar forces the reference kernel.
Isa active_isa();

bool isa_available(Isa isa);

void potential(const PackedField& field, PointsView points, std::span<double> u,
               Isa isa = active_isa());

void potential_gradient(const PackedField& field, PointsView points, std::span<double> u,
                        GradientView grad, Isa isa = active_isa());

namespace scalar {
void potential(const PackedField& field, PointsView points, std::span<double> u);
void potential_gradient(const PackedField& field, PointsView points, std::span<double> u,
                        GradientView grad);
}  // namespace scalar

#if defined(CHIPLATTICE_HAVE_AVX2)
namespace avx2 {
void potential(const PackedField& field, PointsView points, std::span<double> u);
void potential_gradient(const PackedField& field, PointsView points, std::span<double> u,
                        GradientView grad);
/// Vectorised sin/cos used by the kernels; exposed for accuracy tests.
void sincos(std::span<const double> x, std::span<double> s, std::span<double> c);
}  // namespace avx2
#endif

}  // namespace chiplattice::kernels
