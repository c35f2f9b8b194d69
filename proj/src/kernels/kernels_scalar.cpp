// Reference kernels. The AVX2 variant mirrors this loop structure lane by lane.

#include <cmath>
#include <vector>

#include "chiplattice/kernels.hpp"

namespace chiplattice::kernels::scalar {

void potential(const PackedField& f, PointsView p, std::span<double> u) {
  const std::size_t groups = f.group_count();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.x[i], y = p.y[i], z = p.z[i];
    double sum = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      double exr = 0, exi = 0, eyr = 0, eyi = 0, ezr = 0, ezi = 0;
      for (std::size_t b = f.group_begin[g]; b < f.group_begin[g + 1]; ++b) {
        const double phi = f.kx[b] * x + f.ky[b] * y + f.kz[b] * z + f.phase[b];
        const double s = std::sin(phi), c = std::cos(phi);
        exr += f.ax_re[b] * c - f.ax_im[b] * s;
        exi += f.ax_re[b] * s + f.ax_im[b] * c;
        eyr += f.ay_re[b] * c - f.ay_im[b] * s;
        eyi += f.ay_re[b] * s + f.ay_im[b] * c;
        ezr += f.az_re[b] * c - f.az_im[b] * s;
        ezi += f.az_re[b] * s + f.az_im[b] * c;
      }
      sum += exr * exr + exi * exi + eyr * eyr + eyi * eyi + ezr * ezr + ezi * ezi;
    }
    u[i] = f.prefactor * sum;
  }
}

// Two passes per group: accumulate E, then d|E|^2/dr = -2 sum_b k_b Im(E* . b_b).
void potential_gradient(const PackedField& f, PointsView p, std::span<double> u,
                        GradientView grad) {
  const std::size_t groups = f.group_count();
  std::vector<double> bre(f.beam_count() * 3), bim(f.beam_count() * 3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p.x[i], y = p.y[i], z = p.z[i];
    double sum = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      double exr = 0, exi = 0, eyr = 0, eyi = 0, ezr = 0, ezi = 0;
      for (std::size_t b = f.group_begin[g]; b < f.group_begin[g + 1]; ++b) {
        const double phi = f.kx[b] * x + f.ky[b] * y + f.kz[b] * z + f.phase[b];
        const double s = std::sin(phi), c = std::cos(phi);
        const double xr = f.ax_re[b] * c - f.ax_im[b] * s, xi = f.ax_re[b] * s + f.ax_im[b] * c;
        const double yr = f.ay_re[b] * c - f.ay_im[b] * s, yi = f.ay_re[b] * s + f.ay_im[b] * c;
        const double zr = f.az_re[b] * c - f.az_im[b] * s, zi = f.az_re[b] * s + f.az_im[b] * c;
        bre[3 * b] = xr, bre[3 * b + 1] = yr, bre[3 * b + 2] = zr;
        bim[3 * b] = xi, bim[3 * b + 1] = yi, bim[3 * b + 2] = zi;
        exr += xr, exi += xi, eyr += yr, eyi += yi, ezr += zr, ezi += zi;
      }
      sum += exr * exr + exi * exi + eyr * eyr + eyi * eyi + ezr * ezr + ezi * ezi;
      for (std::size_t b = f.group_begin[g]; b < f.group_begin[g + 1]; ++b) {
        const double w = (exr * bim[3 * b] - exi * bre[3 * b]) +
                         (eyr * bim[3 * b + 1] - eyi * bre[3 * b + 1]) +
                         (ezr * bim[3 * b + 2] - ezi * bre[3 * b + 2]);
        gx += f.kx[b] * w;
        gy += f.ky[b] * w;
        gz += f.kz[b] * w;
      }
    }
    u[i] = f.prefactor * sum;
    grad.gx[i] = -2.0 * f.prefactor * gx;
    grad.gy[i] = -2.0 * f.prefactor * gy;
    grad.gz[i] = -2.0 * f.prefactor * gz;
  }
}

}  // namespace chiplattice::kernels::scalar
