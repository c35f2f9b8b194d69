// AVX2 + FMA variants of the plane-wave kernels, four points per lane group.
// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "chiplattice/kernels.hpp"

namespace chiplattice::kernels::avx2 {

namespace {

constexpr std::size_t kMaxGroupBeams = 32;

// pi/2 split into three 33-bit pieces (fdlibm), so n * piece is exact for |n| < 2^20.
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_2 = 6.07710050630396597660e-11;
constexpr double kPio2_3 = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;

// Minimax polynomials on |r| <= pi/4 (Cephes sin.c).
constexpr double kSin[6] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                            2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                            8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCos[6] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                            -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                            -1.38888888888730564116e-3,  4.16666666666665929218e-2};

inline __m256d poly6(__m256d z, const double (&c)[6]) {
  __m256d p = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 6; ++i) p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[i]));
  return p;
}

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_2), r);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2_3), r);

  const __m256d z = _mm256_mul_pd(r, r);
  const __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(r, z), poly6(z, kSin), r);
  const __m256d cr = _mm256_fmadd_pd(_mm256_mul_pd(z, z), poly6(z, kCos),
                                     _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

  // Quadrant q = n mod 4: q odd swaps sin/cos; sin negated for q in {2,3}, cos for q in {1,2}.
  const __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d sin_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
  const __m256d cos_neg = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), two));
  const __m256d sign = _mm256_set1_pd(-0.0);

  __m256d s = _mm256_blendv_pd(sr, cr, swap);
  __m256d c = _mm256_blendv_pd(cr, sr, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(sin_neg, sign));
  c = _mm256_xor_pd(c, _mm256_and_pd(cos_neg, sign));
  s_out = s;
  c_out = c;
}

struct Lanes {
  __m256d x, y, z;
};

inline Lanes load_points(const double* x, const double* y, const double* z, std::size_t i,
                         std::size_t n) {
  if (i + 4 <= n) return {_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i)};
  // Tail: padded so that every point goes through the same vector arithmetic.
  alignas(32) double bx[4] = {0, 0, 0, 0}, by[4] = {0, 0, 0, 0}, bz[4] = {0, 0, 0, 0};
  for (std::size_t j = 0; i + j < n; ++j) bx[j] = x[i + j], by[j] = y[i + j], bz[j] = z[i + j];
  return {_mm256_load_pd(bx), _mm256_load_pd(by), _mm256_load_pd(bz)};
}

inline void store(double* out, std::size_t i, std::size_t n, __m256d v) {
  if (i + 4 <= n) {
    _mm256_storeu_pd(out + i, v);
    return;
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, v);
  for (std::size_t j = 0; i + j < n; ++j) out[i + j] = buf[j];
}

inline __m256d phase_of(const PackedField& f, std::size_t b, const Lanes& p) {
  __m256d phi = _mm256_set1_pd(f.phase[b]);
  phi = _mm256_fmadd_pd(_mm256_set1_pd(f.kx[b]), p.x, phi);
  phi = _mm256_fmadd_pd(_mm256_set1_pd(f.ky[b]), p.y, phi);
  phi = _mm256_fmadd_pd(_mm256_set1_pd(f.kz[b]), p.z, phi);
  return phi;
}

// (a_re + i a_im)(c + i s)
inline void cmul(double are, double aim, __m256d c, __m256d s, __m256d& re, __m256d& im) {
  const __m256d ar = _mm256_set1_pd(are), ai = _mm256_set1_pd(aim);
  re = _mm256_fmsub_pd(ar, c, _mm256_mul_pd(ai, s));
  im = _mm256_fmadd_pd(ar, s, _mm256_mul_pd(ai, c));
}

inline __m256d norm2(__m256d a, __m256d b, __m256d c, __m256d d, __m256d e, __m256d f) {
  __m256d s = _mm256_mul_pd(a, a);
  s = _mm256_fmadd_pd(b, b, s);
  s = _mm256_fmadd_pd(c, c, s);
  s = _mm256_fmadd_pd(d, d, s);
  s = _mm256_fmadd_pd(e, e, s);
  return _mm256_fmadd_pd(f, f, s);
}

bool fits(const PackedField& f) {
  for (std::size_t g = 0; g < f.group_count(); ++g)
    if (f.group_begin[g + 1] - f.group_begin[g] > kMaxGroupBeams) return false;
  return true;
}

}  // namespace

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; i += 4) {
    alignas(32) double buf[4] = {0, 0, 0, 0};
    for (std::size_t j = 0; j < 4 && i + j < n; ++j) buf[j] = x[i + j];
    __m256d sv, cv;
    sincos4(_mm256_load_pd(buf), sv, cv);
    store(s.data(), i, n, sv);
    store(c.data(), i, n, cv);
  }
}

void potential(const PackedField& f, PointsView p, std::span<double> u) {
  if (!fits(f)) return scalar::potential(f, p, u);
  const std::size_t n = p.size();
  const __m256d pre = _mm256_set1_pd(f.prefactor);
  for (std::size_t i = 0; i < n; i += 4) {
    const Lanes pt = load_points(p.x.data(), p.y.data(), p.z.data(), i, n);
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t g = 0; g < f.group_count(); ++g) {
      __m256d exr = _mm256_setzero_pd(), exi = exr, eyr = exr, eyi = exr, ezr = exr, ezi = exr;
      for (std::size_t b = f.group_begin[g]; b < f.group_begin[g + 1]; ++b) {
        __m256d s, c, re, im;
        sincos4(phase_of(f, b, pt), s, c);
        cmul(f.ax_re[b], f.ax_im[b], c, s, re, im);
        exr = _mm256_add_pd(exr, re), exi = _mm256_add_pd(exi, im);
        cmul(f.ay_re[b], f.ay_im[b], c, s, re, im);
        eyr = _mm256_add_pd(eyr, re), eyi = _mm256_add_pd(eyi, im);
        cmul(f.az_re[b], f.az_im[b], c, s, re, im);
        ezr = _mm256_add_pd(ezr, re), ezi = _mm256_add_pd(ezi, im);
      }
      sum = _mm256_add_pd(sum, norm2(exr, exi, eyr, eyi, ezr, ezi));
    }
    store(u.data(), i, n, _mm256_mul_pd(pre, sum));
  }
}

void potential_gradient(const PackedField& f, PointsView p, std::span<double> u,
                        GradientView grad) {
  if (!fits(f)) return scalar::potential_gradient(f, p, u, grad);
  const std::size_t n = p.size();
  const __m256d pre = _mm256_set1_pd(f.prefactor);
  const __m256d gpre = _mm256_set1_pd(-2.0 * f.prefactor);
  alignas(32) double bre[kMaxGroupBeams * 3 * 4];
  alignas(32) double bim[kMaxGroupBeams * 3 * 4];
  for (std::size_t i = 0; i < n; i += 4) {
    const Lanes pt = load_points(p.x.data(), p.y.data(), p.z.data(), i, n);
    __m256d sum = _mm256_setzero_pd();
    __m256d gx = _mm256_setzero_pd(), gy = gx, gz = gx;
    for (std::size_t g = 0; g < f.group_count(); ++g) {
      const std::size_t b0 = f.group_begin[g];
      __m256d exr = _mm256_setzero_pd(), exi = exr, eyr = exr, eyi = exr, ezr = exr, ezi = exr;
      for (std::size_t b = b0; b < f.group_begin[g + 1]; ++b) {
        __m256d s, c, xr, xi, yr, yi, zr, zi;
        sincos4(phase_of(f, b, pt), s, c);
        cmul(f.ax_re[b], f.ax_im[b], c, s, xr, xi);
        cmul(f.ay_re[b], f.ay_im[b], c, s, yr, yi);
        cmul(f.az_re[b], f.az_im[b], c, s, zr, zi);
        double* r = bre + (b - b0) * 12;
        double* m = bim + (b - b0) * 12;
        _mm256_store_pd(r, xr), _mm256_store_pd(r + 4, yr), _mm256_store_pd(r + 8, zr);
        _mm256_store_pd(m, xi), _mm256_store_pd(m + 4, yi), _mm256_store_pd(m + 8, zi);
        exr = _mm256_add_pd(exr, xr), exi = _mm256_add_pd(exi, xi);
        eyr = _mm256_add_pd(eyr, yr), eyi = _mm256_add_pd(eyi, yi);
        ezr = _mm256_add_pd(ezr, zr), ezi = _mm256_add_pd(ezi, zi);
      }
      sum = _mm256_add_pd(sum, norm2(exr, exi, eyr, eyi, ezr, ezi));
      for (std::size_t b = b0; b < f.group_begin[g + 1]; ++b) {
        const double* r = bre + (b - b0) * 12;
        const double* m = bim + (b - b0) * 12;
        __m256d w = _mm256_fmsub_pd(exr, _mm256_load_pd(m), _mm256_mul_pd(exi, _mm256_load_pd(r)));
        w = _mm256_add_pd(
            w, _mm256_fmsub_pd(eyr, _mm256_load_pd(m + 4), _mm256_mul_pd(eyi, _mm256_load_pd(r + 4))));
        w = _mm256_add_pd(
            w, _mm256_fmsub_pd(ezr, _mm256_load_pd(m + 8), _mm256_mul_pd(ezi, _mm256_load_pd(r + 8))));
        gx = _mm256_fmadd_pd(_mm256_set1_pd(f.kx[b]), w, gx);
        gy = _mm256_fmadd_pd(_mm256_set1_pd(f.ky[b]), w, gy);
        gz = _mm256_fmadd_pd(_mm256_set1_pd(f.kz[b]), w, gz);
      }
    }
    store(u.data(), i, n, _mm256_mul_pd(pre, sum));
    store(grad.gx.data(), i, n, _mm256_mul_pd(gpre, gx));
    store(grad.gy.data(), i, n, _mm256_mul_pd(gpre, gy));
    store(grad.gz.data(), i, n, _mm256_mul_pd(gpre, gz));
  }
}

}  // namespace chiplattice::kernels::avx2
