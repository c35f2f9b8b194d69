#include "chiplattice/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/kernels.hpp"
#include "chiplattice/parallel.hpp"

namespace chiplattice {

namespace cst = constants;

bool Box::contains(const Vec3& r, double margin) const {
  for (int d = 0; d < 3; ++d)
    if (r[d] < lo[d] - margin || r[d] > hi[d] + margin) return false;
  return true;
}

namespace {

// Lexicographic order on quantised coordinates so that points equal to within `q` sort
// consistently.
using Key = std::tuple<long long, long long, long long>;
Key quantise(const Vec3& v, double q) {
  return {std::llround(v.x() / q), std::llround(v.y() / q), std::llround(v.z() / q)};
}

void sort_positions(std::vector<Minimum>& ms, double q) {
  std::sort(ms.begin(), ms.end(), [q](const Minimum& a, const Minimum& b) {
    return quantise(a.position, q) < quantise(b.position, q);
  });
}

void dedupe(std::vector<Minimum>& ms, double radius) {
  std::vector<Minimum> out;
  for (const auto& m : ms) {
    bool dup = false;
    for (const auto& o : out)
      if ((o.position - m.position).norm() < radius) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(m);
  }
  ms.swap(out);
}

}  // namespace

std::optional<Minimum> descend(const BeamSet& set, double alpha, const Vec3& start,
                               const DescentOptions& opt) {
  const double lambda = set.wavelength;
  const double scale = constructive_bound(set, alpha);
  if (!(scale > 0.0)) return std::nullopt;
  const double gtol = opt.gradient_tol * scale / lambda;
  const double curvature_floor = 1e-3 * scale / (lambda * lambda);

  Vec3 r = start;
  PotentialDerivatives d = potential_derivatives(set, alpha, r);
  for (int it = 0; it < opt.max_iterations && d.gradient.norm() >= gtol; ++it) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(d.hessian);
    const Vec3 ev = es.eigenvalues();
    const bool convex = ev.minCoeff() > curvature_floor;
    Vec3 step = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = es.eigenvectors().col(i);
      step -= v * (v.dot(d.gradient) / std::max(std::abs(ev[i]), curvature_floor));
    }
    const double cap = lambda / 8.0;
    if (step.norm() > cap) step *= cap / step.norm();

    // Close to a convex minimum the full Newton step is taken as is: the energy decrease
    // drops below rounding long before the gradient does.
    if (convex && step.norm() < 1e-3 * lambda) {
      r += step;
      d = potential_derivatives(set, alpha, r);
      continue;
    }
    const double slope = d.gradient.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec3 trial = r + t * step;
      PotentialDerivatives dt = potential_derivatives(set, alpha, trial);
      if (dt.value <= d.value + 1e-4 * t * slope) {
        r = trial;
        d = dt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (d.gradient.norm() >= 100.0 * gtol) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Mat3> es(d.hessian, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-9 * scale / (lambda * lambda)) return std::nullopt;
  return Minimum{r, d.value};
}

MinimaSet find_minima(const BeamSet& set, double alpha, const Box& cell, int seed_resolution) {
  require(seed_resolution >= 2, ErrorKind::invalid_input, "seed resolution must be >= 2");
  for (int d = 0; d < 3; ++d)
    require(cell.hi[d] > cell.lo[d], ErrorKind::invalid_input, "degenerate search box");
  if (!(alpha > 0.0))
    fail(ErrorKind::empty_result, "no trapping minima: polarisability is not positive");
  const BeamSet full = expanded(set);
  const double lambda = full.wavelength;

  const int n = seed_resolution;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  std::vector<std::optional<Minimum>> found(total);
  parallel_for(total, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t ix = s / (n * n), iy = (s / n) % n, iz = s % n;
      const Vec3 frac((ix + 0.5) / n, (iy + 0.5) / n, (iz + 0.5) / n);
      const Vec3 seed = cell.lo + frac.cwiseProduct(cell.hi - cell.lo);
      found[s] = descend(full, alpha, seed);
    }
  });

  std::vector<Minimum> all;
  for (const auto& f : found)
    if (f && cell.contains(f->position, lambda / 100.0)) all.push_back(*f);
  if (all.empty()) fail(ErrorKind::empty_result, "no local minima found in the search box");

  const double q = lambda * 1e-6;
  sort_positions(all, q);
  dedupe(all, lambda / 100.0);

  MinimaSet out;
  out.u_min = std::numeric_limits<double>::infinity();
  for (const auto& m : all) out.u_min = std::min(out.u_min, m.value);
  for (const auto& m : all) {
    if (std::abs(m.value - out.u_min) <= 1e-6 * std::abs(out.u_min))
      out.sites.push_back(m);
    else
      out.secondary.push_back(m);
  }
  return out;
}

std::array<double, 3> trap_frequencies(const BeamSet& set, double alpha, const Vec3& minimum,
                                       double mass) {
  require(mass > 0.0, ErrorKind::invalid_input, "mass must be positive");
  const Mat3 h = potential_hessian(set, alpha, minimum);
  Eigen::SelfAdjointEigenSolver<Mat3> es(h, Eigen::EigenvaluesOnly);
  const Vec3 ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0))
    fail(ErrorKind::not_a_minimum, "Hessian is not positive definite at the given point");
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) f[i] = std::sqrt(ev[i] / mass) / cst::two_pi;
  return f;
}

double fourth_derivative(const std::function<double(double)>& f, double h) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::invalid_input, "degenerate stencil step");
  auto stencil = [&](double s) {
    const double f0 = f(0.0);
    const double d = -(f(-3 * s) + f(3 * s)) + 12.0 * (f(-2 * s) + f(2 * s)) -
                     39.0 * (f(-s) + f(s)) + 56.0 * f0;
    return d / (6.0 * s * s * s * s);
  };
  // The 7-point stencil is fourth order in h.
  return (16.0 * stencil(h / 2.0) - stencil(h)) / 15.0;
}

Quartics quartic_derivatives(const BeamSet& set, double alpha, const Vec3& minimum) {
  const BeamSet full = expanded(set);
  const double h = full.wavelength / 50.0;
  auto along = [&](const Vec3& u) {
    return fourth_derivative(
        [&](double s) { return stark_potential(full, alpha, minimum + s * u); }, h);
  };
  return {along(Vec3::UnitX()), along(Vec3::UnitZ())};
}

// ---- minimum-energy path ------------------------------------------------------------------

BarrierResult min_barrier(const BeamSet& set, double alpha, const Vec3& a, const Vec3& b,
                          const NebOptions& opt) {
  require(opt.images >= 3, ErrorKind::invalid_input, "path needs at least 3 images");
  const BeamSet full = expanded(set);
  const double lambda = full.wavelength;
  const kernels::PackedField packed = kernels::pack(full, alpha);

  const double ua = stark_potential(full, alpha, a);
  const double ub = stark_potential(full, alpha, b);
  const double u_ref = std::min(ua, ub);
  require(u_ref < 0.0, ErrorKind::invalid_input, "path endpoints must be attractive minima");
  const double escale = std::abs(u_ref);

  // Images in units of lambda, energies in |U_min|.
  const int n = opt.images;
  std::vector<Vec3> r(n), moved(n);
  const Vec3 ra = a / lambda, rb = b / lambda;
  const Vec3 seg = rb - ra;
  Vec3 perp = opt.bump_direction - opt.bump_direction.dot(seg.normalized()) * seg.normalized();
  if (perp.norm() < 1e-12) perp = seg.unitOrthogonal();
  perp.normalize();
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    r[i] = ra + s * seg + opt.bump * std::sin(cst::pi * s) * perp;
  }

  std::vector<double> px(n), py(n), pz(n), e(n), gx(n), gy(n), gz(n);
  auto evaluate = [&] {
    for (int i = 0; i < n; ++i) {
      px[i] = r[i].x() * lambda;
      py[i] = r[i].y() * lambda;
      pz[i] = r[i].z() * lambda;
    }
    kernels::potential_gradient(packed, {px, py, pz}, e, {gx, gy, gz});
    for (int i = 0; i < n; ++i) {
      e[i] /= escale;
      gx[i] *= lambda / escale;
      gy[i] *= lambda / escale;
      gz[i] *= lambda / escale;
    }
  };
  // Redistribute the images at equal arc length along the piecewise-linear string.
  auto reparametrise = [&] {
    std::vector<double> s(n, 0.0);
    for (int i = 1; i < n; ++i) s[i] = s[i - 1] + (r[i] - r[i - 1]).norm();
    std::vector<Vec3> out(n);
    out[0] = r[0];
    out[n - 1] = r[n - 1];
    int j = 1;
    for (int i = 1; i < n - 1; ++i) {
      const double target = s[n - 1] * i / (n - 1);
      while (j < n - 1 && s[j] < target) ++j;
      const double w = (target - s[j - 1]) / std::max(s[j] - s[j - 1], 1e-300);
      out[i] = r[j - 1] + w * (r[j] - r[j - 1]);
    }
    r.swap(out);
  };

  // Steepest descent of every interior image, well inside the stability limit of the
  // steepest curvature (|U''| <= (2 pi)^2 * bound / |U_min|).
  const double bound = constructive_bound(full, alpha) / escale;
  const double dt = 0.5 / (cst::two_pi * cst::two_pi * bound);
  int it = 0;
  double shift = std::numeric_limits<double>::infinity();
  for (; it < opt.max_iterations; ++it) {
    evaluate();
    moved = r;
    for (int i = 1; i < n - 1; ++i) {
      Vec3 step = -dt * Vec3(gx[i], gy[i], gz[i]);
      if (step.norm() > 0.01) step *= 0.01 / step.norm();
      r[i] += step;
    }
    reparametrise();
    shift = 0.0;
    for (int i = 1; i < n - 1; ++i) shift = std::max(shift, (r[i] - moved[i]).norm() / dt);
    if (shift < opt.tolerance) break;
  }
  evaluate();
  int top = 1;
  for (int i = 2; i < n - 1; ++i)
    if (e[i] > e[top]) top = i;
  // Not converged: accept only if the string is stationary to the resolution the saddle
  // refinement below can fix.
  if (shift >= opt.tolerance && shift > 1e-4)
    fail(ErrorKind::convergence, "minimum-energy path did not converge: image drift " +
                                     std::to_string(shift) + " |U_min|/lambda after " +
                                     std::to_string(it) + " iterations");

  // Eigenvector following from the highest image: climb along the Hessian mode best aligned
  // with the path, descend along the others.
  const Vec3 tangent = (r[top + 1] - r[top - 1]).normalized();
  Vec3 saddle = r[top] * lambda;
  const double gtol = opt.tolerance * escale / lambda;
  const double floor = 1e-3 * escale / (lambda * lambda);
  Vec3 mode = tangent;
  PotentialDerivatives d = potential_derivatives(full, alpha, saddle);
  for (int k = 0; k < 200 && d.gradient.norm() >= gtol; ++k) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(d.hessian);
    int m = 0;
    for (int c = 1; c < 3; ++c)
      if (std::abs(es.eigenvectors().col(c).dot(mode)) > std::abs(es.eigenvectors().col(m).dot(mode)))
        m = c;
    mode = es.eigenvectors().col(m);
    Vec3 step = Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
      const Vec3 v = es.eigenvectors().col(c);
      const double w = v.dot(d.gradient) / std::max(std::abs(es.eigenvalues()[c]), floor);
      step += (c == m ? w : -w) * v;
    }
    const double cap = lambda / 50.0;
    if (step.norm() > cap) step *= cap / step.norm();
    saddle += step;
    d = potential_derivatives(full, alpha, saddle);
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(d.hessian, Eigen::EigenvaluesOnly);
  const int negative = static_cast<int>((es.eigenvalues().array() < 0.0).count());
  if (d.gradient.norm() >= 100.0 * gtol || negative != 1 ||
      (saddle / lambda - r[top]).norm() > 0.1)
    fail(ErrorKind::convergence, "saddle refinement did not converge on a first-order saddle");

  BarrierResult res;
  res.saddle = saddle;
  res.saddle_value = d.value;
  res.barrier = d.value - u_ref;
  res.max_perpendicular_force = d.gradient.norm() * lambda / escale;
  res.iterations = it;
  return res;
}

// ---- Bravais reduction ----------------------------------------------------------------------

namespace {

// First component larger than `tol` * |v| made positive.
Vec3 sign_normalised(const Vec3& v) {
  const double tol = 1e-6 * v.norm();
  for (int d = 0; d < 3; ++d) {
    if (v[d] > tol) return v;
    if (v[d] < -tol) return -v;
  }
  return v;
}

// Ascending length, then descending x, y, z.
using OrderKey = std::tuple<long long, long long, long long, long long>;
OrderKey order_key(const Vec3& v, double q) {
  return {std::llround(v.norm() / q), -std::llround(v.x() / q), -std::llround(v.y() / q),
          -std::llround(v.z() / q)};
}

}  // namespace

PrincipalVectors principal_vectors(const std::vector<Vec3>& minima, double wavelength,
                                   const std::function<bool(const Vec3&)>& is_translation) {
  require(wavelength > 0.0, ErrorKind::invalid_input, "wavelength must be positive");
  require(minima.size() >= 4, ErrorKind::invalid_input,
          "at least four minima are needed to span a 3D lattice");
  const double tol = wavelength / 100.0;
  const double q = wavelength * 1e-6;

  Box bbox{minima.front(), minima.front()};
  for (const auto& m : minima) {
    bbox.lo = bbox.lo.cwiseMin(m);
    bbox.hi = bbox.hi.cwiseMax(m);
  }
  auto geometric = [&](const Vec3& d) {
    int matches = 0;
    for (const auto& m : minima) {
      const Vec3 target = m + d;
      if (!bbox.contains(target, tol)) continue;
      bool hit = false;
      for (const auto& o : minima)
        if ((o - target).norm() < tol) {
          hit = true;
          break;
        }
      if (!hit) return false;
      ++matches;
    }
    return matches > 0;
  };
  const auto& valid = is_translation ? is_translation : std::function<bool(const Vec3&)>(geometric);

  std::vector<Vec3> cand;
  for (std::size_t i = 0; i < minima.size(); ++i)
    for (std::size_t j = i + 1; j < minima.size(); ++j) {
      const Vec3 d = minima[j] - minima[i];
      if (d.norm() > tol) cand.push_back(sign_normalised(d));
    }
  std::sort(cand.begin(), cand.end(),
            [q](const Vec3& a, const Vec3& b) { return order_key(a, q) < order_key(b, q); });
  cand.erase(std::unique(cand.begin(), cand.end(),
                         [tol](const Vec3& a, const Vec3& b) { return (a - b).norm() < tol; }),
             cand.end());

  std::vector<Vec3> basis;
  for (const auto& c : cand) {
    if (basis.size() == 1 && basis[0].cross(c).norm() < 1e-3 * basis[0].norm() * c.norm())
      continue;
    if (basis.size() == 2 &&
        std::abs(basis[0].cross(basis[1]).dot(c)) <
            1e-3 * basis[0].norm() * basis[1].norm() * c.norm())
      continue;
    if (!valid(c)) continue;
    basis.push_back(c);
    if (basis.size() == 3) break;
  }
  if (basis.size() < 3)
    fail(ErrorKind::invalid_input, "minima set is rank deficient: no three independent translations");

  // Integer coordinates and basis-site clusters, then a joint least-squares refit.
  Mat3 bm;
  for (int k = 0; k < 3; ++k) bm.col(k) = basis[k];
  const Mat3 inv = bm.inverse();
  const Vec3 o = minima.front();
  std::vector<Eigen::Vector3i> ints(minima.size());
  std::vector<int> cluster(minima.size());
  std::vector<Vec3> offsets;
  for (std::size_t i = 0; i < minima.size(); ++i) {
    const Vec3 f = inv * (minima[i] - o);
    Vec3 fl;
    for (int d = 0; d < 3; ++d) fl[d] = std::floor(f[d] + 1e-6);
    const Vec3 off = f - fl;
    int c = -1;
    for (std::size_t k = 0; k < offsets.size(); ++k)
      if ((offsets[k] - off).norm() < 1e-3) c = static_cast<int>(k);
    if (c < 0) {
      c = static_cast<int>(offsets.size());
      offsets.push_back(off);
    }
    cluster[i] = c;
    ints[i] = fl.cast<int>();
  }
  const int nb = static_cast<int>(offsets.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(minima.size(), 3 + nb);
  Eigen::MatrixXd rhs(minima.size(), 3);
  for (std::size_t i = 0; i < minima.size(); ++i) {
    for (int d = 0; d < 3; ++d) a(i, d) = ints[i][d];
    a(i, 3 + cluster[i]) = 1.0;
    rhs.row(i) = (minima[i] - o).transpose();
  }
  require(a.colPivHouseholderQr().rank() == 3 + nb, ErrorKind::invalid_input,
          "minima set does not determine the lattice");
  const Eigen::MatrixXd sol = a.colPivHouseholderQr().solve(rhs);

  PrincipalVectors out;
  for (int k = 0; k < 3; ++k) out.r[k] = sol.row(k).transpose();
  out.origin = o + sol.row(3).transpose();
  out.basis_size = static_cast<std::size_t>(nb);
  out.fit_residual = std::sqrt((a * sol - rhs).squaredNorm() / minima.size());
  if (out.r[0].cross(out.r[1]).dot(out.r[2]) < 0.0) out.r[2] = -out.r[2];
  return out;
}

Box default_search_box(double wavelength, bool acl) {
  Box b;
  if (acl) {
    // Two layers above the mirror at z = 0 and a few in-plane cells.
    b.lo = wavelength * Vec3(-1.0, -1.0, 0.05);
    b.hi = wavelength * Vec3(1.0, 1.0, 1.75);
  } else {
    b.lo = wavelength * Vec3(-0.3, -0.3, -0.3);
    b.hi = wavelength * Vec3(0.8, 0.8, 0.8);
  }
  return b;
}

namespace {

std::vector<Minimum> map_to_cell(std::vector<Minimum> ms, const PrincipalVectors& pv,
                                 double lambda) {
  Mat3 bm;
  for (int k = 0; k < 3; ++k) bm.col(k) = pv.r[k];
  const Mat3 inv = bm.inverse();
  for (auto& m : ms) {
    Vec3 f = inv * (m.position - pv.origin);
    for (int d = 0; d < 3; ++d) {
      f[d] -= std::floor(f[d] + 1e-9);
      if (std::abs(f[d]) < 1e-9) f[d] = 0.0;
    }
    m.position = pv.origin + bm * f;
  }
  sort_positions(ms, lambda * 1e-6);
  dedupe(ms, lambda / 100.0);
  return ms;
}

}  // namespace

LatticeReport analyze_lattice(const BeamSet& set, double alpha, double mass,
                              const AnalysisOptions& opt) {
  const BeamSet full = expanded(set);
  const double lambda = full.wavelength;
  const MinimaSet ms = find_minima(full, alpha, opt.cell, opt.seed_resolution);

  LatticeReport rep;
  rep.u_min = ms.u_min;
  rep.sites_found = ms.sites.size();

  // A displacement is a lattice translation when it leaves U unchanged at scattered points.
  const Vec3 span = opt.cell.hi - opt.cell.lo;
  auto is_translation = [&](const Vec3& d) {
    for (int j = 0; j < 8; ++j) {
      const Vec3 frac(std::fmod(0.1234 + 0.618034 * j, 1.0), std::fmod(0.377 + 0.414214 * j, 1.0),
                      std::fmod(0.59 + 0.732051 * j, 1.0));
      const Vec3 p = opt.cell.lo + frac.cwiseProduct(span);
      if (std::abs(stark_potential(full, alpha, p + d) - stark_potential(full, alpha, p)) >
          1e-9 * std::abs(rep.u_min))
        return false;
    }
    return true;
  };
  std::vector<Vec3> pos;
  for (const auto& m : ms.sites) pos.push_back(m.position);
  rep.principal = principal_vectors(pos, lambda, is_translation);

  rep.minima = map_to_cell(ms.sites, rep.principal, lambda);
  rep.secondary = map_to_cell(ms.secondary, rep.principal, lambda);
  for (auto& m : rep.minima) m.value = stark_potential(full, alpha, m.position);
  for (auto& m : rep.secondary) m.value = stark_potential(full, alpha, m.position);

  for (const auto& m : rep.minima) {
    const auto f = trap_frequencies(full, alpha, m.position, mass);
    rep.trap_frequencies.push_back(f);
    const double mean = (f[0] + f[1] + f[2]) / 3.0;
    rep.isotropy_deviation = std::max(rep.isotropy_deviation, (f[2] - f[0]) / mean);
    rep.max_gradient = std::max(rep.max_gradient, potential_gradient(full, alpha, m.position).norm() *
                                                      lambda / std::abs(rep.u_min));
  }
  rep.quartics = quartic_derivatives(full, alpha, rep.minima.front().position);
  if (!opt.barriers) return rep;

  // Neighbour shells of the found site nearest the box centre, out to the longest principal
  // vector.
  const Vec3 centre = 0.5 * (opt.cell.lo + opt.cell.hi);
  const Minimum* ref = &ms.sites.front();
  for (const auto& m : ms.sites)
    if ((m.position - centre).norm() < (ref->position - centre).norm()) ref = &m;
  double reach = 0.0;
  for (const auto& v : rep.principal.r) reach = std::max(reach, v.norm());
  reach += opt.adjacency_tol * lambda;

  std::vector<Vec3> disp;
  for (const auto& m : ms.sites) {
    const Vec3 d = m.position - ref->position;
    if (d.norm() > lambda / 100.0 && d.norm() <= reach) disp.push_back(d);
  }
  const double q = lambda * 1e-6;
  std::sort(disp.begin(), disp.end(),
            [q](const Vec3& a, const Vec3& b) { return order_key(a, q) < order_key(b, q); });
  for (const auto& d : disp) {
    const double len = d.norm();
    if (!rep.barriers.empty() &&
        std::abs(rep.barriers.back().distance - len) < opt.adjacency_tol * lambda) {
      ++rep.barriers.back().multiplicity;
      continue;
    }
    NeighbourBarrier nb;
    nb.distance = len;
    nb.displacement = d;
    nb.multiplicity = 1;
    rep.barriers.push_back(nb);
  }
  require(!rep.barriers.empty(), ErrorKind::empty_result, "no neighbouring sites for barriers");
  std::vector<BarrierResult> results(rep.barriers.size());
  parallel_for(rep.barriers.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      results[i] = min_barrier(full, alpha, ref->position,
                               ref->position + rep.barriers[i].displacement, opt.neb);
  });
  rep.min_barrier = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < results.size(); ++i) {
    rep.barriers[i].result = results[i];
    rep.min_barrier = std::min(rep.min_barrier, results[i].barrier);
  }
  return rep;
}

// ---- phase stability ----------------------------------------------------------------------

namespace {

int knob_of(const Beam& b, std::size_t index) {
  return b.source >= 0 ? b.source : static_cast<int>(index);
}

}  // namespace

PhaseKnobs phase_knobs(const BeamSet& set) {
  const BeamSet full = expanded(set);
  PhaseKnobs k;
  for (std::size_t i = 0; i < full.beams.size(); ++i) {
    k.sources = std::max(k.sources, knob_of(full.beams[i], i) + 1);
    if (full.beams[i].reflected) k.mirror = true;
  }
  return k;
}

BeamSet perturb_phases(const BeamSet& set, const std::vector<double>& delta) {
  const PhaseKnobs knobs = phase_knobs(set);
  require(static_cast<int>(delta.size()) == knobs.count(), ErrorKind::invalid_input,
          "phase perturbation needs " + std::to_string(knobs.count()) + " entries");
  BeamSet full = expanded(set);
  for (std::size_t i = 0; i < full.beams.size(); ++i) {
    Beam& b = full.beams[i];
    b.phase += delta[knob_of(b, i)];
    if (b.reflected) b.phase += delta[knobs.sources];
  }
  return full;
}

PhaseTranslation translation_from_phases(const BeamSet& set, const std::vector<double>& delta) {
  const BeamSet full = expanded(set);
  const BeamSet pert = perturb_phases(set, delta);
  const double lambda = full.wavelength;
  std::vector<int> groups;
  for (const auto& b : full.beams)
    if (std::find(groups.begin(), groups.end(), b.coherence_group) == groups.end())
      groups.push_back(b.coherence_group);
  const std::size_t nb = full.beams.size(), ng = groups.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nb, 3 + ng);
  Eigen::VectorXd rhs(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const Beam& b = full.beams[i];
    // Columns scaled so the translation unknown is in wavelengths.
    a.block<1, 3>(i, 0) = -(b.wavevector * lambda).transpose();
    const auto g = std::find(groups.begin(), groups.end(), b.coherence_group) - groups.begin();
    a(i, 3 + g) = 1.0;
    rhs[i] = pert.beams[i].phase - b.phase;
  }
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(rhs);
  PhaseTranslation out;
  out.t = x.head<3>() * lambda;
  for (std::size_t g = 0; g < ng; ++g) out.global.push_back(x[3 + g]);
  out.residual = (a * x - rhs).cwiseAbs().maxCoeff();
  return out;
}

int independent_phase_count(const BeamSet& set) {
  const BeamSet full = expanded(set);
  const PhaseKnobs knobs = phase_knobs(set);
  // Beam phase responses to each knob, relative to the first beam of the same group.
  const std::size_t nb = full.beams.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, knobs.count());
  for (std::size_t i = 0; i < nb; ++i) {
    m(i, knob_of(full.beams[i], i)) = 1.0;
    if (full.beams[i].reflected) m(i, knobs.sources) = 1.0;
  }
  Eigen::MatrixXd rel = m;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (full.beams[j].coherence_group == full.beams[i].coherence_group) {
        rel.row(i) = m.row(i) - m.row(j);
        break;
      }
  return static_cast<int>(rel.fullPivLu().rank()) + 1;
}

StabilityReport verify_phase_stability(const BeamSet& set, double alpha,
                                       const std::vector<std::vector<double>>& perturbations,
                                       const StabilityOptions& opt) {
  require(opt.grid >= 2, ErrorKind::invalid_input, "check grid needs >= 2 points per axis");
  const BeamSet full = expanded(set);
  const kernels::PackedField base = kernels::pack(full, alpha);
  const std::size_t g = opt.grid, n = g * g * g;
  std::vector<double> x(n), y(n), z(n), xs(n), ys(n), zs(n), u0(n), u1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 frac((i / (g * g) + 0.5) / g, ((i / g) % g + 0.5) / g, (i % g + 0.5) / g);
    const Vec3 p = opt.cell.lo + frac.cwiseProduct(opt.cell.hi - opt.cell.lo);
    x[i] = p.x(), y[i] = p.y(), z[i] = p.z();
  }
  kernels::potential(base, {x, y, z}, u0);
  double scale = 0.0;
  for (double v : u0) scale = std::max(scale, std::abs(v));
  require(scale > 0.0, ErrorKind::invalid_input, "potential vanishes on the check grid");

  StabilityReport rep;
  rep.independent_phase_count = independent_phase_count(set);
  rep.is_phase_stable = true;
  for (const auto& delta : perturbations) {
    StabilityTrial trial;
    trial.delta = delta;
    trial.translation = translation_from_phases(set, delta);
    const kernels::PackedField pert = kernels::pack(perturb_phases(set, delta), alpha);
    kernels::potential(pert, {x, y, z}, u1);
    const Vec3& t = trial.translation.t;
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] - t.x(), ys[i] = y[i] - t.y(), zs[i] = z[i] - t.z();
    kernels::potential(base, {xs, ys, zs}, u0);
    for (std::size_t i = 0; i < n; ++i)
      trial.grid_deviation = std::max(trial.grid_deviation, std::abs(u1[i] - u0[i]) / scale);
    rep.max_residual = std::max(rep.max_residual, trial.translation.residual);
    rep.max_grid_deviation = std::max(rep.max_grid_deviation, trial.grid_deviation);
    if (!(trial.translation.residual < opt.residual_tol && trial.grid_deviation < opt.grid_tol))
      rep.is_phase_stable = false;
    rep.trials.push_back(std::move(trial));
  }
  return rep;
}

// ---- misalignment ---------------------------------------------------------------------------

double predicted_beat_period(const BeamSet& set, double layer_spacing) {
  const BeamSet full = expanded(set);
  const double g = cst::two_pi / layer_spacing;
  double slowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < full.beams.size(); ++i)
    for (std::size_t j = i + 1; j < full.beams.size(); ++j) {
      if (full.beams[i].coherence_group != full.beams[j].coherence_group) continue;
      const double dk = full.beams[i].wavevector.z() - full.beams[j].wavevector.z();
      const double r = std::abs(dk - g * std::round(dk / g));
      if (r > 1e-9 * g) slowest = std::min(slowest, r);
    }
  return std::isfinite(slowest) ? cst::two_pi / slowest : 0.0;
}

double dominant_period(const std::vector<double>& z, const std::vector<double>& v) {
  require(z.size() == v.size() && z.size() >= 4, ErrorKind::invalid_input,
          "period estimate needs at least four samples");
  const std::size_t n = z.size();
  const double span = z.back() - z.front();
  require(span > 0.0, ErrorKind::insufficient_span, "profile has zero extent");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  const double dz = span / (n - 1);

  auto power = [&](double nu) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = cst::two_pi * nu * (z[i] - z.front());
      re += (v[i] - mean) * std::cos(ph);
      im += (v[i] - mean) * std::sin(ph);
    }
    return re * re + im * im;
  };
  // Variance explained by the best sinusoid a + b cos + c sin at frequency nu.
  auto fit_quality = [&](double nu) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = cst::two_pi * nu * (z[i] - z.front());
      const Eigen::Vector3d row(1.0, std::cos(ph), std::sin(ph));
      ata += row * row.transpose();
      atb += row * (v[i] - mean);
    }
    const Eigen::Vector3d c = ata.ldlt().solve(atb);
    return c.dot(atb);
  };

  const int oversample = 8;
  const double dnu = 1.0 / (oversample * span);
  const int count = static_cast<int>(0.5 / dz / dnu);
  int best = 1;
  double best_power = -1.0;
  for (int j = 1; j <= count; ++j) {
    const double p = power(j * dnu);
    if (p > best_power) {
      best_power = p;
      best = j;
    }
  }
  // Golden-section refinement of the sinusoid fit around the periodogram peak.
  double lo = std::max(0.5, best - 1.0) * dnu, hi = (best + 1.0) * dnu;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = hi - phi * (hi - lo), c2 = lo + phi * (hi - lo);
  double f1 = fit_quality(c1), f2 = fit_quality(c2);
  for (int it = 0; it < 80; ++it) {
    if (f1 > f2) {
      hi = c2, c2 = c1, f2 = f1;
      c1 = hi - phi * (hi - lo);
      f1 = fit_quality(c1);
    } else {
      lo = c1, c1 = c2, f1 = f2;
      c2 = lo + phi * (hi - lo);
      f2 = fit_quality(c2);
    }
  }
  return 2.0 / (lo + hi);
}

namespace {

std::optional<ProfileSample> try_sample_site(const BeamSet& full, double alpha, double mass,
                                             const Vec3& guess) {
  // Far from the mirror the phases k.r are ~1e4 rad, so rounding caps the attainable gradient.
  DescentOptions opt;
  opt.gradient_tol = 1e-9;
  const auto m = descend(full, alpha, guess, opt);
  if (!m) return std::nullopt;
  const auto f = trap_frequencies(full, alpha, m->position, mass);
  return ProfileSample{m->position, m->value, (f[0] + f[1] + f[2]) / 3.0};
}

ProfileSample sample_site(const BeamSet& full, double alpha, double mass, const Vec3& guess) {
  const auto p = try_sample_site(full, alpha, mass, guess);
  if (!p) fail(ErrorKind::convergence, "site tracking lost the lattice minimum");
  return *p;
}

}  // namespace

std::vector<MisalignmentReport> misalignment_scan(const AclConfig& cfg, double alpha, double mass,
                                                  const std::vector<double>& delta_phi,
                                                  double z_span, const MisalignmentOptions& opt) {
  require(z_span > 0.0, ErrorKind::invalid_input, "z span must be positive");
  const double layer = cfg.wavelength / (2.0 * std::cos(cfg.incidence_angle));
  std::vector<MisalignmentReport> out(delta_phi.size());

  parallel_for(delta_phi.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const double dphi = delta_phi[s];
      require(std::abs(dphi) < 0.1, ErrorKind::invalid_input,
              "misalignment must satisfy |delta phi| < 0.1 rad");
      AclConfig c = cfg;
      c.incidence_offsets[0] += dphi;
      const BeamSet full = expanded(build_acl(c));
      MisalignmentReport& rep = out[s];
      rep.delta_phi = dphi;
      // Depth and frequency repeat at half the field beat: a relative phase of pi between the
      // tilted pair and the aligned beams is absorbed by a lattice translation.
      rep.predicted_period = 0.5 * predicted_beat_period(full, layer);
      if (rep.predicted_period > 0.0 && z_span < rep.predicted_period)
        fail(ErrorKind::insufficient_span,
             "z span " + std::to_string(z_span) + " m is shorter than one variation period (" +
                 std::to_string(rep.predicted_period) + " m)");

      // Exact in-plane periods from the incident beams' transverse wavevectors (reflection
      // keeps them).
      std::vector<Eigen::Vector2d> qs;
      for (const auto& b : full.beams)
        if (!b.reflected) qs.emplace_back(b.wavevector.x(), b.wavevector.y());
      Eigen::Matrix2d a;
      a.row(0) = (qs[0] - qs[1]).transpose();
      a.row(1) = (qs[0] - qs[2]).transpose();
      const Eigen::Matrix2d real = cst::two_pi * a.inverse();

      // The deepest site of every layer: the beat reshapes the layer, so a site followed by
      // descent alone can turn into a saddle.
      const double z0 = opt.z_start != 0.0 ? opt.z_start : cfg.mirror_offset + 0.5 * layer;
      const int layers = static_cast<int>(std::floor(z_span / layer)) + 1;
      Vec3 anchor(0.0, 0.0, z0);
      for (int k = 0; k < layers; ++k) {
        const double zk = z0 + k * layer;
        std::optional<ProfileSample> best;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            for (int l = -1; l <= 1; ++l) {
              const Eigen::Vector2d sh = real.col(0) * (i / 3.0) + real.col(1) * (j / 3.0);
              const Vec3 guess(anchor.x() + sh.x(), anchor.y() + sh.y(), zk + l * layer / 3.0);
              const auto p = try_sample_site(full, alpha, mass, guess);
              if (!p || std::abs(p->position.z() - zk) > 0.5 * layer) continue;
              if (!best || p->depth < best->depth) best = p;
            }
        if (!best)
          fail(ErrorKind::convergence,
               "no lattice minimum found in layer " + std::to_string(k) + " of the z scan");
        rep.profile.push_back(*best);
      }

      double dmin = rep.profile.front().depth, dmax = dmin;
      double fmin = rep.profile.front().frequency, fmax = fmin;
      std::vector<double> zs, ds;
      for (const auto& p : rep.profile) {
        dmin = std::min(dmin, p.depth), dmax = std::max(dmax, p.depth);
        fmin = std::min(fmin, p.frequency), fmax = std::max(fmax, p.frequency);
        zs.push_back(p.position.z());
        ds.push_back(p.depth);
      }
      rep.depth_variation = dmax - dmin;
      rep.frequency_variation = fmax - fmin;
      if (rep.depth_variation > 1e-9 * std::abs(dmin)) rep.spatial_period = dominant_period(zs, ds);

      const ProfileSample& p0 = rep.profile.front();
      const int shifts[6][2] = {{1, 0}, {0, 1}, {1, -1}, {-1, 0}, {0, -1}, {-1, 1}};
      for (int k = 0; k < std::min(opt.in_plane_neighbours, 6); ++k) {
        const Eigen::Vector2d sh = real.col(0) * shifts[k][0] + real.col(1) * shifts[k][1];
        const ProfileSample pk =
            sample_site(full, alpha, mass, p0.position + Vec3(sh.x(), sh.y(), 0.0));
        rep.in_plane_spread =
            std::max({rep.in_plane_spread, std::abs(pk.depth - p0.depth) / std::abs(p0.depth),
                      std::abs(pk.frequency - p0.frequency) / p0.frequency});
      }
    }
  });
  return out;
}

}  // namespace chiplattice
