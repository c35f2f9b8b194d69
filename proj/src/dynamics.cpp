#include "chiplattice/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/kernels.hpp"
#include "chiplattice/parallel.hpp"

namespace chiplattice {

namespace cst = constants;

Vec3 Cell::at(const Vec3& u) const {
  return origin + u[0] * edges[0] + u[1] * edges[1] + u[2] * edges[2];
}

double Cell::volume() const { return std::abs(edges[0].cross(edges[1]).dot(edges[2])); }

void Cell::validate() const {
  const double scale = edges[0].norm() * edges[1].norm() * edges[2].norm();
  require(std::isfinite(scale) && scale > 0.0 && volume() > 1e-9 * scale, ErrorKind::invalid_input,
          "sampling region is degenerate");
}

Cell Cell::centred(const Vec3& site, const std::array<Vec3, 3>& r) {
  Cell c;
  c.edges = r;
  c.origin = site - 0.5 * (r[0] + r[1] + r[2]);
  return c;
}

void Ensemble::validate() const {
  require(!positions.empty(), ErrorKind::invalid_input, "ensemble is empty");
  require(positions.size() == velocities.size(), ErrorKind::invalid_input,
          "ensemble positions and velocities differ in length");
  for (std::size_t i = 0; i < size(); ++i)
    require(positions[i].allFinite() && velocities[i].allFinite(), ErrorKind::invalid_input,
            "ensemble entry " + std::to_string(i) + " is not finite");
}

namespace {

std::mt19937_64 particle_stream(std::uint64_t seed, std::size_t index) {
  const auto i = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(seq);
}

Vec3 uniform3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  return {a, b, c};
}

Vec3 maxwell(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  const double a = n(rng), b = n(rng), c = n(rng);
  return {a, b, c};
}

double point_potential(const kernels::PackedField& f, const Vec3& r) {
  double u = 0.0;
  kernels::potential(f, {std::span(&r.x(), 1), std::span(&r.y(), 1), std::span(&r.z(), 1)},
                     std::span(&u, 1));
  return u;
}

}  // namespace

Ensemble sample_thermal(double temperature, const AtomSpecies& species, const Cell& region,
                        std::size_t n, std::uint64_t seed) {
  require(temperature > 0.0, ErrorKind::invalid_input, "temperature must be positive");
  require(n >= 1, ErrorKind::invalid_input, "ensemble needs at least one particle");
  species.validate();
  region.validate();
  const double sigma = std::sqrt(cst::k_B * temperature / species.mass);
  Ensemble e;
  e.rng_seed = seed;
  e.positions.resize(n);
  e.velocities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = particle_stream(seed, i);
    e.positions[i] = region.at(uniform3(rng));
    e.velocities[i] = maxwell(rng, sigma);
  }
  return e;
}

Ensemble sample_equilibrium(double temperature, const AtomSpecies& species, const BeamSet& set,
                            double alpha, const Cell& region, std::size_t n, std::uint64_t seed,
                            const EquilibriumOptions& opt) {
  require(temperature > 0.0, ErrorKind::invalid_input, "temperature must be positive");
  require(n >= 1, ErrorKind::invalid_input, "ensemble needs at least one particle");
  species.validate();
  region.validate();
  const kernels::PackedField packed = kernels::pack(expanded(set), alpha);
  const double kt = cst::k_B * temperature;
  const double sigma = std::sqrt(kt / species.mass);
  const double s = opt.intensity_scale;

  // Rejection against exp(-s (U - floor) / kT). The floor is U_min when given, else the
  // constructive bound, which no point can undercut.
  const double floor = opt.u_min < 0.0 ? opt.u_min : -constructive_bound(set, alpha);
  Ensemble e;
  e.rng_seed = seed;
  e.positions.resize(n);
  e.velocities.resize(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = particle_stream(seed, i);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      bool done = false;
      for (std::uint64_t trial = 0; trial < opt.max_trials && !done; ++trial) {
        const Vec3 r = region.at(uniform3(rng));
        const double u = point_potential(packed, r);
        if (u01(rng) >= std::exp(-s * (u - floor) / kt)) continue;
        const Vec3 v = maxwell(rng, sigma);
        if (opt.bound_only &&
            0.5 * species.mass * v.squaredNorm() + s * (u - opt.u_min) >= opt.bound_energy)
          continue;
        e.positions[i] = r;
        e.velocities[i] = v;
        done = true;
      }
      if (!done)
        fail(ErrorKind::convergence, "equilibrium sampling exhausted its trial budget for particle " +
                                         std::to_string(i));
    }
  });
  return e;
}

void SimulationConfig::validate() const {
  require(time_step > 0.0 && std::isfinite(time_step), ErrorKind::invalid_input,
          "time step must be positive");
  require(duration >= 0.0 && ramp_time >= 0.0, ErrorKind::invalid_input,
          "durations must be non-negative");
  require(modulation_depth >= 0.0 && modulation_depth <= 0.5, ErrorKind::invalid_input,
          "modulation depth must lie in [0, 0.5]");
  require(intensity_scale >= 0.0 && intensity_scale <= 1.0, ErrorKind::invalid_input,
          "intensity scale must lie in [0, 1]");
  require(modulation_frequency >= 0.0, ErrorKind::invalid_input,
          "modulation frequency must be non-negative");
  if (reference_frequency > 0.0)
    require(time_step <= 1.0 / (50.0 * reference_frequency) * (1.0 + 1e-12),
            ErrorKind::invalid_input, "time step exceeds 1/(50 f_trap)");
}

std::size_t SimulationConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration / time_step));
}

double particle_energy(const BeamSet& set, double alpha, double mass, double scale, bool gravity,
                       const Vec3& r, const Vec3& v) {
  double e = 0.5 * mass * v.squaredNorm() + scale * stark_potential(set, alpha, r);
  if (gravity) e += mass * cst::standard_gravity * r.z();
  return e;
}

Trajectory integrate(const Ensemble& ens, const BeamSet& set, double alpha, double mass,
                     const SimulationConfig& cfg) {
  ens.validate();
  cfg.validate();
  require(mass > 0.0, ErrorKind::invalid_input, "mass must be positive");
  const kernels::PackedField packed = kernels::pack(expanded(set), alpha);
  const std::size_t n = ens.size();
  const double dt = cfg.time_step;
  const std::size_t ramp_steps =
      cfg.ramp_time > 0.0 ? static_cast<std::size_t>(std::llround(cfg.ramp_time / dt)) : 0;
  const std::size_t hold_steps = cfg.steps();
  const std::size_t total = ramp_steps + hold_steps;
  const double g = cfg.gravity ? cst::standard_gravity : 0.0;
  const double s0 = cfg.intensity_scale;
  const double w = cst::two_pi * cfg.modulation_frequency;

  auto scale_at = [&](std::size_t step) {
    if (step < ramp_steps) return s0 * static_cast<double>(step) / ramp_steps;
    const double t = (step - ramp_steps) * dt;
    return s0 * (1.0 + cfg.modulation_depth * std::sin(w * t));
  };

  Trajectory out;
  out.initial = ens;
  out.final = ens;
  out.initial_energy.assign(n, 0.0);
  out.final_energy.assign(n, 0.0);
  out.hold_start = ens.positions;
  if (cfg.record_stride > 0) out.energy_history.assign(n, {});

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    const std::size_t m = end - begin;
    std::vector<double> x(m), y(m), z(m), vx(m), vy(m), vz(m), u(m), gx(m), gy(m), gz(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& r = ens.positions[begin + i];
      const Vec3& v = ens.velocities[begin + i];
      x[i] = r.x(), y[i] = r.y(), z[i] = r.z();
      vx[i] = v.x(), vy[i] = v.y(), vz[i] = v.z();
    }
    auto forces = [&] { kernels::potential_gradient(packed, {x, y, z}, u, {gx, gy, gz}); };
    auto energy = [&](std::size_t i) {
      return 0.5 * mass * (vx[i] * vx[i] + vy[i] * vy[i] + vz[i] * vz[i]) + s0 * u[i] +
             mass * g * z[i];
    };
    auto mark_hold_start = [&] {
      for (std::size_t i = 0; i < m; ++i) {
        out.hold_start[begin + i] = Vec3(x[i], y[i], z[i]);
        out.initial_energy[begin + i] = energy(i);
        if (cfg.record_stride > 0) out.energy_history[begin + i].push_back(energy(i));
      }
    };

    forces();
    if (ramp_steps == 0) mark_hold_start();
    for (std::size_t step = 0; step < total; ++step) {
      const double sa = scale_at(step) / mass, sb = scale_at(step + 1) / mass;
      for (std::size_t i = 0; i < m; ++i) {
        vx[i] -= 0.5 * dt * sa * gx[i];
        vy[i] -= 0.5 * dt * sa * gy[i];
        vz[i] -= 0.5 * dt * (sa * gz[i] + g);
        x[i] += dt * vx[i];
        y[i] += dt * vy[i];
        z[i] += dt * vz[i];
      }
      forces();
      for (std::size_t i = 0; i < m; ++i) {
        vx[i] -= 0.5 * dt * sb * gx[i];
        vy[i] -= 0.5 * dt * sb * gy[i];
        vz[i] -= 0.5 * dt * (sb * gz[i] + g);
        if (!std::isfinite(x[i] + y[i] + z[i] + vx[i] + vy[i] + vz[i]))
          fail(ErrorKind::divergence, "trajectory diverged: particle " + std::to_string(begin + i) +
                                          " at step " + std::to_string(step + 1));
      }
      if (step + 1 == ramp_steps) mark_hold_start();
      if (cfg.record_stride > 0 && step + 1 > ramp_steps &&
          (step + 1 - ramp_steps) % static_cast<std::size_t>(cfg.record_stride) == 0)
        for (std::size_t i = 0; i < m; ++i) out.energy_history[begin + i].push_back(energy(i));
    }
    for (std::size_t i = 0; i < m; ++i) {
      out.final.positions[begin + i] = Vec3(x[i], y[i], z[i]);
      out.final.velocities[begin + i] = Vec3(vx[i], vy[i], vz[i]);
      out.final_energy[begin + i] = energy(i);
    }
  });
  return out;
}

HeatingScan parametric_heating_scan(const Ensemble& ens, const BeamSet& set, double alpha,
                                    double mass, const std::vector<double>& modulation_frequencies,
                                    double modulation_depth, double hold,
                                    const HeatingOptions& opt) {
  require(!modulation_frequencies.empty(), ErrorKind::invalid_input,
          "heating scan needs at least one modulation frequency");
  HeatingScan scan;
  for (double f : modulation_frequencies) {
    SimulationConfig cfg;
    cfg.time_step = opt.time_step;
    cfg.duration = hold;
    cfg.modulation_depth = modulation_depth;
    cfg.modulation_frequency = f;
    cfg.reference_frequency = opt.reference_frequency;
    cfg.gravity = opt.gravity;
    const Trajectory tr = integrate(ens, set, alpha, mass, cfg);
    const std::size_t n = ens.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += tr.final_energy[i] - tr.initial_energy[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = tr.final_energy[i] - tr.initial_energy[i] - mean;
      var += d * d;
    }
    var = n > 1 ? var / (n - 1) : 0.0;
    scan.curve.push_back({f, mean, std::sqrt(var / n)});
  }
  const auto best = std::max_element(
      scan.curve.begin(), scan.curve.end(),
      [](const HeatingPoint& a, const HeatingPoint& b) { return a.mean_gain < b.mean_gain; });
  scan.resonance = best->modulation_frequency;
  return scan;
}

CaptureMethod capture_method_from_string(const std::string& name) {
  if (name == "energy-criterion") return CaptureMethod::energy_criterion;
  if (name == "trajectory") return CaptureMethod::trajectory;
  fail(ErrorKind::unknown_method, "unknown capture method '" + name +
                                      "' (expected energy-criterion or trajectory)");
}

std::string to_string(CaptureMethod m) {
  return m == CaptureMethod::energy_criterion ? "energy-criterion" : "trajectory";
}

CaptureResult capture_fraction(double temperature, const AtomSpecies& species, const BeamSet& set,
                               double alpha, double intensity_scale, std::size_t n,
                               std::uint64_t seed, CaptureMethod method,
                               const CaptureOptions& opt) {
  require(intensity_scale >= 0.0 && intensity_scale <= 1.0, ErrorKind::invalid_input,
          "intensity scale must lie in [0, 1]");
  require(opt.min_barrier > 0.0 && opt.u_min < 0.0, ErrorKind::invalid_input,
          "capture needs the lattice depth and barrier");
  CaptureResult res;
  res.total = n;
  const BeamSet full = expanded(set);

  if (method == CaptureMethod::energy_criterion) {
    EquilibriumOptions eq;
    eq.intensity_scale = intensity_scale;
    eq.u_min = opt.u_min;
    const Ensemble ens =
        sample_equilibrium(temperature, species, full, alpha, opt.region, n, seed, eq);
    const double escape = intensity_scale * (opt.u_min + opt.min_barrier);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = particle_energy(full, alpha, species.mass, intensity_scale, false,
                                       ens.positions[i], ens.velocities[i]);
      if (e < escape) ++res.captured;
    }
  } else {
    require(opt.escape_radius > 0.0, ErrorKind::invalid_input,
            "trajectory capture needs an escape radius");
    const Ensemble ens = sample_thermal(temperature, species, opt.region, n, seed);
    SimulationConfig cfg;
    cfg.time_step = opt.time_step;
    cfg.duration = opt.hold;
    cfg.ramp_time = opt.ramp_time;
    cfg.intensity_scale = intensity_scale;
    cfg.reference_frequency = opt.reference_frequency;
    cfg.gravity = opt.gravity;
    const Trajectory tr = integrate(ens, full, alpha, species.mass, cfg);
    for (std::size_t i = 0; i < n; ++i)
      if ((tr.final.positions[i] - tr.hold_start[i]).norm() <= opt.escape_radius) ++res.captured;
  }
  res.fraction = static_cast<double>(res.captured) / static_cast<double>(n);
  return res;
}

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::invalid_input, "KS test needs two samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  if (lam < 1e-3) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace chiplattice
