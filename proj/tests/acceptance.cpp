// Acceptance report: prints one PASS/FAIL line per criterion and a summary. Exits non-zero only
// when a criterion could not be evaluated at all.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include <fmt/format.h>

#include "chiplattice/analysis.hpp"
#include "chiplattice/atom.hpp"
#include "chiplattice/commands.hpp"
#include "chiplattice/config.hpp"
#include "chiplattice/constants.hpp"
#include "chiplattice/dynamics.hpp"
#include "chiplattice/error.hpp"
#include "chiplattice/lattice_models.hpp"

using namespace chiplattice;
namespace cst = chiplattice::constants;

namespace {

int passed = 0, failed = 0, broken = 0;

void verdict(int id, bool ok, const std::string& detail) {
  fmt::print("criterion {:2d}: {}  {}\n", id, ok ? "PASS" : "FAIL", detail);
  std::fflush(stdout);
  (ok ? passed : failed)++;
}

template <typename Fn>
void criterion(int id, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    fmt::print("criterion {:2d}: FAIL  not evaluated: {}\n", id, e.what());
    ++failed;
    ++broken;
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

json payload(const std::string& cmd, const json& cfg, CommandOptions opt = {}) {
  return json::parse(run_command(cmd, parse_config(cfg), opt).text)["payload"];
}

const json kExperiment = json::object();  // defaults are the experimental parameters

struct Column {
  double u_err = 0, f_err = 0, qx_err = 0, qz_err = 0, barrier_err = 0, vec_err = 0;
};

// Analytic lattice properties at three intensities spanning two decades.
Column lattice_column(bool acl_type) {
  const Setup base = resolve(parse_config(kExperiment));
  const double lambda = base.laser.wavelength;
  const double k4 = std::pow(cst::two_pi / lambda, 4);
  const double m = base.species.mass;
  Column c;
  for (double scale : {0.1, 1.0, 10.0}) {
    const double i0 = base.intensity * scale;
    const BeamSet set = acl_type ? build_acl(AclConfig::uniform(i0, lambda))
                                 : build_scl(SclConfig{i0, lambda});
    AnalysisOptions o;
    o.cell = default_search_box(lambda, acl_type);
    const LatticeReport r = analyze_lattice(set, base.alpha, m, o);
    const double u_ref = acl_type ? acl_reference_depth(i0, base.alpha)
                                  : scl_reference_depth(i0, base.alpha);
    const double f_ref = std::sqrt(-2.0 * u_ref / (3.0 * m)) / lambda;
    const double qx = acl_type ? u_ref * k4 : 8.0 / 3.0 * u_ref * k4;
    const double qz = acl_type ? 8.0 / 9.0 * u_ref * k4 : 8.0 / 3.0 * u_ref * k4;
    const double b_ref = acl_type ? 0.8 * std::abs(u_ref) : std::abs(u_ref) / 3.0;
    const std::array<Vec3, 3> v_ref =
        acl_type ? std::array<Vec3, 3>{lambda * Vec3(std::sqrt(2.0 / 3.0), 0, 0),
                                       lambda * Vec3(std::sqrt(1.0 / 6.0), std::sqrt(0.5), 0),
                                       lambda * Vec3(0, 0, std::sqrt(3.0) / 2.0)}
                 : std::array<Vec3, 3>{lambda * Vec3(0.5, 0, 0), lambda * Vec3(0, 0.5, 0),
                                       lambda * Vec3(0, 0, 0.5)};
    c.u_err = std::max(c.u_err, rel(r.u_min, u_ref));
    for (double f : r.trap_frequencies.front()) c.f_err = std::max(c.f_err, rel(f, f_ref));
    c.qx_err = std::max(c.qx_err, rel(r.quartics.d4_x, qx));
    c.qz_err = std::max(c.qz_err, rel(r.quartics.d4_z, qz));
    c.barrier_err = std::max(c.barrier_err, rel(r.min_barrier, b_ref));
    for (int i = 0; i < 3; ++i)
      c.vec_err = std::max(c.vec_err, (r.principal.r[i] - v_ref[i]).norm() / lambda);
  }
  return c;
}

std::string column_detail(const Column& c) {
  return fmt::format("U {:.2e} f {:.2e} d4x {:.2e} d4z {:.2e} barrier {:.2e} vectors {:.2e} lambda",
                     c.u_err, c.f_err, c.qx_err, c.qz_err, c.barrier_err, c.vec_err);
}

bool column_ok(const Column& c) {
  return c.u_err < 1e-6 && c.f_err < 1e-4 && c.qx_err < 1e-2 && c.qz_err < 1e-2 &&
         c.barrier_err < 1e-2 && c.vec_err < 1e-6;
}

}  // namespace

int main() {
  setenv("CHIPLATTICE_TIMESTAMP", "1970-01-01T00:00:00Z", 1);

  criterion(1, [] {
    CommandOptions o;
    o.grid = 64;
    json cfg = kExperiment;
    cfg["analysis"] = {{"compare_translation", false}};
    const json p = payload("compare", cfg, o);
    const double dev = p["max_relative_deviation"].get<double>();
    verdict(1, dev < 1e-10, fmt::format("64^3 cell, max |closed - beams| / |U_min| = {:.3e}", dev));
  });

  criterion(2, [] {
    const Column c = lattice_column(true);
    verdict(2, column_ok(c), "ACL max rel. errors over I0 x {0.1,1,10}: " + column_detail(c));
  });

  criterion(3, [] {
    const Column c = lattice_column(false);
    verdict(3, column_ok(c), "SCL max rel. errors over I0 x {0.1,1,10}: " + column_detail(c));
  });

  criterion(4, [] {
    const Setup s = resolve(parse_config(kExperiment));
    const json p = payload("analyze", kExperiment);
    const double f = p["trap_frequency_hz"].get<double>();
    verdict(4, rel(f, 46.6e3) < 0.05,
            fmt::format("mean power {:.2f} mW, I0 = {:.1f} W/m^2, f = {:.3f} kHz (target 46.6 +- 5 %)",
                        (39.0 + 45.0 + 44.0) / 3.0, s.intensity, f / 1e3));
  });

  criterion(5, [] {
    const Setup s = resolve(parse_config(kExperiment));
    const double e1 = lamb_dicke(s.species, s.laser, 49.7e3);
    const double e2 = lamb_dicke(s.species, s.laser, 46.6e3);
    const double r1 = std::round(e1 * 100.0) / 100.0;
    const bool ok1 = std::abs(r1 - 0.27) < 1e-9;
    const bool ok2 = std::abs(e2 - 0.284) <= 0.002;
    verdict(5, ok1 && ok2,
            fmt::format("eta(49.7 kHz) = {:.5f} -> {:.2f} (target 0.27); eta(46.6 kHz) = {:.5f} "
                        "(target 0.284 +- 0.002)",
                        e1, r1, e2));
  });

  criterion(6, [] {
    CommandOptions o;
    o.seed = 2024;
    const json p = payload("phase-scan", kExperiment, o);
    const json& st = p["stability"];
    const double res = st["max_residual_rad"].get<double>();
    const double grid = st["max_grid_deviation"].get<double>();
    const double tz = p["max_abs_translation_z_m"].get<double>();
    const int count = st["independent_phase_count"].get<int>();
    const double lambda = p["resolved"]["wavelength_m"].get<double>();
    const double mirror = p["mirror_displacement"]["max_relative_deviation"].get<double>();
    const bool ok = st["trials"].get<int>() == 100 && res < 1e-8 && grid < 1e-8 &&
                    tz < 1e-12 * lambda && mirror < 1e-8 && count == 4;
    verdict(6, ok,
            fmt::format("100 trials: residual {:.2e} rad, grid {:.2e}; max |t_z| {:.2e} lambda; "
                        "mirror shift grid {:.2e}; phases {}",
                        res, grid, tz / lambda, mirror, count));
  });

  criterion(7, [] {
    const json p = payload("misalign", kExperiment);
    const json& a = p["scans"][0];
    const json& b = p["scans"][1];
    const double dd = rel(a["depth_variation_j"].get<double>(), b["depth_variation_j"].get<double>());
    const double df =
        rel(a["frequency_variation_hz"].get<double>(), b["frequency_variation_hz"].get<double>());
    const double ratio = a["variation_spatial_period_m"].get<double>() /
                         b["variation_spatial_period_m"].get<double>();
    const double spread =
        std::max(a["in_plane_spread"].get<double>(), b["in_plane_spread"].get<double>());
    verdict(7, dd < 0.05 && df < 0.05 && std::abs(ratio / 5.0 - 1.0) < 0.05 && spread < 1e-6,
            fmt::format("1 vs 5 mrad: depth p-p differ {:.2f} %, frequency p-p {:.2f} %, period "
                        "ratio {:.3f}, in-plane spread {:.1e}",
                        100 * dd, 100 * df, ratio, spread));
  });

  criterion(8, [] {
    CommandOptions o;
    o.format = "json";
    const json p = payload("heat-scan", kExperiment, o);
    const double ratio = p["resonance_over_2f"].get<double>();
    double peak = 0.0;
    for (const auto& pt : p["scan"]["curve"]) peak = std::max(peak, pt["mean_energy_gain_j"].get<double>());
    json flat_cfg = kExperiment;
    flat_cfg["dynamics"] = {{"modulation_depth", 0.0}, {"heat_steps", 5}};
    const json q = payload("heat-scan", flat_cfg, o);
    double flat = 0.0;
    for (const auto& pt : q["scan"]["curve"])
      flat = std::max(flat, std::abs(pt["mean_energy_gain_j"].get<double>()));
    verdict(8, std::abs(ratio - 1.0) < 0.1 && flat < 1e-2 * peak,
            fmt::format("peak at {:.4f} x 2 f_trap; eps = 0 max |gain| / peak = {:.1e}", ratio,
                        flat / peak));
  });

  criterion(9, [] {
    json cfg = kExperiment;
    cfg["dynamics"] = {{"intensity_scales", {1.0, 0.7, 0.4}}};
    const json p = payload("capture", cfg);
    const json& fr = p["fractions"];
    const double f100 = fr[0]["fraction"].get<double>(), f70 = fr[1]["fraction"].get<double>(),
                 f40 = fr[2]["fraction"].get<double>();
    const bool monotone = f100 >= f70 && f70 >= f40;
    verdict(9, f100 - f40 >= 0.2 && monotone,
            fmt::format("{} method, T = 8.4 uK: fraction 100 % {:.4f}, 70 % {:.4f}, 40 % {:.4f}; "
                        "gap {:.4f} (needs >= 0.2)",
                        p["method"].get<std::string>(), f100, f70, f40, f100 - f40));
  });

  criterion(10, [] {
    const Setup s = resolve(parse_config(kExperiment));
    const double b = zeeman_resonance_field(s.species, 46.6e3) / cst::milligauss;
    const double oracle = 46.6e3 / (0.5 * 1.39962449e6) * 1e3;  // f / (|g_F| mu_B/h), mG
    const json p = payload("drsc", kExperiment);
    const double heat = p["heating_rate_nk_per_ms"].get<double>();
    const bool noted = p.contains("observed_bias_mg") && p.contains("bias_note");
    const bool ok = rel(b, oracle) < 0.01 && heat > 430.0 / 3.0 && heat < 430.0 * 3.0 && noted;
    verdict(10, ok,
            fmt::format("B_res = {:.3f} mG (hand {:.3f}); heating {:.0f} nK/ms vs 430 (x{:.2f}); "
                        "observed 140 mG = {:.2f} x B_res at the measured frequency, reported",
                        b, oracle, heat, heat / 430.0, p["observed_over_resonance"].get<double>()));
  });

  criterion(11, [] {
    const Setup s = resolve(parse_config(kExperiment));
    const BeamSet full = expanded(s.set);
    const double lambda = s.laser.wavelength, h = lambda / 1e3;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pick(-lambda, lambda);
    double g_err = 0.0, h_err = 0.0;
    for (int n = 0; n < 100; ++n) {
      const Vec3 r(pick(rng), pick(rng), std::abs(pick(rng)));
      const PotentialDerivatives d = potential_derivatives(full, s.alpha, r);
      Vec3 g_fd;
      Mat3 h_fd;
      for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        // fourth-order central differences
        const auto u = [&](double m) { return stark_potential(full, s.alpha, r + m * e); };
        const auto g = [&](double m) { return potential_gradient(full, s.alpha, r + m * e); };
        g_fd[a] = (8 * (u(1) - u(-1)) - (u(2) - u(-2))) / (12 * h);
        h_fd.col(a) = (8 * (g(1) - g(-1)) - (g(2) - g(-2))) / (12 * h);
      }
      g_err = std::max(g_err, (d.gradient - g_fd).norm() / d.gradient.norm());
      h_err = std::max(h_err, (d.hessian - h_fd).norm() / d.hessian.norm());
    }

    const Vec3 site(0, 0, lambda * std::sqrt(3.0) / 4.0);
    const double f = trap_frequencies(full, s.alpha, site, s.species.mass)[0];
    Ensemble e;
    e.positions = {site};
    e.velocities = {Vec3(0.012, -0.007, 0.009)};
    SimulationConfig sim;
    sim.time_step = 1.0 / (100.0 * f);
    sim.duration = 1e5 * sim.time_step;
    const Trajectory tr = integrate(e, full, s.alpha, s.species.mass, sim);
    const double drift = rel(tr.final_energy[0], tr.initial_energy[0]);

    json cfg = kExperiment;
    cfg["dynamics"] = {{"N", 100}, {"hold_ms", 1.0}};
    cfg["analysis"] = {{"phase_trials", 10}};
    CommandOptions o;
    o.seed = 77;
    bool identical = true;
    for (const char* cmd : {"analyze", "phase-scan", "capture"})
      identical = identical && run_command(cmd, parse_config(cfg), o).text ==
                                   run_command(cmd, parse_config(cfg), o).text;
    verdict(11, g_err < 1e-6 && h_err < 1e-6 && drift < 1e-4 && identical,
            fmt::format("FD gradient {:.1e}, Hessian {:.1e}; energy drift {:.1e} over 1e5 steps; "
                        "reruns byte-identical: {}",
                        g_err, h_err, drift, identical ? "yes" : "no"));
  });

  fmt::print("summary: {} passed, {} failed\n", passed, failed);
  return broken == 0 ? 0 : 1;
}
