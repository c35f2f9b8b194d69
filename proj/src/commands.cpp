#include "chiplattice/commands.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "chiplattice/constants.hpp"
#include "chiplattice/dynamics.hpp"
#include "chiplattice/kernels.hpp"
#include "chiplattice/report.hpp"

namespace chiplattice {

namespace cst = constants;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"potential", "analyze",   "compare",
                                                 "phase-scan", "misalign", "heat-scan",
                                                 "capture",   "drsc"};
  return names;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return exit_code::invalid_input;
    case ErrorKind::geometry: return exit_code::geometry;
    case ErrorKind::empty_result: return exit_code::empty_result;
    case ErrorKind::convergence: return exit_code::convergence;
    case ErrorKind::divergence: return exit_code::divergence;
    case ErrorKind::not_a_minimum: return exit_code::not_a_minimum;
    case ErrorKind::no_resonance: return exit_code::no_resonance;
    case ErrorKind::insufficient_span: return exit_code::insufficient_span;
    case ErrorKind::unknown_method: return exit_code::unknown_method;
    case ErrorKind::io: return exit_code::io;
    case ErrorKind::config: return exit_code::usage;
  }
  return exit_code::internal;
}

std::string error_json(std::string_view kind, std::string_view message, int code) {
  json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  return j.dump();
}

namespace {

struct Context {
  const RunConfig& cfg;
  json config;  // canonical echo
  Setup setup;
  std::uint64_t seed;
  std::string name;
};

json resolved_json(const Setup& s) {
  return {{"lattice", s.type},
          {"wavelength_m", s.laser.wavelength},
          {"detuning_rad_s", s.laser.detuning},
          {"alpha_si", s.alpha},
          {"intensity_w_m2", s.intensity},
          {"beam_intensities_w_m2", s.intensities},
          {"atom", s.species.label},
          {"mass_kg", s.species.mass}};
}

std::string metadata_lines(const Context& c, const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += "# " + k + "=" + v + "\n"; };
  line("tool", "chiplattice");
  line("version", std::string(kToolVersion));
  line("command", c.name);
  line("config_hash", "fnv1a64:" + hex64(fnv1a64(c.config.dump())));
  line("timestamp", utc_timestamp());
  line("lattice", c.setup.type);
  line("wavelength_m", format_number(c.setup.laser.wavelength));
  line("alpha_si", format_number(c.setup.alpha));
  line("intensity_w_m2", format_number(c.setup.intensity));
  for (const auto& [k, v] : extra) line(k, v);
  return out;
}

std::string output_format(const CommandOptions& opt, const char* fallback) {
  const std::string f = opt.format.value_or(fallback);
  if (f != "csv" && f != "json") fail(ErrorKind::config, "--format must be csv or json");
  return f;
}

void require_json_only(const CommandOptions& opt, const std::string& name) {
  if (opt.format && *opt.format != "json")
    fail(ErrorKind::config, "command '" + name + "' only emits json");
}

AnalysisOptions analysis_options(const Context& c, bool barriers = true) {
  AnalysisOptions a;
  a.cell = c.setup.search_box;
  a.seed_resolution = c.cfg.analysis.seed_resolution;
  a.neb.images = c.cfg.analysis.neb_images;
  a.neb.tolerance = c.cfg.analysis.neb_tolerance;
  a.barriers = barriers;
  return a;
}

double mean_frequency(const std::array<double, 3>& f) { return (f[0] + f[1] + f[2]) / 3.0; }

std::string envelope_text(const Context& c, json payload) {
  return make_envelope(c.name, c.config, std::move(payload)).dump(2) + "\n";
}

// ---- potential ----

CommandOutput cmd_potential(const Context& c, const CommandOptions& opt) {
  const std::string format = output_format(opt, "csv");
  const double lambda = c.setup.laser.wavelength;
  std::array<GridAxis, 3> axes;
  for (int d = 0; d < 3; ++d) {
    const auto& r = c.cfg.analysis.potential[d];
    axes[d] = {r.min_lambda * lambda, r.max_lambda * lambda, static_cast<std::size_t>(std::max(r.count, 0))};
    if (opt.grid && r.min_lambda != r.max_lambda) axes[d].count = static_cast<std::size_t>(*opt.grid);
    if (r.count < 1 || (opt.grid && *opt.grid < 1))
      fail(ErrorKind::invalid_input, "grid resolution must be positive");
    // one sample: the midpoint of the range
    if (axes[d].count == 1) axes[d].min = axes[d].max = 0.5 * (axes[d].min + axes[d].max);
  }
  const PotentialGrid grid = potential_grid(c.setup.set, c.setup.alpha, axes);

  CommandOutput out;
  if (format == "json") {
    json ax = json::array();
    for (const auto& a : axes) ax.push_back({{"min_m", a.min}, {"max_m", a.max}, {"count", a.count}});
    out.text = envelope_text(c, {{"resolved", resolved_json(c.setup)},
                                 {"axes", ax},
                                 {"order", "x-slowest,z-fastest"},
                                 {"values_j", grid.values}});
    return out;
  }
  std::string text = metadata_lines(
      c, {{"nx", std::to_string(axes[0].count)},
          {"ny", std::to_string(axes[1].count)},
          {"nz", std::to_string(axes[2].count)},
          {"order", "x-slowest,z-fastest"},
          {"units", "x_m=m;y_m=m;z_m=m;U_j=J;U_uk=microkelvin(U/k_B)"}});
  text += "x_m,y_m,z_m,U_j,U_uk\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 p = grid.point(i);
    text += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.x(), p.y(), p.z(),
                        grid.values[i], cst::to_microkelvin(grid.values[i]));
  }
  out.text = std::move(text);
  return out;
}

// ---- analyze ----

json analytic_reference(const Setup& s, double u_min) {
  const double k = cst::two_pi / s.laser.wavelength;
  const double k4 = k * k * k * k;
  const double lambda = s.laser.wavelength;
  json ref;
  if (s.type == "acl") {
    ref["u_min_j"] = acl_reference_depth(s.intensity, s.alpha);
    ref["quartic_x_j_m4"] = u_min * k4;
    ref["quartic_z_j_m4"] = 8.0 / 9.0 * u_min * k4;
    ref["min_barrier_j"] = 0.8 * std::abs(u_min);
    ref["principal_vectors_lambda"] = {{std::sqrt(2.0 / 3.0), 0.0, 0.0},
                                       {std::sqrt(1.0 / 6.0), std::sqrt(0.5), 0.0},
                                       {0.0, 0.0, std::sqrt(3.0) / 2.0}};
  } else if (s.type == "scl") {
    ref["u_min_j"] = scl_reference_depth(s.intensity, s.alpha);
    ref["quartic_x_j_m4"] = 8.0 / 3.0 * u_min * k4;
    ref["quartic_z_j_m4"] = 8.0 / 3.0 * u_min * k4;
    ref["min_barrier_j"] = std::abs(u_min) / 3.0;
    ref["principal_vectors_lambda"] = {{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.5}};
  } else {
    return nullptr;
  }
  ref["trap_frequency_hz"] = std::sqrt(-2.0 * u_min / (3.0 * s.species.mass)) / lambda;
  return ref;
}

CommandOutput cmd_analyze(const Context& c, const CommandOptions& opt) {
  require_json_only(opt, c.name);
  const LatticeReport rep =
      analyze_lattice(c.setup.set, c.setup.alpha, c.setup.species.mass, analysis_options(c));
  json payload = {{"resolved", resolved_json(c.setup)},
                  {"lattice", to_json(rep, c.setup.laser.wavelength)},
                  {"trap_frequency_hz", mean_frequency(rep.trap_frequencies.front())},
                  {"analytic_reference", analytic_reference(c.setup, rep.u_min)}};
  return {envelope_text(c, std::move(payload)), false};
}

// ---- compare ----

// Least-squares t, c_g with -k.t + c_g = phase_b - phase_a beam by beam; both sets must share
// wavevectors and ordering.
PhaseTranslation relative_translation(const BeamSet& a, const BeamSet& b) {
  require(a.beams.size() == b.beams.size(), ErrorKind::geometry, "beam sets differ in size");
  const double lambda = a.wavelength;
  const std::size_t nb = a.beams.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, 4);
  Eigen::VectorXd rhs(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    require((a.beams[i].wavevector - b.beams[i].wavevector).norm() <= 1e-9 * a.beams[i].wavevector.norm(),
            ErrorKind::geometry, "beam sets differ in wavevectors");
    m.block<1, 3>(i, 0) = -(a.beams[i].wavevector * lambda).transpose();
    m(i, 3) = 1.0;
    rhs[i] = b.beams[i].phase - a.beams[i].phase;
  }
  const Eigen::VectorXd x = m.completeOrthogonalDecomposition().solve(rhs);
  PhaseTranslation out;
  out.t = x.head<3>() * lambda;
  out.global = {x[3]};
  out.residual = (m * x - rhs).cwiseAbs().maxCoeff();
  return out;
}

CommandOutput cmd_compare(const Context& c, const CommandOptions& opt) {
  require_json_only(opt, c.name);
  if (c.setup.type != "acl") fail(ErrorKind::config, "compare needs an acl lattice");
  const double lambda = c.setup.laser.wavelength;
  const int n = opt.grid.value_or(c.cfg.analysis.compare_grid);
  require(n >= 2, ErrorKind::invalid_input, "compare grid must be >= 2");

  // One closed-form unit cell, sampled on [0, 1)^3 in cell coordinates.
  const Vec3 r1 = lambda * Vec3(std::sqrt(2.0 / 3.0), 0, 0);
  const Vec3 r2 = lambda * Vec3(std::sqrt(1.0 / 6.0), std::sqrt(0.5), 0);
  const Vec3 r3 = lambda * Vec3(0, 0, std::sqrt(3.0) / 2.0);
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  std::vector<double> x(total), y(total), z(total), brute(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Vec3 p = r1 * double(i / (n * n)) / n + r2 * double((i / n) % n) / n + r3 * double(i % n) / n;
    x[i] = p.x(), y[i] = p.y(), z[i] = p.z();
  }
  const BeamSet full = expanded(c.setup.set);
  kernels::potential(kernels::pack(full, c.setup.alpha), {x, y, z}, brute);

  // The translation that the configured phases, reflection phase and mirror offset imply
  // relative to the closed form's reference geometry.
  AclConfig ref = c.setup.acl;
  ref.phases = {0, 0, 0};
  ref.reflection_phase = cst::pi;
  ref.mirror_offset = 0.0;
  const BeamSet ref_set = build_acl(ref);
  const PhaseTranslation tr = relative_translation(expanded(ref_set), expanded(c.setup.set));

  const double u_ref = acl_reference_depth(c.setup.intensity, c.setup.alpha);
  double max_dev = 0.0, mean_dev = 0.0, max_tr = 0.0, mean_tr = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const Vec3 p(x[i], y[i], z[i]);
    const double direct = std::abs(acl_closed_form(c.setup.intensity, c.setup.alpha, lambda, p) - brute[i]);
    const double shifted =
        std::abs(acl_closed_form(c.setup.intensity, c.setup.alpha, lambda, p - tr.t) - brute[i]);
    max_dev = std::max(max_dev, direct);
    max_tr = std::max(max_tr, shifted);
    mean_dev += direct / total;
    mean_tr += shifted / total;
  }
  const double tol = c.cfg.analysis.compare_tolerance;
  const double depth = std::abs(u_ref);
  const bool pass_direct = max_dev < tol * depth;
  const bool pass_translated = max_tr < tol * depth;
  const bool pass = c.cfg.analysis.compare_translation ? (pass_direct || pass_translated) : pass_direct;
  json payload = {{"resolved", resolved_json(c.setup)},
                  {"grid", n},
                  {"samples", total},
                  {"reference_u_min_j", u_ref},
                  {"max_abs_deviation_j", max_dev},
                  {"mean_abs_deviation_j", mean_dev},
                  {"max_relative_deviation", max_dev / depth},
                  {"translation_m", vec_json(tr.t)},
                  {"translation_residual_rad", tr.residual},
                  {"translated_max_abs_deviation_j", max_tr},
                  {"translated_mean_abs_deviation_j", mean_tr},
                  {"translated_max_relative_deviation", max_tr / depth},
                  {"tolerance", tol},
                  {"translation_allowed", c.cfg.analysis.compare_translation},
                  {"pass", pass}};
  return {envelope_text(c, std::move(payload)), !pass};
}

// ---- phase-scan ----

CommandOutput cmd_phase_scan(const Context& c, const CommandOptions& opt) {
  require_json_only(opt, c.name);
  const BeamSet& set = c.setup.set;
  const PhaseKnobs knobs = phase_knobs(set);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> phase(-cst::pi, cst::pi);
  std::vector<std::vector<double>> trials;
  for (int t = 0; t < c.cfg.analysis.phase_trials; ++t) {
    std::vector<double> d(knobs.count(), 0.0);
    for (int k = 0; k < knobs.sources; ++k) d[k] = phase(rng);  // mirror knob held
    trials.push_back(d);
  }
  StabilityOptions so;
  so.grid = opt.grid.value_or(c.cfg.analysis.stability_grid);
  so.cell = c.setup.search_box;
  const StabilityReport rep = verify_phase_stability(set, c.setup.alpha, trials, so);
  double max_tz = 0.0;
  for (const auto& t : rep.trials) max_tz = std::max(max_tz, std::abs(t.translation.t.z()));

  // Common-mode shift of every incident beam.
  std::vector<double> common(knobs.count(), 0.0);
  for (int k = 0; k < knobs.sources; ++k) common[k] = 0.7;
  const PhaseTranslation cm = translation_from_phases(set, common);

  json payload = {{"resolved", resolved_json(c.setup)},
                  {"seed", c.seed},
                  {"stability", to_json(rep, c.setup.laser.wavelength, true)},
                  {"max_abs_translation_z_m", max_tz},
                  {"common_mode_translation_m", vec_json(cm.t)}};

  if (set.mirror.enabled) {
    // Moving the mirror by d must shift the pattern by exactly d along its normal.
    const double lambda = c.setup.laser.wavelength;
    const double d = 0.137 * lambda;
    BeamSet moved = set;
    moved.mirror.offset += d;
    const kernels::PackedField base = kernels::pack(expanded(set), c.setup.alpha);
    const kernels::PackedField shifted = kernels::pack(expanded(moved), c.setup.alpha);
    const std::size_t g = so.grid, n = g * g * g;
    std::vector<double> x(n), y(n), z(n), xs(n), ys(n), zs(n), u0(n), u1(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 f((i / (g * g) + 0.5) / g, ((i / g) % g + 0.5) / g, (i % g + 0.5) / g);
      const Vec3 p = so.cell.lo + f.cwiseProduct(so.cell.hi - so.cell.lo);
      const Vec3 q = p - d * set.mirror.normal;
      x[i] = p.x(), y[i] = p.y(), z[i] = p.z();
      xs[i] = q.x(), ys[i] = q.y(), zs[i] = q.z();
    }
    kernels::potential(shifted, {x, y, z}, u1);
    kernels::potential(base, {xs, ys, zs}, u0);
    double scale = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(u0[i]));
    for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(u1[i] - u0[i]) / scale);
    payload["mirror_displacement"] = {{"offset_m", d}, {"max_relative_deviation", dev}};
  }
  return {envelope_text(c, std::move(payload)), false};
}

// ---- misalign ----

CommandOutput cmd_misalign(const Context& c, const CommandOptions& opt) {
  const std::string format = output_format(opt, "json");
  if (c.setup.type != "acl") fail(ErrorKind::config, "misalign needs an acl lattice");
  const double lambda = c.setup.laser.wavelength;
  std::vector<double> dphi;
  for (double m : c.cfg.analysis.misalign_mrad) dphi.push_back(m * 1e-3);
  require(!dphi.empty(), ErrorKind::invalid_input, "misalign needs at least one delta phi");
  const double layer = lambda / (2.0 * std::cos(c.setup.acl.incidence_angle));
  double span;
  if (c.cfg.analysis.misalign_z_span_lambda) {
    span = *c.cfg.analysis.misalign_z_span_lambda * lambda;
  } else {
    double longest = 0.0;
    for (double d : dphi) {
      AclConfig a = c.setup.acl;
      a.incidence_offsets[0] += d;
      longest = std::max(longest, predicted_beat_period(build_acl(a), layer));
    }
    span = longest > 0.0 ? 1.5 * longest : 20.0 * layer;
  }
  const auto reps =
      misalignment_scan(c.setup.acl, c.setup.alpha, c.setup.species.mass, dphi, span);

  if (format == "csv") {
    std::string text = metadata_lines(
        c, {{"z_span_m", format_number(span)},
            {"units", "delta_phi_rad=rad;z_m=m;depth_j=J;depth_uk=microkelvin(U/k_B);frequency_hz=Hz"}});
    text += "delta_phi_rad,z_m,depth_j,depth_uk,frequency_hz\n";
    for (const auto& r : reps)
      for (const auto& p : r.profile)
        text += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.delta_phi, p.position.z(),
                            p.depth, cst::to_microkelvin(p.depth), p.frequency);
    return {text, false};
  }
  json arr = json::array();
  for (const auto& r : reps) arr.push_back(to_json(r, lambda, true));
  json payload = {{"resolved", resolved_json(c.setup)}, {"z_span_m", span}, {"scans", arr}};
  return {envelope_text(c, std::move(payload)), false};
}

// ---- dynamics helpers ----

struct LatticeBasics {
  LatticeReport rep;
  Vec3 site;
  double f_mean = 0.0;
  double f_max = 0.0;
  Cell cell;
  double radius = 0.0;
};

LatticeBasics lattice_basics(const Context& c, bool barriers) {
  LatticeBasics b;
  b.rep = analyze_lattice(c.setup.set, c.setup.alpha, c.setup.species.mass,
                          analysis_options(c, barriers));
  b.site = b.rep.minima.front().position;
  b.f_mean = mean_frequency(b.rep.trap_frequencies.front());
  b.f_max = b.rep.trap_frequencies.front()[2];
  b.cell = Cell::centred(b.site, b.rep.principal.r);
  for (const auto& v : b.rep.principal.r) b.radius = std::max(b.radius, v.norm());
  return b;
}

// ---- heat-scan ----

CommandOutput cmd_heat_scan(const Context& c, const CommandOptions& opt) {
  const std::string format = output_format(opt, "csv");
  const auto& d = c.cfg.dynamics;
  const LatticeBasics lb = lattice_basics(c, true);
  const double dt = d.dt_s.value_or(1.0 / (100.0 * lb.f_max));
  const double fmin = d.heat_fmin_khz ? *d.heat_fmin_khz * 1e3 : 0.8 * lb.f_mean;
  const double fmax = d.heat_fmax_khz ? *d.heat_fmax_khz * 1e3 : 2.6 * lb.f_mean;
  require(d.heat_steps >= 2 && fmax > fmin, ErrorKind::invalid_input, "bad heating scan range");
  std::vector<double> freqs;
  for (int i = 0; i < d.heat_steps; ++i) freqs.push_back(fmin + (fmax - fmin) * i / (d.heat_steps - 1));
  if (!(fmin <= 2.0 * lb.f_mean && 2.0 * lb.f_mean <= fmax))
    fail(ErrorKind::invalid_input, "heating scan range must bracket 2 f_trap");

  EquilibriumOptions eq;
  eq.u_min = lb.rep.u_min;
  eq.bound_only = true;
  eq.bound_energy = lb.rep.min_barrier;
  const Ensemble ens = sample_equilibrium(d.heat_T_uk * cst::microkelvin, c.setup.species,
                                          c.setup.set, c.setup.alpha, lb.cell,
                                          static_cast<std::size_t>(d.heat_N), c.seed, eq);
  HeatingOptions ho;
  ho.time_step = dt;
  ho.reference_frequency = lb.f_max;
  ho.gravity = d.gravity;
  const HeatingScan scan = parametric_heating_scan(ens, c.setup.set, c.setup.alpha, c.setup.species.mass,
                                                   freqs, d.modulation_depth, d.heat_hold_ms * 1e-3, ho);
  if (format == "csv") {
    std::string text = metadata_lines(
        c, {{"trap_frequency_hz", format_number(lb.f_mean)},
            {"resonance_hz", format_number(scan.resonance)},
            {"modulation_depth", format_number(d.modulation_depth)},
            {"hold_s", format_number(d.heat_hold_ms * 1e-3)},
            {"temperature_k", format_number(d.heat_T_uk * cst::microkelvin)},
            {"particles", std::to_string(d.heat_N)},
            {"seed", std::to_string(c.seed)},
            {"time_step_s", format_number(dt)},
            {"units", "f_mod_hz=Hz;mean_energy_gain_j=J;stderr_j=J"}});
    text += "f_mod_hz,mean_energy_gain_j,stderr_j\n";
    for (const auto& p : scan.curve)
      text += fmt::format("{:.17g},{:.17g},{:.17g}\n", p.modulation_frequency, p.mean_gain, p.stderr_gain);
    return {text, false};
  }
  json payload = {{"resolved", resolved_json(c.setup)},
                  {"trap_frequency_hz", lb.f_mean},
                  {"scan", to_json(scan)},
                  {"resonance_over_2f", scan.resonance / (2.0 * lb.f_mean)},
                  {"modulation_depth", d.modulation_depth},
                  {"hold_s", d.heat_hold_ms * 1e-3},
                  {"temperature_k", d.heat_T_uk * cst::microkelvin},
                  {"particles", d.heat_N},
                  {"seed", c.seed},
                  {"time_step_s", dt}};
  return {envelope_text(c, std::move(payload)), false};
}

// ---- capture ----

CommandOutput cmd_capture(const Context& c, const CommandOptions& opt) {
  require_json_only(opt, c.name);
  const auto& d = c.cfg.dynamics;
  const CaptureMethod method = capture_method_from_string(d.capture_method);
  require(!d.intensity_scales.empty(), ErrorKind::invalid_input, "capture needs intensity scales");
  const LatticeBasics lb = lattice_basics(c, true);
  CaptureOptions co;
  co.region = lb.cell;
  co.u_min = lb.rep.u_min;
  co.min_barrier = lb.rep.min_barrier;
  co.escape_radius = lb.radius;
  co.hold = d.hold_ms * 1e-3;
  co.ramp_time = d.ramp_us * 1e-6;
  co.time_step = d.dt_s.value_or(1.0 / (100.0 * lb.f_max));
  co.reference_frequency = lb.f_max;
  co.gravity = d.gravity;
  json arr = json::array();
  std::vector<std::pair<double, double>> points;
  for (double s : d.intensity_scales) {
    const CaptureResult r = capture_fraction(d.T_uk * cst::microkelvin, c.setup.species, c.setup.set,
                                             c.setup.alpha, s, static_cast<std::size_t>(d.N), c.seed,
                                             method, co);
    arr.push_back({{"intensity_scale", s}, {"fraction", r.fraction}, {"captured", r.captured},
                   {"total", r.total}});
    points.emplace_back(s, r.fraction);
  }
  std::sort(points.begin(), points.end());
  bool monotone = true;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].second < points[i - 1].second) monotone = false;
  json payload = {{"resolved", resolved_json(c.setup)},
                  {"method", to_string(method)},
                  {"temperature_k", d.T_uk * cst::microkelvin},
                  {"particles", d.N},
                  {"seed", c.seed},
                  {"hold_s", co.hold},
                  {"ramp_s", co.ramp_time},
                  {"time_step_s", co.time_step},
                  {"escape_radius_m", co.escape_radius},
                  {"fractions", arr},
                  {"monotone", monotone},
                  {"gap_max_minus_min_scale", points.back().second - points.front().second}};
  return {envelope_text(c, std::move(payload)), false};
}

// ---- drsc ----

CommandOutput cmd_drsc(const Context& c, const CommandOptions& opt) {
  require_json_only(opt, c.name);
  const LatticeBasics lb = lattice_basics(c, false);
  const AtomSpecies& sp = c.setup.species;
  const LaserSpec& laser = c.setup.laser;
  const double f_pred = lb.f_mean;
  const double f_meas = c.cfg.drsc.measured_trap_frequency_khz * 1e3;
  const double er = recoil_energy(sp, laser);
  const double i_local = 2.0 * cst::c * cst::epsilon0 * std::abs(lb.rep.u_min) / c.setup.alpha;
  const double gamma_sc = scattering_rate(sp, laser, i_local);
  const double heating_nk_ms = heating_rate_estimate(sp, laser, i_local) * 1e9 / 1e3;
  const double b_pred = zeeman_resonance_field(sp, f_pred);
  const double b_meas = zeeman_resonance_field(sp, f_meas);
  const double b_obs = c.cfg.drsc.observed_bias_mg * cst::milligauss;
  json payload = {
      {"resolved", resolved_json(c.setup)},
      {"trap_frequency_hz", f_pred},
      {"measured_trap_frequency_hz", f_meas},
      {"recoil_energy_j", er},
      {"recoil_frequency_hz", er / cst::h},
      {"lamb_dicke", lamb_dicke(sp, laser, f_pred)},
      {"lamb_dicke_measured", lamb_dicke(sp, laser, f_meas)},
      {"b_resonance_t", b_pred},
      {"b_resonance_mg", b_pred / cst::milligauss},
      {"b_resonance_measured_mg", b_meas / cst::milligauss},
      {"observed_bias_mg", c.cfg.drsc.observed_bias_mg},
      {"observed_over_resonance", b_obs / b_meas},
      {"bias_note",
       "observed optimum differs from the first-order degeneracy field; reported, not reconciled"},
      {"trap_bottom_intensity_w_m2", i_local},
      {"scattering_rate_per_s", gamma_sc},
      {"heating_rate_nk_per_ms", heating_nk_ms},
      {"reference_heating_nk_per_ms", c.cfg.drsc.reference_heating_nk_per_ms},
      {"heating_ratio", heating_nk_ms / c.cfg.drsc.reference_heating_nk_per_ms},
      {"far_detuned", is_far_detuned(sp, laser)}};
  return {envelope_text(c, std::move(payload)), false};
}

}  // namespace

CommandOutput run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt) {
  Context c{cfg, to_json(cfg), resolve(cfg), opt.seed.value_or(cfg.dynamics.seed), name};
  if (opt.seed) c.config["dynamics"]["seed"] = *opt.seed;
  if (name == "potential") return cmd_potential(c, opt);
  if (name == "analyze") return cmd_analyze(c, opt);
  if (name == "compare") return cmd_compare(c, opt);
  if (name == "phase-scan") return cmd_phase_scan(c, opt);
  if (name == "misalign") return cmd_misalign(c, opt);
  if (name == "heat-scan") return cmd_heat_scan(c, opt);
  if (name == "capture") return cmd_capture(c, opt);
  if (name == "drsc") return cmd_drsc(c, opt);
  fail(ErrorKind::config, "unknown command '" + name + "'");
}

}  // namespace chiplattice
