#include "chiplattice/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>

#include <fmt/format.h>

#include "chiplattice/constants.hpp"

namespace chiplattice {

namespace cst = constants;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string utc_timestamp() {
  if (const char* env = std::getenv("CHIPLATTICE_TIMESTAMP")) return env;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_envelope(std::string_view command, const json& config, json payload) {
  return {{"tool", "chiplattice"},
          {"version", std::string(kToolVersion)},
          {"command", std::string(command)},
          {"config_hash", "fnv1a64:" + hex64(fnv1a64(config.dump()))},
          {"config", config},
          {"timestamp", utc_timestamp()},
          {"payload", std::move(payload)}};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

namespace {

// JSON has no infinities; unbounded values are emitted as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json minima_json(const std::vector<Minimum>& ms, double lambda) {
  json arr = json::array();
  for (const auto& m : ms)
    arr.push_back({{"position_m", vec_json(m.position)},
                   {"position_lambda", vec_json(m.position / lambda)},
                   {"u_j", m.value},
                   {"u_uk", cst::to_microkelvin(m.value)}});
  return arr;
}

}  // namespace

json to_json(const LatticeReport& r, double lambda) {
  json j;
  const double depth = std::abs(r.u_min);
  j["u_min_j"] = r.u_min;
  j["u_min_uk"] = cst::to_microkelvin(r.u_min);
  j["sites_found"] = r.sites_found;
  j["minima"] = minima_json(r.minima, lambda);
  j["secondary_minima"] = minima_json(r.secondary, lambda);
  json freqs = json::array();
  for (const auto& f : r.trap_frequencies) freqs.push_back({f[0], f[1], f[2]});
  j["trap_frequencies_hz"] = freqs;
  j["isotropy_deviation"] = r.isotropy_deviation;
  j["quartic_x_j_m4"] = r.quartics.d4_x;
  j["quartic_z_j_m4"] = r.quartics.d4_z;
  json barriers = json::array();
  for (const auto& b : r.barriers)
    barriers.push_back({{"distance_m", b.distance},
                        {"distance_lambda", b.distance / lambda},
                        {"displacement_m", vec_json(b.displacement)},
                        {"multiplicity", b.multiplicity},
                        {"barrier_j", b.result.barrier},
                        {"barrier_uk", cst::to_microkelvin(b.result.barrier)},
                        {"barrier_over_depth", b.result.barrier / depth},
                        {"saddle_m", vec_json(b.result.saddle)},
                        {"saddle_u_j", b.result.saddle_value},
                        {"iterations", b.result.iterations},
                        {"max_perpendicular_force", b.result.max_perpendicular_force}});
  j["barriers"] = barriers;
  j["min_barrier_j"] = r.min_barrier;
  j["min_barrier_uk"] = cst::to_microkelvin(r.min_barrier);
  j["min_barrier_over_depth"] = r.min_barrier / depth;
  json pv = json::array(), pvl = json::array();
  for (const auto& v : r.principal.r) {
    pv.push_back(vec_json(v));
    pvl.push_back(vec_json(v / lambda));
  }
  j["principal_vectors_m"] = pv;
  j["principal_vectors_lambda"] = pvl;
  j["lattice_origin_m"] = vec_json(r.principal.origin);
  j["fit_residual_m"] = r.principal.fit_residual;
  j["basis_size"] = r.principal.basis_size;
  j["max_gradient"] = r.max_gradient;
  return j;
}

json to_json(const StabilityReport& r, double lambda, bool include_trials) {
  json j = {{"is_phase_stable", r.is_phase_stable},
            {"trials", r.trials.size()},
            {"max_residual_rad", r.max_residual},
            {"max_grid_deviation", r.max_grid_deviation},
            {"independent_phase_count", r.independent_phase_count}};
  if (include_trials) {
    json arr = json::array();
    for (const auto& t : r.trials)
      arr.push_back({{"delta_rad", t.delta},
                     {"translation_m", vec_json(t.translation.t)},
                     {"translation_lambda", vec_json(t.translation.t / lambda)},
                     {"global_phase_rad", t.translation.global},
                     {"residual_rad", t.translation.residual},
                     {"grid_deviation", t.grid_deviation}});
    j["trial_results"] = arr;
  }
  return j;
}

json to_json(const MisalignmentReport& r, double lambda, bool include_profile) {
  const double mean_depth = [&] {
    double s = 0.0;
    for (const auto& p : r.profile) s += p.depth;
    return r.profile.empty() ? 0.0 : s / r.profile.size();
  }();
  json j = {{"delta_phi_rad", r.delta_phi},
            {"samples", r.profile.size()},
            {"mean_depth_j", mean_depth},
            {"depth_variation_j", r.depth_variation},
            {"depth_variation_uk", r.depth_variation / cst::k_B / cst::microkelvin},
            {"frequency_variation_hz", r.frequency_variation},
            {"variation_spatial_period_m", r.spatial_period},
            {"variation_spatial_period_lambda", r.spatial_period / lambda},
            {"predicted_period_m", r.predicted_period},
            {"in_plane_spread", r.in_plane_spread}};
  if (include_profile) {
    json z = json::array(), d = json::array(), f = json::array();
    for (const auto& p : r.profile) {
      z.push_back(p.position.z());
      d.push_back(p.depth);
      f.push_back(p.frequency);
    }
    j["z_profile"] = {{"z_m", z}, {"depth_j", d}, {"frequency_hz", f}};
  }
  return j;
}

json to_json(const HeatingScan& s) {
  json curve = json::array();
  for (const auto& p : s.curve)
    curve.push_back({{"f_mod_hz", p.modulation_frequency},
                     {"mean_energy_gain_j", p.mean_gain},
                     {"stderr_j", p.stderr_gain}});
  return {{"curve", curve}, {"resonance_hz", finite_or_null(s.resonance)}};
}

}  // namespace chiplattice
