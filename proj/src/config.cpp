#include "chiplattice/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chiplattice/constants.hpp"
#include "chiplattice/error.hpp"

namespace chiplattice {

namespace cst = constants;

namespace {

// Reads one object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::config, "'" + path_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::config, "bad value for '" + path_ + "." + key + "': " + e.what());
    }
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (!j_.contains(key)) return;
    T v{};
    read(key, v);
    out = v;
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorKind::config, "unknown key '" + path_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

AxisRange parse_axis(const json& j, const std::string& path) {
  Section s(j, path);
  AxisRange a;
  s.read("min_lambda", a.min_lambda);
  s.read("max_lambda", a.max_lambda);
  s.read("count", a.count);
  s.finish();
  return a;
}

json axis_json(const AxisRange& a) {
  return {{"min_lambda", a.min_lambda}, {"max_lambda", a.max_lambda}, {"count", a.count}};
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section root(j, "config");
  if (root.has("atom")) {
    Section s(root.child("atom"), "atom");
    s.read("preset", c.atom.preset);
    s.read("mass_kg", c.atom.mass_kg);
    s.read("transition_frequency_thz", c.atom.transition_frequency_thz);
    s.read("linewidth_mhz", c.atom.linewidth_mhz);
    s.read("saturation_intensity_w_m2", c.atom.saturation_intensity_w_m2);
    s.read("lande_g_factor", c.atom.lande_g_factor);
    s.finish();
  }
  if (root.has("laser")) {
    Section s(root.child("laser"), "laser");
    s.read("detuning_ghz", c.laser.detuning_ghz);
    s.read("wavelength_nm", c.laser.wavelength_nm);
    s.read("note", c.laser.note);
    s.finish();
  }
  if (root.has("lattice")) {
    auto& l = c.lattice;
    Section s(root.child("lattice"), "lattice");
    s.read("type", l.type);
    s.read("powers_mw", l.powers_mw);
    s.read("power_mode", l.power_mode);
    s.read("waist_mm", l.waist_mm);
    s.read("waist_definition", l.waist_definition);
    s.read("intensity_w_m2", l.intensity_w_m2);
    s.read("angle_of_incidence_deg", l.angle_of_incidence_deg);
    s.read("incidence_offsets_mrad", l.incidence_offsets_mrad);
    s.read("azimuths_deg", l.azimuths_deg);
    s.read("phases_rad", l.phases_rad);
    s.read("mirror_offset_nm", l.mirror_offset_nm);
    s.read("reflection_phase_rad", l.reflection_phase_rad);
    if (s.has("beams")) {
      const json& arr = s.child("beams");
      if (!arr.is_array()) fail(ErrorKind::config, "'lattice.beams' must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section b(arr[i], "lattice.beams[" + std::to_string(i) + "]");
        BeamRecord r;
        b.read("direction", r.direction);
        b.read("polarization_re", r.polarization_re);
        b.read("polarization_im", r.polarization_im);
        b.read("intensity_w_m2", r.intensity_w_m2);
        b.read("phase_rad", r.phase_rad);
        b.read("group", r.group);
        b.finish();
        l.beams.push_back(r);
      }
    }
    if (s.has("mirror")) {
      Section m(s.child("mirror"), "lattice.mirror");
      m.read("enabled", l.mirror.enabled);
      m.read("normal", l.mirror.normal);
      m.read("offset_nm", l.mirror.offset_nm);
      m.read("reflection_phase_rad", l.mirror.reflection_phase_rad);
      m.finish();
    }
    s.finish();
  }
  if (root.has("analysis")) {
    auto& a = c.analysis;
    Section s(root.child("analysis"), "analysis");
    s.read("seed_resolution", a.seed_resolution);
    s.read("search_lo_lambda", a.search_lo_lambda);
    s.read("search_hi_lambda", a.search_hi_lambda);
    s.read("neb_images", a.neb_images);
    s.read("neb_tolerance", a.neb_tolerance);
    s.read("compare_grid", a.compare_grid);
    s.read("compare_tolerance", a.compare_tolerance);
    s.read("compare_translation", a.compare_translation);
    s.read("stability_grid", a.stability_grid);
    s.read("phase_trials", a.phase_trials);
    s.read("misalign_mrad", a.misalign_mrad);
    s.read("misalign_z_span_lambda", a.misalign_z_span_lambda);
    if (s.has("potential")) {
      Section p(s.child("potential"), "analysis.potential");
      const char* names[3] = {"x", "y", "z"};
      for (int d = 0; d < 3; ++d)
        if (p.has(names[d]))
          a.potential[d] = parse_axis(p.child(names[d]), std::string("analysis.potential.") + names[d]);
      p.finish();
    }
    s.finish();
  }
  if (root.has("dynamics")) {
    auto& d = c.dynamics;
    Section s(root.child("dynamics"), "dynamics");
    s.read("seed", d.seed);
    s.read("dt_s", d.dt_s);
    s.read("gravity", d.gravity);
    s.read("T_uk", d.T_uk);
    s.read("N", d.N);
    s.read("hold_ms", d.hold_ms);
    s.read("ramp_us", d.ramp_us);
    s.read("capture_method", d.capture_method);
    s.read("intensity_scales", d.intensity_scales);
    s.read("heat_T_uk", d.heat_T_uk);
    s.read("heat_N", d.heat_N);
    s.read("heat_hold_ms", d.heat_hold_ms);
    s.read("modulation_depth", d.modulation_depth);
    s.read("heat_fmin_khz", d.heat_fmin_khz);
    s.read("heat_fmax_khz", d.heat_fmax_khz);
    s.read("heat_steps", d.heat_steps);
    s.finish();
  }
  if (root.has("drsc")) {
    Section s(root.child("drsc"), "drsc");
    s.read("measured_trap_frequency_khz", c.drsc.measured_trap_frequency_khz);
    s.read("observed_bias_mg", c.drsc.observed_bias_mg);
    s.read("reference_heating_nk_per_ms", c.drsc.reference_heating_nk_per_ms);
    s.finish();
  }
  root.finish();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  json atom = {{"preset", c.atom.preset}};
  put(atom, "mass_kg", c.atom.mass_kg);
  put(atom, "transition_frequency_thz", c.atom.transition_frequency_thz);
  put(atom, "linewidth_mhz", c.atom.linewidth_mhz);
  put(atom, "saturation_intensity_w_m2", c.atom.saturation_intensity_w_m2);
  put(atom, "lande_g_factor", c.atom.lande_g_factor);
  j["atom"] = atom;

  json laser = {{"detuning_ghz", c.laser.detuning_ghz}, {"note", c.laser.note}};
  put(laser, "wavelength_nm", c.laser.wavelength_nm);
  j["laser"] = laser;

  const auto& l = c.lattice;
  json lat = {{"type", l.type},
              {"powers_mw", l.powers_mw},
              {"power_mode", l.power_mode},
              {"waist_mm", l.waist_mm},
              {"waist_definition", l.waist_definition},
              {"angle_of_incidence_deg", l.angle_of_incidence_deg},
              {"incidence_offsets_mrad", l.incidence_offsets_mrad},
              {"azimuths_deg", l.azimuths_deg},
              {"phases_rad", l.phases_rad},
              {"mirror_offset_nm", l.mirror_offset_nm},
              {"reflection_phase_rad", l.reflection_phase_rad}};
  put(lat, "intensity_w_m2", l.intensity_w_m2);
  if (l.type == "custom") {
    json beams = json::array();
    for (const auto& b : l.beams)
      beams.push_back({{"direction", b.direction},
                       {"polarization_re", b.polarization_re},
                       {"polarization_im", b.polarization_im},
                       {"intensity_w_m2", b.intensity_w_m2},
                       {"phase_rad", b.phase_rad},
                       {"group", b.group}});
    lat["beams"] = beams;
    lat["mirror"] = {{"enabled", l.mirror.enabled},
                     {"normal", l.mirror.normal},
                     {"offset_nm", l.mirror.offset_nm},
                     {"reflection_phase_rad", l.mirror.reflection_phase_rad}};
  }
  j["lattice"] = lat;

  const auto& a = c.analysis;
  json an = {{"seed_resolution", a.seed_resolution},
             {"neb_images", a.neb_images},
             {"neb_tolerance", a.neb_tolerance},
             {"compare_grid", a.compare_grid},
             {"compare_tolerance", a.compare_tolerance},
             {"compare_translation", a.compare_translation},
             {"stability_grid", a.stability_grid},
             {"phase_trials", a.phase_trials},
             {"misalign_mrad", a.misalign_mrad},
             {"potential",
              {{"x", axis_json(a.potential[0])},
               {"y", axis_json(a.potential[1])},
               {"z", axis_json(a.potential[2])}}}};
  put(an, "search_lo_lambda", a.search_lo_lambda);
  put(an, "search_hi_lambda", a.search_hi_lambda);
  put(an, "misalign_z_span_lambda", a.misalign_z_span_lambda);
  j["analysis"] = an;

  const auto& d = c.dynamics;
  json dy = {{"seed", d.seed},
             {"gravity", d.gravity},
             {"T_uk", d.T_uk},
             {"N", d.N},
             {"hold_ms", d.hold_ms},
             {"ramp_us", d.ramp_us},
             {"capture_method", d.capture_method},
             {"intensity_scales", d.intensity_scales},
             {"heat_T_uk", d.heat_T_uk},
             {"heat_N", d.heat_N},
             {"heat_hold_ms", d.heat_hold_ms},
             {"modulation_depth", d.modulation_depth},
             {"heat_steps", d.heat_steps}};
  put(dy, "dt_s", d.dt_s);
  put(dy, "heat_fmin_khz", d.heat_fmin_khz);
  put(dy, "heat_fmax_khz", d.heat_fmax_khz);
  j["dynamics"] = dy;

  j["drsc"] = {{"measured_trap_frequency_khz", c.drsc.measured_trap_frequency_khz},
               {"observed_bias_mg", c.drsc.observed_bias_mg},
               {"reference_heating_nk_per_ms", c.drsc.reference_heating_nk_per_ms}};
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

double intensity_from_power(double power_w, double waist_m, const std::string& definition) {
  require(power_w >= 0.0, ErrorKind::invalid_input, "beam power must be non-negative");
  require(waist_m > 0.0, ErrorKind::invalid_input, "beam waist must be positive");
  const double area = cst::pi * waist_m * waist_m;
  if (definition == "1/e") return power_w / area;
  if (definition == "1/e2") return 2.0 * power_w / area;
  fail(ErrorKind::config, "waist_definition must be '1/e' or '1/e2', got '" + definition + "'");
}

namespace {

Vec3 vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

Setup resolve(const RunConfig& c) {
  Setup s;
  s.species = atom_preset(c.atom.preset);
  if (c.atom.mass_kg) s.species.mass = *c.atom.mass_kg;
  if (c.atom.transition_frequency_thz)
    s.species.transition_angular_frequency = cst::two_pi * *c.atom.transition_frequency_thz * 1e12;
  if (c.atom.linewidth_mhz) s.species.natural_linewidth = cst::two_pi * *c.atom.linewidth_mhz * 1e6;
  if (c.atom.saturation_intensity_w_m2)
    s.species.saturation_intensity = *c.atom.saturation_intensity_w_m2;
  if (c.atom.lande_g_factor) s.species.lande_g_factor = *c.atom.lande_g_factor;
  s.species.validate();

  s.laser = LaserSpec::from_detuning(s.species, cst::two_pi * c.laser.detuning_ghz * 1e9);
  if (c.laser.wavelength_nm) {
    const double lam = *c.laser.wavelength_nm * 1e-9;
    require(std::abs(lam - s.laser.wavelength) <= 1e-9 * s.laser.wavelength,
            ErrorKind::invalid_input,
            "laser.wavelength_nm disagrees with laser.detuning_ghz beyond 1 part in 1e9");
  }
  s.laser.validate(s.species);
  s.alpha = polarizability(s.species, s.laser);
  const double lambda = s.laser.wavelength;

  const auto& l = c.lattice;
  s.type = l.type;
  if (l.intensity_w_m2) {
    s.intensities.fill(*l.intensity_w_m2);
  } else {
    double mean = 0.0;
    for (double p : l.powers_mw) mean += p / 3.0;
    for (int i = 0; i < 3; ++i) {
      const double p = l.power_mode == "mean" ? mean : l.powers_mw[i];
      s.intensities[i] = intensity_from_power(p * 1e-3, l.waist_mm * 1e-3, l.waist_definition);
    }
    if (l.power_mode != "mean" && l.power_mode != "per_beam")
      fail(ErrorKind::config, "power_mode must be 'mean' or 'per_beam'");
  }
  s.intensity = (s.intensities[0] + s.intensities[1] + s.intensities[2]) / 3.0;

  if (l.type == "acl") {
    AclConfig a;
    a.intensities = s.intensities;
    a.wavelength = lambda;
    a.incidence_angle = l.angle_of_incidence_deg * cst::pi / 180.0;
    for (int i = 0; i < 3; ++i) {
      a.incidence_offsets[i] = l.incidence_offsets_mrad[i] * 1e-3;
      a.azimuths[i] = l.azimuths_deg[i] * cst::pi / 180.0;
      a.phases[i] = l.phases_rad[i];
    }
    a.mirror_offset = l.mirror_offset_nm * 1e-9;
    a.reflection_phase = l.reflection_phase_rad;
    s.acl = a;
    s.set = build_acl(a);
  } else if (l.type == "scl") {
    s.scl.intensity = s.intensity;
    s.scl.wavelength = lambda;
    s.set = build_scl(s.scl);
  } else if (l.type == "custom") {
    require(!l.beams.empty(), ErrorKind::config, "custom lattice needs 'lattice.beams'");
    s.set.wavelength = lambda;
    const double k = cst::two_pi / lambda;
    for (std::size_t i = 0; i < l.beams.size(); ++i) {
      const auto& r = l.beams[i];
      Beam b;
      const Vec3 dir = vec(r.direction);
      require(dir.norm() > 0.0, ErrorKind::invalid_input, "beam direction must be non-zero");
      b.wavevector = k * dir.normalized();
      b.polarization = CVec3(vec(r.polarization_re).cast<std::complex<double>>() +
                             std::complex<double>(0.0, 1.0) * vec(r.polarization_im));
      require(b.polarization.norm() > 0.0, ErrorKind::invalid_input, "beam polarization is zero");
      b.polarization.normalize();
      b.amplitude = Beam::amplitude_for_intensity(r.intensity_w_m2);
      b.phase = r.phase_rad;
      b.coherence_group = r.group;
      b.source = static_cast<int>(i);
      s.set.beams.push_back(b);
    }
    s.set.mirror.enabled = l.mirror.enabled;
    s.set.mirror.normal = vec(l.mirror.normal).normalized();
    s.set.mirror.offset = l.mirror.offset_nm * 1e-9;
    s.set.mirror.reflection_phase = l.mirror.reflection_phase_rad;
    s.set.validate();
    double mean = 0.0;
    for (const auto& b : s.set.beams) mean += b.intensity() / s.set.beams.size();
    s.intensity = mean;
  } else {
    fail(ErrorKind::config, "lattice.type must be acl, scl or custom, got '" + l.type + "'");
  }

  s.search_box = default_search_box(lambda, l.type != "scl");
  if (c.analysis.search_lo_lambda) s.search_box.lo = lambda * vec(*c.analysis.search_lo_lambda);
  if (c.analysis.search_hi_lambda) s.search_box.hi = lambda * vec(*c.analysis.search_hi_lambda);
  return s;
}

}  // namespace chiplattice
