#pragma once

// Run configuration: a JSON key tree whose keys carry their units (_mw, _nm, _deg, _uk ...).
// Every key is optional and defaults to the experimental ACL parameters; unknown keys
// are rejected so that a misspelt unit suffix cannot be ignored silently.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chiplattice/analysis.hpp"
#include "chiplattice/atom.hpp"
#include "chiplattice/field.hpp"
#include "chiplattice/lattice_models.hpp"

namespace chiplattice {

using json = nlohmann::json;

struct AtomSection {
  std::string preset = "Rb87-D2";
  std::optional<double> mass_kg;
  std::optional<double> transition_frequency_thz;  // omega_0 / 2 pi
  std::optional<double> linewidth_mhz;             // Gamma / 2 pi
  std::optional<double> saturation_intensity_w_m2;
  std::optional<double> lande_g_factor;
};

struct LaserSection {
  double detuning_ghz = -13.25;          // (omega_L - omega_0) / 2 pi
  std::optional<double> wavelength_nm;   // cross-checked against the detuning when given
  std::string note;
};

struct BeamRecord {
  std::array<double, 3> direction{0, 0, -1};
  std::array<double, 3> polarization_re{1, 0, 0};
  std::array<double, 3> polarization_im{0, 0, 0};
  double intensity_w_m2 = 0.0;
  double phase_rad = 0.0;
  int group = 0;
};

struct MirrorRecord {
  bool enabled = false;
  std::array<double, 3> normal{0, 0, 1};
  double offset_nm = 0.0;
  double reflection_phase_rad = 0.0;
};

struct LatticeSection {
  std::string type = "acl";  // acl | scl | custom
  std::array<double, 3> powers_mw{39.0, 45.0, 44.0};
  std::string power_mode = "mean";  // mean | per_beam
  double waist_mm = 4.0;
  std::string waist_definition = "1/e";  // 1/e: I = P / (pi w^2); 1/e2: I = 2P / (pi w^2)
  std::optional<double> intensity_w_m2;  // per beam; replaces the power/waist conversion
  double angle_of_incidence_deg = 54.735610317245346;  // arctan sqrt 2
  std::array<double, 3> incidence_offsets_mrad{0, 0, 0};
  std::array<double, 3> azimuths_deg{0, 120, 240};
  std::array<double, 3> phases_rad{0, 0, 0};
  double mirror_offset_nm = 0.0;
  double reflection_phase_rad = 3.141592653589793;
  std::vector<BeamRecord> beams;  // custom only
  MirrorRecord mirror;            // custom only
};

struct AxisRange {
  double min_lambda = 0.0;
  double max_lambda = 0.0;
  int count = 1;
};

struct AnalysisSection {
  int seed_resolution = 12;
  std::optional<std::array<double, 3>> search_lo_lambda;
  std::optional<std::array<double, 3>> search_hi_lambda;
  int neb_images = 64;
  double neb_tolerance = 1e-8;
  int compare_grid = 64;
  double compare_tolerance = 1e-10;
  bool compare_translation = true;
  int stability_grid = 16;
  int phase_trials = 100;
  std::vector<double> misalign_mrad{1.0, 5.0};
  std::optional<double> misalign_z_span_lambda;
  // Potential export; defaults to the y = 0 slice through two layers.
  std::array<AxisRange, 3> potential{AxisRange{-1.5, 1.5, 121}, AxisRange{0.0, 0.0, 1},
                                     AxisRange{-1.3, 1.3, 105}};
};

struct DynamicsSection {
  std::uint64_t seed = 1;
  std::optional<double> dt_s;  // default 1 / (100 f_trap)
  bool gravity = false;
  // capture
  double T_uk = 8.4;
  int N = 2000;
  double hold_ms = 15.0;
  double ramp_us = 300.0;
  std::string capture_method = "trajectory";
  std::vector<double> intensity_scales{1.0, 0.4};
  // parametric heating
  double heat_T_uk = 0.5;
  int heat_N = 400;
  double heat_hold_ms = 5.0;
  double modulation_depth = 0.02;
  std::optional<double> heat_fmin_khz;  // default 0.8 f_trap
  std::optional<double> heat_fmax_khz;  // default 2.6 f_trap
  int heat_steps = 41;
};

struct DrscSection {
  double measured_trap_frequency_khz = 49.7;
  double observed_bias_mg = 140.0;
  double reference_heating_nk_per_ms = 430.0;
};

struct RunConfig {
  AtomSection atom;
  LaserSection laser;
  LatticeSection lattice;
  AnalysisSection analysis;
  DynamicsSection dynamics;
  DrscSection drsc;
};

RunConfig parse_config(const json& j);
json to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

/// The config's physical content, resolved to SI.
struct Setup {
  AtomSpecies species;
  LaserSpec laser;
  double alpha = 0.0;
  std::string type;
  std::array<double, 3> intensities{};  // W/m^2 per incident beam (per pair for the SCL)
  double intensity = 0.0;               // mean I0
  BeamSet set;                          // incident beams (mirror not yet applied)
  AclConfig acl;
  SclConfig scl;
  Box search_box;
};

Setup resolve(const RunConfig& cfg);

/// P -> I for the configured waist convention.
double intensity_from_power(double power_w, double waist_m, const std::string& definition);

}  // namespace chiplattice
