#pragma once

#include <numbers>

// CODATA 2018 exact / recommended values, SI units.
namespace chiplattice::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double c = 299792458.0;                  // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;      // F/m
inline constexpr double h = 6.62607015e-34;               // J s
inline constexpr double hbar = h / two_pi;                // J s
inline constexpr double k_B = 1.380649e-23;               // J/K
inline constexpr double mu_B = 9.2740100783e-24;          // J/T
inline constexpr double standard_gravity = 9.80665;       // m/s^2

// Unit helpers for reports.
inline constexpr double microkelvin = 1e-6;
inline constexpr double milligauss = 1e-7;                // T
inline constexpr double kilohertz = 1e3;

inline double to_microkelvin(double energy_j) { return energy_j / k_B / microkelvin; }
inline double to_kilohertz(double energy_j) { return energy_j / h / kilohertz; }

}  // namespace chiplattice::constants
