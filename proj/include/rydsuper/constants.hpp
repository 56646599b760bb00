#pragma once

namespace rydsuper::constants {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double epsilon0 = 8.8541878128e-12;         // F/m
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double boltzmann = 1.380649e-23;            // J/K
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double bohr_radius = 5.29177210903e-11;     // m

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double rb87_mass = 1.4432e-25; // kg

// dipole moment in units of e*a0 -> C m
inline constexpr double dipole_si(double dipole_ea0)
{
    return dipole_ea0 * elementary_charge * bohr_radius;
}

inline constexpr const char* version = "CODATA-2018";

} // namespace rydsuper::constants

namespace rydsuper {

// User-facing frequencies are nu = omega/2pi in MHz; all internal math is angular rad/s.
inline constexpr double omega_from_mhz(double mhz) { return constants::two_pi * 1e6 * mhz; }
inline constexpr double mhz_from_omega(double omega) { return omega / (constants::two_pi * 1e6); }
inline constexpr double hz_from_omega(double omega) { return omega / constants::two_pi; }
inline constexpr double omega_from_hz(double hz) { return constants::two_pi * hz; }

} // namespace rydsuper
