#pragma once

#include <complex>

#include "rydsuper/constants.hpp"

namespace rydsuper {

using Complex = std::complex<double>;

// Immutable description of the four-level ladder: ground |1>, excited |2>,
// Rydberg |3>, adjacent Rydberg |4>. All rates are angular (rad/s).
struct AtomSystem {
    double gamma2 = omega_from_mhz(6.07);       // excited-state decay Gamma_2
    double gamma_r = omega_from_mhz(2.4e-3);    // Rydberg-state decay Gamma_r
    double dephasing = 0.0;                     // additional coherence relaxation gamma
    double dipole_probe = 2.44;                 // e*a0
    double dipole_coupling = 0.012;             // e*a0
    double dipole_mw = 1640.184;                // e*a0
    double lambda_probe = 780e-9;               // m
    double lambda_coupling = 480e-9;            // m
    double mass = constants::rb87_mass;         // kg
    double temperature = 293.0;                 // K

    // Room-temperature 87Rb ladder 5S1/2 -> 5P3/2 -> 51D5/2 -> 52P3/2.
    static AtomSystem rb87(double dephasing = 0.0)
    {
        AtomSystem atom;
        atom.dephasing = dephasing;
        return atom;
    }

    // Throws ValidationError. Called at configuration boundaries; the pure
    // operations below accept limiting cases (zero decay) used in tests.
    void validate() const;
};

// Drives of the four transitions. Rabi frequencies may be complex so that the
// phase properties of the mixing products can be exercised; detunings are real.
struct DriveConfig {
    Complex omega_p{0.0, 0.0}; // probe Rabi frequency      (rad/s)
    Complex omega_c{0.0, 0.0}; // coupling Rabi frequency   (rad/s)
    Complex omega_l{0.0, 0.0}; // local MW Rabi frequency   (rad/s)
    Complex omega_s{0.0, 0.0}; // signal MW Rabi frequency  (rad/s)
    double delta_p = 0.0;      // probe detuning            (rad/s)
    double delta_c = 0.0;      // coupling detuning         (rad/s)
    double delta_l = 0.0;      // local MW detuning         (rad/s)
    double delta_s = 0.0;      // beat detuning omega_L - omega_S (rad/s)

    // First-order formulas are documented valid for |Omega_S| <= 0.1 |Omega_L|.
    // Not enforced; callers may warn.
    bool within_first_order_domain() const
    {
        return std::abs(omega_s) <= 0.1 * std::abs(omega_l);
    }

    void validate() const;
};

// gamma_12, gamma_13, gamma_14: complex relaxation rates of the three
// off-diagonal coherences, detunings folded into the imaginary parts.
struct ComplexRates {
    Complex g12;
    Complex g13;
    Complex g14;
};

// First-order harmonic coherences of rho_12: the stationary component and the
// two sidebands oscillating at +/- delta_s.
struct Harmonics1 {
    Complex rho0;
    Complex rho_plus;
    Complex rho_minus;
};

} // namespace rydsuper
