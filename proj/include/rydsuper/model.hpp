#pragma once

#include "rydsuper/types.hpp"

namespace rydsuper {

// gamma_12 = gamma + Gamma_2/2 + i*Delta_p
// gamma_13 = gamma + Gamma_r/2 + i*(Delta_p + Delta_c)
// gamma_14 = gamma + Gamma_r/2 + i*(Delta_p + Delta_c - Delta_L)
ComplexRates complex_rates(const AtomSystem& atom, const DriveConfig& drive);

// G = gamma_14 |Omega_c|^2 + gamma_12 (4 gamma_13 gamma_14 + |Omega_L|^2)
Complex g_denominator(const ComplexRates& rates, Complex omega_c, Complex omega_l);

// Closed-form first-order solution of the harmonic hierarchy:
//   rho0      = (i Omega_p / 2) (4 g13 g14 + |Omega_L|^2) / G
//   rho_plus  = (i/2) g14 Omega_p |Omega_c|^2 Omega_L Omega_S^* / (G * G(+i ds))
//   rho_minus = (i/2) (g14 - i ds) Omega_p |Omega_c|^2 Omega_L^* Omega_S / (G * G(-i ds))
// where G(+-i ds) shifts all three rates by +-i*delta_s.
// Throws DegenerateDenominator when any required G magnitude underflows 1e-300.
Harmonics1 harmonics_first_order(const AtomSystem& atom, const DriveConfig& drive);

} // namespace rydsuper
