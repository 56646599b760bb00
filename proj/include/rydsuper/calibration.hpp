#pragma once

#include <span>

#include "rydsuper/doppler.hpp"
#include "rydsuper/types.hpp"

namespace rydsuper {

struct BeamGeometry {
    double power = 0.0; // W
    double waist = 0.0; // m, Gaussian 1/e^2 radius
};

struct ATPoint {
    double power_mw = 0.0;     // MW source power, mW
    double splitting_hz = 0.0; // measured AT splitting, Hz
};

struct ATCalibration {
    double alpha = 0.0;                // Hz per sqrt(mW)
    double alpha_std_error = 0.0;      // Hz per sqrt(mW)
    double field_per_sqrt_power = 0.0; // (V/m) per sqrt(mW)
};

// Peak Rabi frequency Omega = sqrt(4P / (eps0 c pi w^2)) d/hbar, rad/s.
double rabi_from_power(const BeamGeometry& beam, double dipole_ea0);

// E = hbar Omega / d and its exact inverse.
double field_from_rabi(double rabi, double dipole_ea0);
double rabi_from_field(double field, double dipole_ea0);

// Through-origin least squares of Delta_f = alpha sqrt(P); the field scale
// follows from the MW transition dipole. Throws InsufficientData.
ATCalibration fit_at_splitting(std::span<const ATPoint> data, double dipole_mw_ea0);

// Scale factor making the Omega_c = 0 on-resonance log-transmission equal
// -od: beta = od / <Im(rho_12^0/Omega_p)> evaluated for the bare two-level
// atom at Delta_p = 0. beta is in angular units (rad/s).
double beta_from_od(const AtomSystem& atom, const DopplerSpec& spec, double od);

// Beam/MW axis geometry for the wave-vector mismatch. A single angle covers
// both MWs (one horn); the sidebands co-propagate with the probe.
struct PropagationGeometry {
    double mw_angle_rad = 0.0; // angle between MW axis and the optical axis
};

// |Delta k . l| along the optical axis for the generated sidebands,
// Delta k = k_pm - k_p -+ (k_L - k_S) with k = omega/c per field. Identical
// for both sidebands: (delta_s/c)(1 - cos angle) * l.
double phase_mismatch(const PropagationGeometry& geometry, double delta_s, double cell_length);

} // namespace rydsuper
