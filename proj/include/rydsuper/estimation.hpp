#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "rydsuper/observables.hpp"

namespace rydsuper {

struct FitGuess {
    double gamma = omega_from_mhz(2.0);   // rad/s
    double omega_c = omega_from_mhz(10.0); // rad/s
    double scale = 1e9;                    // beta, rad/s
};

struct FitResult {
    double gamma = 0.0;   // rad/s
    double omega_c = 0.0; // rad/s
    double scale = 0.0;   // rad/s
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::array<double, 3> std_errors{}; // gamma, omega_c, scale (natural units)
};

// Damped least squares over (gamma, omega_c, scale), log-parameterized for
// positivity; finite-difference Jacobian, damping raised whenever a step
// increases the residual. Converged when the relative step < 1e-8 or the
// squared-residual change < 1e-12. Throws NotConverged after 200 iterations,
// BadGuess when the initial residual is not finite.
FitResult fit_eit(std::span<const EITPoint> data, const AtomSystem& atom_template,
                  const DopplerSpec& spec, const FitGuess& guess);

struct Bracket {
    double lo = omega_from_mhz(0.05); // rad/s
    double hi = omega_from_mhz(100.0);
};

struct LocalOptimum {
    double omega_l = 0.0; // rad/s
    double amplitude = 0.0;
};

// Golden-section search on log Omega_L maximizing the beat amplitude at the
// given delta_s, refined to relative bracket 1e-4 after a coarse scan.
// Throws NoInteriorMax when the maximum sits at a bracket edge.
LocalOptimum optimize_local_mw(const AtomSystem& atom, const DriveConfig& drive_template,
                               const DopplerSpec& spec, double delta_s, const Bracket& bracket);

struct SweepPoint {
    double gamma = 0.0;   // rad/s
    double omega_c = 0.0; // rad/s
};

struct SweepOptions {
    Bracket bracket{};
    double optimize_at = kDefaultNormalizeAt;
    std::optional<DetectorModel> detector;
    std::optional<double> normalize_at;
};

// Per point: re-optimize Omega_L at optimize_at, then evaluate the normalized
// response curve. Deterministic ordering follows the input list.
std::vector<ResponseCurve> sweep_response(const AtomSystem& atom_template,
                                          const DriveConfig& drive_template,
                                          const DopplerSpec& spec,
                                          std::span<const SweepPoint> sweep,
                                          std::span<const double> delta_s_grid,
                                          const SweepOptions& options = {});

struct SensitivityInput {
    double response_slope = 0.0; // readout units per (V/m)
    double noise_density = 0.0;  // readout units per sqrt(Hz)
    double delta_s = 0.0;        // rad/s
    ResponseCurve response_curve;
};

// noise / (slope * normalized_response(delta_s)); SNR = 1 in 1 Hz bandwidth.
double estimate_sensitivity(const SensitivityInput& input);

enum class BeatModel {
    first_order,
    truncated,
};

// Log-log slope of readout power (squared beat amplitude) against MW power.
// drive_template.omega_s is the signal Rabi frequency at unit power; each
// sample scales it by sqrt(power). Requires >= 5 powers spanning >= 20 dB.
double linearity_check(const AtomSystem& atom, const DriveConfig& drive_template,
                       const DopplerSpec& spec, std::span<const double> powers,
                       BeatModel model = BeatModel::first_order, int truncation_order = 6);

// Beat amplitude with the sidebands taken from the truncated Floquet solver
// instead of the first-order formulas; exposes saturation.
double beat_amplitude_truncated(const AtomSystem& atom, const DriveConfig& drive,
                                const DopplerSpec& spec, int order);

} // namespace rydsuper
