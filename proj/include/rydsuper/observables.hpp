#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rydsuper/doppler.hpp"
#include "rydsuper/types.hpp"

namespace rydsuper {

// First-order low-pass photodetector.
struct DetectorModel {
    double f3db_hz = 10e6;

    double magnitude(double f_hz) const
    {
        const double r = f_hz / f3db_hz;
        return 1.0 / std::sqrt(1.0 + r * r);
    }
    double attenuation_db(double f_hz) const
    {
        const double r = f_hz / f3db_hz;
        return -10.0 * std::log10(1.0 + r * r);
    }
};

struct ResponsePoint {
    double delta_s = 0.0;  // rad/s
    double amplitude = 0.0; // relative linear units
};

struct ResponseCurve {
    std::vector<ResponsePoint> points;   // delta_s strictly increasing
    std::optional<double> normalized_at; // rad/s
    std::optional<DetectorModel> detector;

    // Interpolated amplitude (linear in log-frequency / log-amplitude).
    double amplitude_at(double delta_s) const;
    double min_delta_s() const { return points.front().delta_s; }
    double max_delta_s() const { return points.back().delta_s; }
};

struct GainPeak {
    double frequency_hz = 0.0;
    double gain_db = 0.0;
};

struct EITPoint {
    double delta_c = 0.0;        // rad/s
    double ln_transmission = 0.0; // <= 0
};

struct EITSpectrum {
    std::vector<EITPoint> points;
    double beta = 0.0; // scale factor, rad/s
    double od = 0.0;   // implied two-level optical depth
};

// Beat amplitude S = |<rho_12^1> - <rho_12^-1>^*| from Doppler-averaged
// first-order harmonics.
double beat_amplitude(const AtomSystem& atom, const DriveConfig& drive, const DopplerSpec& spec);

struct SidebandAmplitudes {
    double plus = 0.0;  // |<rho_12^1>|
    double minus = 0.0; // |<rho_12^-1>|
};

SidebandAmplitudes sideband_contributions(const AtomSystem& atom, const DriveConfig& drive,
                                          const DopplerSpec& spec);

// Validated curve assembly from raw points (strictly increasing delta_s,
// non-negative amplitudes).
ResponseCurve make_curve(std::vector<ResponsePoint> points);

// Pointwise low-pass multiplication; records the detector on the curve.
ResponseCurve with_detector(ResponseCurve curve, const DetectorModel& detector);

// Divides by the (interpolated) amplitude at normalize_at and records it.
ResponseCurve normalized(ResponseCurve curve, double normalize_at);

inline constexpr double kDefaultNormalizeAt = omega_from_mhz(0.1); // 100 kHz

// Beat amplitude over the delta_s grid, detector applied when supplied, then
// normalized at normalize_at (default 100 kHz).
ResponseCurve response_curve(const AtomSystem& atom, const DriveConfig& drive_template,
                             const DopplerSpec& spec, std::span<const double> delta_s_grid,
                             std::optional<DetectorModel> detector = std::nullopt,
                             std::optional<double> normalize_at = std::nullopt);

// Lowest frequency (Hz) where the normalized curve drops through the -3 dB
// line, the line lowered by the detector attenuation when a detector applies;
// linear interpolation in (log f, dB). nullopt when no crossing is on the grid.
std::optional<double> bandwidth_minus3db(const ResponseCurve& curve,
                                         std::optional<DetectorModel> detector = std::nullopt);

// Interior maximum above 0 dB of a normalized curve, or nullopt.
std::optional<GainPeak> gain_peak(const ResponseCurve& curve);

// ln(P_out/P_in)(Delta_c) = -beta * <Im(rho_12^0 / Omega_p)> with the local
// and signal MWs off; the sign makes absorption a negative log-transmission.
EITSpectrum eit_spectrum(const AtomSystem& atom, const DriveConfig& drive_template,
                         const DopplerSpec& spec, std::span<const double> delta_c_grid,
                         double beta);

std::vector<double> log_grid(double lo, double hi, int n);

} // namespace rydsuper
