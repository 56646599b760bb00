#include "rydsuper/calibration.hpp"

#include <cmath>

#include "rydsuper/errors.hpp"

namespace rydsuper {

double rabi_from_power(const BeamGeometry& beam, double dipole_ea0)
{
    if (beam.power < 0.0 || !(beam.waist > 0.0) || !(dipole_ea0 > 0.0)) {
        throw ValidationError("beam power must be >= 0, waist and dipole positive");
    }
    using namespace constants;
    const double peak_field =
        std::sqrt(4.0 * beam.power / (epsilon0 * speed_of_light * pi * beam.waist * beam.waist));
    return peak_field * dipole_si(dipole_ea0) / hbar;
}

double field_from_rabi(double rabi, double dipole_ea0)
{
    if (!(dipole_ea0 > 0.0)) {
        throw ValidationError("dipole moment must be positive");
    }
    return constants::hbar * rabi / constants::dipole_si(dipole_ea0);
}

double rabi_from_field(double field, double dipole_ea0)
{
    if (!(dipole_ea0 > 0.0)) {
        throw ValidationError("dipole moment must be positive");
    }
    return field * constants::dipole_si(dipole_ea0) / constants::hbar;
}

ATCalibration fit_at_splitting(std::span<const ATPoint> data, double dipole_mw_ea0)
{
    if (data.size() < 2) {
        throw InsufficientData("AT calibration needs at least two points");
    }
    double sxx = 0.0;
    double sxy = 0.0;
    for (const ATPoint& p : data) {
        if (!(p.power_mw > 0.0)) {
            throw ValidationError("MW powers must be positive");
        }
        const double x = std::sqrt(p.power_mw);
        sxx += x * x;
        sxy += x * p.splitting_hz;
    }
    ATCalibration cal;
    cal.alpha = sxy / sxx;

    double ssr = 0.0;
    for (const ATPoint& p : data) {
        const double r = p.splitting_hz - cal.alpha * std::sqrt(p.power_mw);
        ssr += r * r;
    }
    if (data.size() > 2) {
        cal.alpha_std_error = std::sqrt(ssr / (static_cast<double>(data.size()) - 1.0) / sxx);
    }
    // splitting is Omega/2pi, so the angular Rabi per sqrt(mW) is 2pi*alpha
    cal.field_per_sqrt_power = field_from_rabi(constants::two_pi * cal.alpha, dipole_mw_ea0);
    return cal;
}

double beta_from_od(const AtomSystem& atom, const DopplerSpec& spec, double od)
{
    if (!(od > 0.0)) {
        throw ValidationError("optical depth must be positive");
    }
    const double integral = two_level_absorption_integral(atom, spec);
    if (!(integral > 0.0)) {
        throw NumericalError("two-level absorption integral is not positive");
    }
    return od / integral;
}

double phase_mismatch(const PropagationGeometry& geometry, double delta_s, double cell_length)
{
    if (cell_length < 0.0) {
        throw ValidationError("cell length must be non-negative");
    }
    const double dk = std::abs(delta_s) / constants::speed_of_light *
                      (1.0 - std::cos(geometry.mw_angle_rad));
    return std::abs(dk * cell_length);
}

} // namespace rydsuper
