#include "rydsuper/model.hpp"

#include <cmath>

#include "rydsuper/errors.hpp"

namespace rydsuper {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kDenominatorFloor = 1e-300;

Complex guarded(Complex g)
{
    if (!(std::abs(g) > kDenominatorFloor)) {
        throw DegenerateDenominator{};
    }
    return g;
}

ComplexRates shifted(const ComplexRates& r, Complex shift)
{
    return {r.g12 + shift, r.g13 + shift, r.g14 + shift};
}

} // namespace

void AtomSystem::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string(name) + " must be strictly positive");
        }
    };
    positive(gamma2, "gamma2");
    positive(gamma_r, "gamma_r");
    positive(dipole_probe, "dipole_probe");
    positive(dipole_coupling, "dipole_coupling");
    positive(dipole_mw, "dipole_mw");
    positive(lambda_probe, "lambda_probe");
    positive(lambda_coupling, "lambda_coupling");
    positive(mass, "mass");
    positive(temperature, "temperature");
    if (dephasing < 0.0 || !std::isfinite(dephasing)) {
        throw ValidationError("dephasing must be >= 0");
    }
}

void DriveConfig::validate() const
{
    auto finite = [](double v, const char* name) {
        if (!std::isfinite(v)) {
            throw ValidationError(std::string(name) + " must be finite");
        }
    };
    for (const auto* p : {&omega_p, &omega_c, &omega_l, &omega_s}) {
        if (!std::isfinite(p->real()) || !std::isfinite(p->imag())) {
            throw ValidationError("Rabi frequencies must be finite");
        }
    }
    finite(delta_p, "delta_p");
    finite(delta_c, "delta_c");
    finite(delta_l, "delta_l");
    finite(delta_s, "delta_s");
}

ComplexRates complex_rates(const AtomSystem& atom, const DriveConfig& drive)
{
    ComplexRates r;
    r.g12 = Complex{atom.dephasing + 0.5 * atom.gamma2, drive.delta_p};
    r.g13 = Complex{atom.dephasing + 0.5 * atom.gamma_r, drive.delta_p + drive.delta_c};
    r.g14 = Complex{atom.dephasing + 0.5 * atom.gamma_r,
                    drive.delta_p + drive.delta_c - drive.delta_l};
    return r;
}

Complex g_denominator(const ComplexRates& rates, Complex omega_c, Complex omega_l)
{
    return rates.g14 * std::norm(omega_c) +
           rates.g12 * (4.0 * rates.g13 * rates.g14 + std::norm(omega_l));
}

Harmonics1 harmonics_first_order(const AtomSystem& atom, const DriveConfig& drive)
{
    const ComplexRates rates = complex_rates(atom, drive);
    const Complex shift = kI * drive.delta_s;

    const Complex g0 = guarded(g_denominator(rates, drive.omega_c, drive.omega_l));
    const Complex gp = guarded(g_denominator(shifted(rates, shift), drive.omega_c, drive.omega_l));
    const Complex gm = guarded(g_denominator(shifted(rates, -shift), drive.omega_c, drive.omega_l));

    Harmonics1 h;
    h.rho0 = 0.5 * kI * drive.omega_p * (4.0 * rates.g13 * rates.g14 + std::norm(drive.omega_l)) / g0;

    const Complex mixing = 0.5 * kI * drive.omega_p * std::norm(drive.omega_c);
    h.rho_plus = mixing * rates.g14 * drive.omega_l * std::conj(drive.omega_s) / (g0 * gp);
    h.rho_minus =
        mixing * (rates.g14 - shift) * std::conj(drive.omega_l) * drive.omega_s / (g0 * gm);
    return h;
}

} // namespace rydsuper
