#include "rydsuper/oracle.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "rydsuper/errors.hpp"
#include "rydsuper/floquet.hpp"
#include "rydsuper/model.hpp"

namespace rydsuper {

namespace {

double rel_diff(Complex a, Complex b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) {
        return 0.0;
    }
    return std::abs(a - b) / scale;
}

} // namespace

OracleReport run_oracle_check(const OracleOptions& options)
{
    if (options.points < 1) {
        throw ValidationError("oracle check needs at least one point");
    }
    if (options.truncation_order < 3) {
        throw ValidationError("triangle check requires truncation order >= 3");
    }

    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(options.seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    OracleReport report;
    report.points = options.points;

    for (int point = 0; point < options.points; ++point) {
        AtomSystem atom = AtomSystem::rb87(omega_from_mhz(uniform(1.0, 3.5)));

        DriveConfig drive;
        drive.omega_p = omega_from_mhz(uniform(1.0, 6.0));
        drive.omega_c = omega_from_mhz(uniform(3.0, 20.0));
        const double wl = omega_from_mhz(uniform(1.0, 8.0));
        drive.omega_l = std::polar(wl, uniform(0.0, constants::two_pi));
        // Small-signal regime: the closed form drops O(|Omega_S|^2) feedback,
        // so the tightest cross-checks live at small signal amplitude.
        const double ws = omega_from_mhz(uniform(1e-5, 5e-5));
        drive.omega_s = std::polar(ws, uniform(0.0, constants::two_pi));
        drive.delta_p = omega_from_mhz(uniform(-2.0, 2.0));
        drive.delta_c = omega_from_mhz(uniform(-2.0, 2.0));
        drive.delta_l = omega_from_mhz(uniform(-2.0, 2.0));
        drive.delta_s = omega_from_mhz(uniform(0.5, 8.0));

        const Harmonics1 closed = harmonics_first_order(atom, drive);
        const HarmonicSolution order1 = solve_truncated(atom, drive, 1);
        const HarmonicSolution truncated = solve_truncated(atom, drive, options.truncation_order);

        const int cycles = suggested_cycles(atom, drive, 45.0);
        const int steps = suggested_steps_per_cycle(atom, drive, 0.05);
        const HarmonicSolution timed = solve_time_domain(atom, drive, cycles, steps, 1);

        const Complex c[3] = {closed.rho0, closed.rho_plus, closed.rho_minus};
        const int idx[3] = {0, 1, -1};
        for (int k = 0; k < 3; ++k) {
            report.max_closed_vs_order1 =
                std::max(report.max_closed_vs_order1, rel_diff(c[k], order1.rho12(idx[k])));
            report.max_closed_vs_truncated =
                std::max(report.max_closed_vs_truncated, rel_diff(c[k], truncated.rho12(idx[k])));
            report.max_closed_vs_time_domain =
                std::max(report.max_closed_vs_time_domain, rel_diff(c[k], timed.rho12(idx[k])));
            report.max_truncated_vs_time_domain = std::max(
                report.max_truncated_vs_time_domain,
                rel_diff(truncated.rho12(idx[k]), timed.rho12(idx[k])));
        }
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.triangle_pass = report.max_closed_vs_truncated <= options.tol_triangle &&
                           report.max_closed_vs_time_domain <= options.tol_triangle &&
                           report.max_truncated_vs_time_domain <= options.tol_triangle;
    report.order1_pass = report.max_closed_vs_order1 <= options.tol_order1;
    return report;
}

} // namespace rydsuper
