#include "rydsuper/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "rydsuper/errors.hpp"
#include "rydsuper/floquet.hpp"
#include "rydsuper/model.hpp"

namespace rydsuper {

namespace {

// EIT model: lnT(delta_c) = -scale * <Im(rho_12^0/Omega_p)> at Delta_p = 0.
double eit_ln_transmission(const AtomSystem& atom, const DopplerSpec& spec, double omega_c,
                           double delta_c, double scale)
{
    DriveConfig drive;
    drive.omega_p = 1.0; // rho_12^0/Omega_p does not depend on the probe
    drive.omega_c = omega_c;
    drive.delta_c = delta_c;
    const Complex avg = doppler_average(atom, drive, spec, Coherence::rho0);
    return -scale * std::imag(avg / drive.omega_p);
}

// Solve the symmetric positive 3x3 normal equations in place.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b)
{
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (!(std::abs(a[pivot][col]) > 0.0)) {
            throw NumericalError("singular normal equations in fit");
        }
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) {
                continue;
            }
            const double f = a[r][col] / a[col][col];
            for (int cc = col; cc < 3; ++cc) {
                a[r][cc] -= f * a[col][cc];
            }
            b[r] -= f * b[col];
        }
    }
    return {b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]};
}

std::array<std::array<double, 3>, 3> invert3(std::array<std::array<double, 3>, 3> a)
{
    std::array<std::array<double, 3>, 3> inv{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (!(std::abs(a[pivot][col]) > 0.0)) {
            throw NumericalError("singular covariance in fit");
        }
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double d = a[col][col];
        for (int cc = 0; cc < 3; ++cc) {
            a[col][cc] /= d;
            inv[col][cc] /= d;
        }
        for (int r = 0; r < 3; ++r) {
            if (r == col) {
                continue;
            }
            const double f = a[r][col];
            for (int cc = 0; cc < 3; ++cc) {
                a[r][cc] -= f * a[col][cc];
                inv[r][cc] -= f * inv[col][cc];
            }
        }
    }
    return inv;
}

} // namespace

FitResult fit_eit(std::span<const EITPoint> data, const AtomSystem& atom_template,
                  const DopplerSpec& spec, const FitGuess& guess)
{
    if (data.size() < 10) {
        throw InsufficientData("EIT fit needs at least 10 spectrum points");
    }
    if (!(guess.gamma > 0.0) || !(guess.omega_c > 0.0) || !(guess.scale > 0.0)) {
        throw BadGuess("initial guess must be strictly positive");
    }

    const std::size_t m = data.size();
    // p = (ln gamma, ln omega_c, ln scale) keeps all three positive.
    std::array<double, 3> p{std::log(guess.gamma), std::log(guess.omega_c),
                            std::log(guess.scale)};

    auto residuals = [&](const std::array<double, 3>& q, std::vector<double>& r) {
        AtomSystem atom = atom_template;
        atom.dephasing = std::exp(q[0]);
        const double omega_c = std::exp(q[1]);
        const double scale = std::exp(q[2]);
        for (std::size_t i = 0; i < m; ++i) {
            const double model =
                eit_ln_transmission(atom, spec, omega_c, data[i].delta_c, scale);
            r[i] = model - data[i].ln_transmission;
        }
    };
    auto cost_of = [&](const std::vector<double>& r) {
        double c = 0.0;
        for (double v : r) {
            c += v * v;
        }
        return c;
    };

    std::vector<double> r(m);
    std::vector<double> r_trial(m);
    std::vector<std::array<double, 3>> jac(m);

    residuals(p, r);
    double cost = cost_of(r);
    if (!std::isfinite(cost)) {
        throw BadGuess("initial residual is not finite");
    }

    constexpr int kMaxIterations = 200;
    constexpr double kStepTol = 1e-8;
    constexpr double kCostTol = 1e-12;
    constexpr double kFdStep = 1e-6;

    double lambda = 1e-3;
    bool converged = false;
    int iteration = 0;

    for (; iteration < kMaxIterations && !converged; ++iteration) {
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3> q = p;
            q[k] += kFdStep;
            residuals(q, r_trial);
            for (std::size_t i = 0; i < m; ++i) {
                jac[i][k] = (r_trial[i] - r[i]) / kFdStep;
            }
        }

        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (std::size_t i = 0; i < m; ++i) {
            for (int a = 0; a < 3; ++a) {
                jtr[a] += jac[i][a] * r[i];
                for (int b = 0; b < 3; ++b) {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
            std::array<std::array<double, 3>, 3> damped = jtj;
            for (int a = 0; a < 3; ++a) {
                damped[a][a] += lambda * std::max(jtj[a][a], 1e-30);
            }
            std::array<double, 3> step = solve3(damped, {-jtr[0], -jtr[1], -jtr[2]});

            std::array<double, 3> q{p[0] + step[0], p[1] + step[1], p[2] + step[2]};
            residuals(q, r_trial);
            const double trial_cost = cost_of(r_trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double step_size =
                    std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
                const double improvement = cost - trial_cost;
                p = q;
                std::swap(r, r_trial);
                cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                if (step_size < kStepTol || improvement < kCostTol) {
                    converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            converged = true; // damping saturated: no downhill direction left
        }
    }

    if (!converged) {
        throw NotConverged("EIT fit did not converge within 200 iterations");
    }

    FitResult result;
    result.gamma = std::exp(p[0]);
    result.omega_c = std::exp(p[1]);
    result.scale = std::exp(p[2]);
    result.residual_norm = std::sqrt(cost);
    result.iterations = iteration;
    result.converged = true;

    // refresh the Jacobian at the solution for the error estimate
    for (int k = 0; k < 3; ++k) {
        std::array<double, 3> q = p;
        q[k] += kFdStep;
        residuals(q, r_trial);
        for (std::size_t i = 0; i < m; ++i) {
            jac[i][k] = (r_trial[i] - r[i]) / kFdStep;
        }
    }
    std::array<std::array<double, 3>, 3> jtj{};
    for (std::size_t i = 0; i < m; ++i) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
    }
    if (m > 3) {
        const double variance = cost / (static_cast<double>(m) - 3.0);
        const auto cov = invert3(jtj);
        const std::array<double, 3> natural{result.gamma, result.omega_c, result.scale};
        for (int a = 0; a < 3; ++a) {
            // log-space covariance back to natural units
            result.std_errors[static_cast<std::size_t>(a)] =
                natural[static_cast<std::size_t>(a)] * std::sqrt(std::max(0.0, variance * cov[a][a]));
        }
    }
    return result;
}

LocalOptimum optimize_local_mw(const AtomSystem& atom, const DriveConfig& drive_template,
                               const DopplerSpec& spec, double delta_s, const Bracket& bracket)
{
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo)) {
        throw ValidationError("bracket must satisfy 0 < lo < hi");
    }
    if (bracket.hi < 100.0 * bracket.lo) {
        throw ValidationError("bracket must span at least two decades");
    }

    DriveConfig drive = drive_template;
    drive.delta_s = delta_s;
    auto amplitude_at = [&](double log_wl) {
        drive.omega_l = std::exp(log_wl);
        return beat_amplitude(atom, drive, spec);
    };

    const double lo = std::log(bracket.lo);
    const double hi = std::log(bracket.hi);
    constexpr int kCoarse = 48;
    int best = 0;
    double best_amp = -1.0;
    for (int i = 0; i <= kCoarse; ++i) {
        const double x = lo + (hi - lo) * i / kCoarse;
        const double a = amplitude_at(x);
        if (a > best_amp) {
            best_amp = a;
            best = i;
        }
    }
    if (best == 0 || best == kCoarse) {
        throw NoInteriorMax{};
    }

    double a = lo + (hi - lo) * (best - 1) / kCoarse;
    double b = lo + (hi - lo) * (best + 1) / kCoarse;
    constexpr double kGolden = 0.6180339887498949;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = amplitude_at(x1);
    double f2 = amplitude_at(x2);
    while (b - a > 1e-4) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = amplitude_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = amplitude_at(x1);
        }
    }

    const double x_best = f1 > f2 ? x1 : x2;
    return {std::exp(x_best), std::max(f1, f2)};
}

std::vector<ResponseCurve> sweep_response(const AtomSystem& atom_template,
                                          const DriveConfig& drive_template,
                                          const DopplerSpec& spec,
                                          std::span<const SweepPoint> sweep,
                                          std::span<const double> delta_s_grid,
                                          const SweepOptions& options)
{
    std::vector<ResponseCurve> curves;
    curves.reserve(sweep.size());
    for (const SweepPoint& point : sweep) {
        AtomSystem atom = atom_template;
        atom.dephasing = point.gamma;
        DriveConfig drive = drive_template;
        drive.omega_c = point.omega_c;
        const LocalOptimum opt =
            optimize_local_mw(atom, drive, spec, options.optimize_at, options.bracket);
        drive.omega_l = opt.omega_l;
        curves.push_back(response_curve(atom, drive, spec, delta_s_grid, options.detector,
                                        options.normalize_at));
    }
    return curves;
}

double estimate_sensitivity(const SensitivityInput& input)
{
    if (!(input.response_slope > 0.0)) {
        throw ZeroSlope{};
    }
    if (input.noise_density < 0.0) {
        throw ValidationError("noise density must be >= 0");
    }
    if (!input.response_curve.normalized_at) {
        throw NotNormalized{};
    }
    const double response = input.response_curve.amplitude_at(input.delta_s);
    if (!(response > 0.0)) {
        throw NumericalError("normalized response vanishes at the requested frequency");
    }
    return input.noise_density / (input.response_slope * response);
}

double beat_amplitude_truncated(const AtomSystem& atom, const DriveConfig& drive,
                                const DopplerSpec& spec, int order)
{
    spec.validate();
    if (!spec.thermal()) {
        const HarmonicSolution sol = solve_truncated(atom, drive, order);
        return std::abs(sol.rho12(1) - std::conj(sol.rho12(-1)));
    }
    const QuadratureNodes& q = quadrature_nodes(spec.rule, spec.nodes);
    Complex plus{};
    Complex minus{};
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        const HarmonicSolution sol =
            solve_truncated(atom, doppler_shifted(drive, spec, spec.vp * q.x[i]), order);
        plus += q.w[i] * sol.rho12(1);
        minus += q.w[i] * sol.rho12(-1);
    }
    const double norm = std::sqrt(constants::pi);
    return std::abs(plus / norm - std::conj(minus / norm));
}

double linearity_check(const AtomSystem& atom, const DriveConfig& drive_template,
                       const DopplerSpec& spec, std::span<const double> powers, BeatModel model,
                       int truncation_order)
{
    if (powers.size() < 5) {
        throw InsufficientData("linearity check needs at least 5 powers");
    }
    double lo = powers.front();
    double hi = powers.front();
    for (double p : powers) {
        if (!(p > 0.0)) {
            throw ValidationError("powers must be positive");
        }
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi < 100.0 * lo) {
        throw InsufficientData("powers must span at least 20 dB");
    }

    const std::size_t n = powers.size();
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (double p : powers) {
        DriveConfig drive = drive_template;
        drive.omega_s = drive_template.omega_s * std::sqrt(p);
        const double amplitude = model == BeatModel::first_order
                                     ? beat_amplitude(atom, drive, spec)
                                     : beat_amplitude_truncated(atom, drive, spec, truncation_order);
        const double x = std::log(p);
        const double y = std::log(amplitude * amplitude); // readout power
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

} // namespace rydsuper
