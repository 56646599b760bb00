#include "rydsuper/doppler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "rydsuper/errors.hpp"
#include "rydsuper/model.hpp"

namespace rydsuper {

namespace {

// Roots and weights of the n-point Gauss-Hermite rule for int e^{-x^2} f(x) dx
// by the Golub-Welsch method: implicit-shift QL on the symmetric tridiagonal
// Jacobi matrix (zero diagonal, off-diagonal sqrt(j/2)), accumulating only the
// first eigenvector component, which carries the weights w = sqrt(pi) z1^2.
QuadratureNodes gauss_hermite_nodes(int n)
{
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    for (int j = 1; j < n; ++j) {
        e[static_cast<std::size_t>(j - 1)] = std::sqrt(j / 2.0);
    }
    z[0] = 1.0;

    for (int l = 0; l < n; ++l) {
        int iterations = 0;
        int m = 0;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                                  std::abs(d[static_cast<std::size_t>(m + 1)]);
                if (std::abs(e[static_cast<std::size_t>(m)]) <= 1e-16 * dd) {
                    break;
                }
            }
            if (m != l) {
                if (iterations++ == 60) {
                    throw NumericalError("Gauss-Hermite eigenvalue iteration stalled");
                }
                double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                           (2.0 * e[static_cast<std::size_t>(l)]);
                double r = std::hypot(g, 1.0);
                g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
                    e[static_cast<std::size_t>(l)] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[static_cast<std::size_t>(i)];
                    const double b = c * e[static_cast<std::size_t>(i)];
                    r = std::hypot(f, g);
                    e[static_cast<std::size_t>(i + 1)] = r;
                    if (r == 0.0) {
                        d[static_cast<std::size_t>(i + 1)] -= p;
                        e[static_cast<std::size_t>(m)] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[static_cast<std::size_t>(i + 1)] - p;
                    r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[static_cast<std::size_t>(i + 1)] = g + p;
                    g = c * r - b;

                    f = z[static_cast<std::size_t>(i + 1)];
                    z[static_cast<std::size_t>(i + 1)] = s * z[static_cast<std::size_t>(i)] + c * f;
                    z[static_cast<std::size_t>(i)] = c * z[static_cast<std::size_t>(i)] - s * f;
                }
                if (r == 0.0 && m - 1 >= l) {
                    continue;
                }
                d[static_cast<std::size_t>(l)] -= p;
                e[static_cast<std::size_t>(l)] = g;
                e[static_cast<std::size_t>(m)] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)]; });

    QuadratureNodes q;
    q.x.assign(static_cast<std::size_t>(n), 0.0);
    q.w.assign(static_cast<std::size_t>(n), 0.0);
    const double mu0 = std::sqrt(constants::pi);
    for (int i = 0; i < n; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        q.x[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(src)];
        q.w[static_cast<std::size_t>(i)] =
            mu0 * z[static_cast<std::size_t>(src)] * z[static_cast<std::size_t>(src)];
    }
    return q;
}

// Midpoint rule in u over [-umax, umax] with the Gaussian folded into the
// weights, renormalized so the weights sum to sqrt(pi) exactly.
QuadratureNodes uniform_nodes(int n)
{
    constexpr double umax = 6.0;
    QuadratureNodes q;
    q.x.assign(static_cast<std::size_t>(n), 0.0);
    q.w.assign(static_cast<std::size_t>(n), 0.0);
    const double h = 2.0 * umax / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = -umax + (i + 0.5) * h;
        q.x[static_cast<std::size_t>(i)] = u;
        q.w[static_cast<std::size_t>(i)] = h * std::exp(-u * u);
        sum += q.w[static_cast<std::size_t>(i)];
    }
    const double scale = std::sqrt(constants::pi) / sum;
    for (double& w : q.w) {
        w *= scale;
    }
    return q;
}

} // namespace

Wavenumbers wavenumbers(const AtomSystem& atom)
{
    if (!(atom.lambda_probe > 0.0) || !(atom.lambda_coupling > 0.0)) {
        throw ValidationError("wavelengths must be positive");
    }
    return {constants::two_pi / atom.lambda_probe, constants::two_pi / atom.lambda_coupling};
}

double most_probable_speed(const AtomSystem& atom)
{
    return std::sqrt(2.0 * constants::boltzmann * atom.temperature / atom.mass);
}

DopplerSpec DopplerSpec::for_atom(const AtomSystem& atom, int nodes, VelocityRule rule)
{
    const Wavenumbers k = wavenumbers(atom);
    DopplerSpec spec;
    spec.vp = most_probable_speed(atom);
    spec.kp = k.kp;
    spec.kc = k.kc;
    spec.nodes = nodes;
    spec.rule = rule;
    return spec;
}

DopplerSpec DopplerSpec::resonant_class(const AtomSystem& atom)
{
    DopplerSpec spec = for_atom(atom, 8);
    spec.vp = 0.0;
    return spec;
}

void DopplerSpec::validate() const
{
    if (vp < 0.0 || !std::isfinite(vp)) {
        throw ValidationError("most probable speed must be >= 0");
    }
    if (nodes < 8 || nodes % 2 != 0) {
        throw ValidationError("node count must be even and >= 8");
    }
}

const QuadratureNodes& quadrature_nodes(VelocityRule rule, int n)
{
    if (n < 1) {
        throw ValidationError("node count must be positive");
    }
    static std::mutex mutex;
    static std::map<std::pair<int, int>, QuadratureNodes> cache;
    const std::pair<int, int> key{static_cast<int>(rule), n};

    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, rule == VelocityRule::gauss_hermite ? gauss_hermite_nodes(n)
                                                                    : uniform_nodes(n))
                 .first;
    }
    return it->second;
}

DriveConfig doppler_shifted(const DriveConfig& drive, const DopplerSpec& spec, double v)
{
    DriveConfig shifted = drive;
    shifted.delta_p = drive.delta_p - spec.kp * v;
    shifted.delta_c = drive.delta_c + spec.kc * v;
    return shifted;
}

Complex doppler_average(const AtomSystem& atom, const DriveConfig& drive, const DopplerSpec& spec,
                        Coherence quantity)
{
    spec.validate();
    return velocity_average(spec, [&](double v) {
        const Harmonics1 h = harmonics_first_order(atom, doppler_shifted(drive, spec, v));
        switch (quantity) {
        case Coherence::rho0:
            return h.rho0;
        case Coherence::rho_plus:
            return h.rho_plus;
        default:
            return h.rho_minus;
        }
    });
}

Complex doppler_average_checked(const AtomSystem& atom, const DriveConfig& drive,
                                const DopplerSpec& spec, Coherence quantity)
{
    const Complex coarse = doppler_average(atom, drive, spec, quantity);
    DopplerSpec fine = spec;
    fine.nodes = 2 * spec.nodes;
    const Complex refined = doppler_average(atom, drive, fine, quantity);
    const double scale = std::max(std::abs(coarse), std::abs(refined));
    if (scale > 0.0 && std::abs(refined - coarse) > 1e-6 * scale) {
        throw NonConvergent("velocity average not converged at this node count");
    }
    return refined;
}

Harmonics1 doppler_average_harmonics(const AtomSystem& atom, const DriveConfig& drive,
                                     const DopplerSpec& spec)
{
    spec.validate();
    if (!spec.thermal()) {
        return harmonics_first_order(atom, drive);
    }
    const QuadratureNodes& q = quadrature_nodes(spec.rule, spec.nodes);
    Harmonics1 acc{};
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        const Harmonics1 h =
            harmonics_first_order(atom, doppler_shifted(drive, spec, spec.vp * q.x[i]));
        acc.rho0 += q.w[i] * h.rho0;
        acc.rho_plus += q.w[i] * h.rho_plus;
        acc.rho_minus += q.w[i] * h.rho_minus;
    }
    const double norm = std::sqrt(constants::pi);
    acc.rho0 /= norm;
    acc.rho_plus /= norm;
    acc.rho_minus /= norm;
    return acc;
}

double two_level_absorption_integral(const AtomSystem& atom, const DopplerSpec& spec)
{
    DriveConfig bare;
    bare.omega_p = 1.0; // rho_12^0 is exactly linear in Omega_p; value cancels
    const Complex avg = doppler_average(atom, bare, spec, Coherence::rho0);
    return std::imag(avg / bare.omega_p);
}

} // namespace rydsuper
