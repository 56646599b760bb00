#pragma once

#include <cmath>
#include <vector>

#include "rydsuper/types.hpp"

namespace rydsuper {

struct Wavenumbers {
    double kp; // probe, rad/m
    double kc; // coupling, rad/m
};

// kp = 2 pi / lambda_probe, kc = 2 pi / lambda_coupling
Wavenumbers wavenumbers(const AtomSystem& atom);

// Most probable thermal speed sqrt(2 kB T / m).
double most_probable_speed(const AtomSystem& atom);

// Node placement for the velocity integral (1/(sqrt(pi) vp)) int e^{-v^2/vp^2} f(v) dv.
//
// gauss_hermite: classic rule with the Gaussian weight built in. uniform:
// midpoint rule in u = v/vp with weights h e^{-u^2}, renormalized to sum to
// sqrt(pi). The atomic lines are orders of magnitude narrower than the
// Doppler width (MHz against hundreds of MHz), which places the integrand
// poles ~0.01 Gaussian widths off the real axis: Gauss-Hermite stalls there
// while the uniform rule converges geometrically in the node count.
enum class VelocityRule {
    gauss_hermite,
    uniform,
};

struct DopplerSpec {
    double vp = 0.0; // most probable speed, m/s; 0 selects the T -> 0 limit (resonant class)
    double kp = 0.0; // rad/m
    double kc = 0.0; // rad/m; counter-propagation: Delta_c' = Delta_c + kc v
    int nodes = 4096;
    VelocityRule rule = VelocityRule::uniform;

    static DopplerSpec for_atom(const AtomSystem& atom, int nodes = 4096,
                                VelocityRule rule = VelocityRule::uniform);

    // T -> 0 limit: the thermal weight collapses onto v = 0 and the average
    // equals the integrand at rest. Used for resonant-class theory curves.
    static DopplerSpec resonant_class(const AtomSystem& atom);

    bool thermal() const { return vp > 0.0; }

    void validate() const; // nodes >= 8 and even, vp >= 0
};

// Quadrature abscissae/weights in the scaled variable u for int e^{-u^2} f(u) du.
struct QuadratureNodes {
    std::vector<double> x;
    std::vector<double> w;
};

const QuadratureNodes& quadrature_nodes(VelocityRule rule, int n);

// Velocity-shifted detunings: Delta_p' = Delta_p - kp v, Delta_c' = Delta_c + kc v.
// MW Doppler shifts are neglected (k_MW is ~300x below optical).
DriveConfig doppler_shifted(const DriveConfig& drive, const DopplerSpec& spec, double v);

// (1/(sqrt(pi) vp)) int e^{-v^2/vp^2} f(v) dv with f complex-valued.
template <typename F>
Complex velocity_average(const DopplerSpec& spec, F&& f)
{
    if (!spec.thermal()) {
        return f(0.0);
    }
    const QuadratureNodes& q = quadrature_nodes(spec.rule, spec.nodes);
    Complex acc{};
    for (std::size_t i = 0; i < q.x.size(); ++i) {
        acc += q.w[i] * f(spec.vp * q.x[i]);
    }
    return acc / std::sqrt(constants::pi);
}

enum class Coherence {
    rho0,
    rho_plus,
    rho_minus,
};

// Doppler average of one first-order coherence.
Complex doppler_average(const AtomSystem& atom, const DriveConfig& drive, const DopplerSpec& spec,
                        Coherence quantity);

// Same, re-evaluated at doubled node count; throws NonConvergent when the two
// results differ by more than 1e-6 relative.
Complex doppler_average_checked(const AtomSystem& atom, const DriveConfig& drive,
                                const DopplerSpec& spec, Coherence quantity);

// All three averaged coherences in a single pass over the velocity nodes.
Harmonics1 doppler_average_harmonics(const AtomSystem& atom, const DriveConfig& drive,
                                     const DopplerSpec& spec);

// Two-level resonant absorption integral <Im(rho_12^0 / Omega_p)> at
// Delta_p = 0 with coupling and MWs off; the optical-depth normalization.
double two_level_absorption_integral(const AtomSystem& atom, const DopplerSpec& spec);

} // namespace rydsuper
