#pragma once

#include <array>
#include <vector>

#include "rydsuper/types.hpp"

namespace rydsuper {

using Vec3 = std::array<Complex, 3>;

// Harmonic amplitudes X_n = (rho_12^n, rho_13^n, rho_14^n) for n in [-order, order].
struct HarmonicSolution {
    int order = 0;
    std::vector<Vec3> amplitudes; // index n + order

    const Vec3& harmonic(int n) const;
    Complex rho12(int n) const { return harmonic(n)[0]; }
};

// Drift matrix of the coherence vector X = (rho_12, rho_13, rho_14)^T:
//   A = [ -g12        i Omega_c^*/2   0          ]
//       [ i Omega_c/2  -g13           i Omega_L/2 ]
//       [ 0            i Omega_L^*/2  -g14        ]
// and the constant drive C = (i Omega_p/2, 0, 0)^T.
std::array<Complex, 9> drift_matrix(const AtomSystem& atom, const DriveConfig& drive);
Vec3 drive_vector(const DriveConfig& drive);

// Stationary solution of the truncated harmonic hierarchy
//   (A - i n ds I) X_n + Omega_S^* B_1 X_{n-1} + Omega_S B_{-1} X_{n+1} + C d_{n,0} = 0,
// with X_n = 0 imposed for |n| > order, solved as one block-tridiagonal system
// of 2*order+1 blocks of size 3. Throws SingularSystem on degenerate input.
HarmonicSolution solve_truncated(const AtomSystem& atom, const DriveConfig& drive, int order);

// Independent oracle: integrates dX/dt = (A + Omega_S^* B_1 e^{i ds t}
// + Omega_S B_{-1} e^{-i ds t}) X + C from X(0) = 0 with fixed-step classical
// RK4, then projects X_n = (1/T) int X(t) e^{-i n ds t} dt over the final
// period. Throws NotConverged when the last two extracted periods differ by
// more than 1e-6 relative.
HarmonicSolution solve_time_domain(const AtomSystem& atom, const DriveConfig& drive, int cycles,
                                   int steps_per_cycle = 400, int extract_order = 2);

// Documented guidance for transient decay: 10 relaxation times of the slowest
// coherence, expressed in beat cycles, never fewer than 50.
int suggested_cycles(const AtomSystem& atom, const DriveConfig& drive, double decades = 10.0);

// Step count keeping |A|_inf * h below `resolution` so the fixed-step scheme
// resolves the fastest coherence oscillation; never fewer than 400.
int suggested_steps_per_cycle(const AtomSystem& atom, const DriveConfig& drive,
                              double resolution = 0.05);

} // namespace rydsuper
