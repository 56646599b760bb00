#pragma once

#include <cstdint>

#include "rydsuper/types.hpp"

namespace rydsuper {

struct OracleOptions {
    int points = 100;
    std::uint64_t seed = 20240001;
    double tol_triangle = 1e-4; // closed form / truncated(order) / time domain, pairwise
    double tol_order1 = 1e-9;   // closed form vs order-1 truncated
    int truncation_order = 3;
};

struct OracleReport {
    int points = 0;
    double max_closed_vs_truncated = 0.0;
    double max_closed_vs_time_domain = 0.0;
    double max_truncated_vs_time_domain = 0.0;
    double max_closed_vs_order1 = 0.0;
    double elapsed_seconds = 0.0;
    bool triangle_pass = false;
    bool order1_pass = false;

    bool pass() const { return triangle_pass && order1_pass; }
};

// Draws seeded random drive/atom points in the small-signal regime
// (Omega_p/2pi <= 6 MHz, |Omega_S| <= 0.1 |Omega_L|, randomized MW phases)
// and compares the rho_12 harmonics n in {0, +1, -1} from the closed form,
// the truncated Floquet solver, and the RK4 periodic steady state.
OracleReport run_oracle_check(const OracleOptions& options);

} // namespace rydsuper
