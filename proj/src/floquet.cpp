#include "rydsuper/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rydsuper/errors.hpp"
#include "rydsuper/model.hpp"

namespace rydsuper {

namespace {

constexpr Complex kI{0.0, 1.0};

// Row-major 3x3 complex matrix with just the operations the block solver needs.
struct Mat3 {
    std::array<Complex, 9> m{};

    Complex& operator()(int r, int c) { return m[3 * r + c]; }
    const Complex& operator()(int r, int c) const { return m[3 * r + c]; }
};

Vec3 mul(const Mat3& a, const Vec3& v)
{
    Vec3 out{};
    for (int r = 0; r < 3; ++r) {
        out[r] = a(r, 0) * v[0] + a(r, 1) * v[1] + a(r, 2) * v[2];
    }
    return out;
}

Mat3 mul(const Mat3& a, const Mat3& b)
{
    Mat3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
        }
    }
    return out;
}

// Inverse by Gauss-Jordan with partial pivoting. Throws SingularSystem when a
// pivot collapses relative to the matrix scale.
Mat3 inverse(Mat3 a)
{
    double scale = 0.0;
    for (const Complex& v : a.m) {
        scale = std::max(scale, std::abs(v));
    }
    const double floor = scale * 1e-250;

    Mat3 inv;
    inv(0, 0) = inv(1, 1) = inv(2, 2) = 1.0;

    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (!(std::abs(a(pivot, col)) > floor) || scale == 0.0) {
            throw SingularSystem{};
        }
        if (pivot != col) {
            for (int c = 0; c < 3; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        }
        const Complex d = a(col, col);
        for (int c = 0; c < 3; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (int r = 0; r < 3; ++r) {
            if (r == col) {
                continue;
            }
            const Complex f = a(r, col);
            if (f == Complex{}) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

Mat3 drift(const AtomSystem& atom, const DriveConfig& drive)
{
    const ComplexRates r = complex_rates(atom, drive);
    Mat3 a;
    a(0, 0) = -r.g12;
    a(0, 1) = 0.5 * kI * std::conj(drive.omega_c);
    a(1, 0) = 0.5 * kI * drive.omega_c;
    a(1, 1) = -r.g13;
    a(1, 2) = 0.5 * kI * drive.omega_l;
    a(2, 1) = 0.5 * kI * std::conj(drive.omega_l);
    a(2, 2) = -r.g14;
    return a;
}

double inf_norm(const Mat3& a)
{
    double best = 0.0;
    for (int r = 0; r < 3; ++r) {
        best = std::max(best, std::abs(a(r, 0)) + std::abs(a(r, 1)) + std::abs(a(r, 2)));
    }
    return best;
}

} // namespace

const Vec3& HarmonicSolution::harmonic(int n) const
{
    if (n < -order || n > order) {
        throw std::out_of_range("harmonic index outside truncation order");
    }
    return amplitudes[static_cast<std::size_t>(n + order)];
}

std::array<Complex, 9> drift_matrix(const AtomSystem& atom, const DriveConfig& drive)
{
    return drift(atom, drive).m;
}

Vec3 drive_vector(const DriveConfig& drive)
{
    return {0.5 * kI * drive.omega_p, Complex{}, Complex{}};
}

HarmonicSolution solve_truncated(const AtomSystem& atom, const DriveConfig& drive, int order)
{
    if (order < 1) {
        throw ValidationError("truncation order must be >= 1");
    }

    const Mat3 a = drift(atom, drive);
    const Vec3 c = drive_vector(drive);
    const int blocks = 2 * order + 1;

    // Sub-diagonal block L = Omega_S^* B_1 couples X_{n-1}; super-diagonal
    // block U = Omega_S B_{-1} couples X_{n+1}. Both carry a single entry i/2.
    Mat3 lower;
    lower(2, 1) = 0.5 * kI * std::conj(drive.omega_s);
    Mat3 upper;
    upper(1, 2) = 0.5 * kI * drive.omega_s;

    std::vector<Mat3> reduced(blocks);
    std::vector<Vec3> rhs(blocks, Vec3{});
    rhs[static_cast<std::size_t>(order)] = {-c[0], -c[1], -c[2]};

    auto diagonal = [&](int index) {
        const int n = index - order;
        Mat3 d = a;
        const Complex shift = kI * (static_cast<double>(n) * drive.delta_s);
        d(0, 0) -= shift;
        d(1, 1) -= shift;
        d(2, 2) -= shift;
        return d;
    };

    // Block Thomas forward sweep.
    reduced[0] = diagonal(0);
    for (int i = 1; i < blocks; ++i) {
        const Mat3 w = mul(lower, inverse(reduced[i - 1]));
        Mat3 d = diagonal(i);
        const Mat3 wu = mul(w, upper);
        for (int k = 0; k < 9; ++k) {
            d.m[k] -= wu.m[k];
        }
        reduced[i] = d;
        const Vec3 wr = mul(w, rhs[i - 1]);
        for (int k = 0; k < 3; ++k) {
            rhs[i][k] -= wr[k];
        }
    }

    HarmonicSolution sol;
    sol.order = order;
    sol.amplitudes.assign(static_cast<std::size_t>(blocks), Vec3{});
    sol.amplitudes[static_cast<std::size_t>(blocks - 1)] =
        mul(inverse(reduced[blocks - 1]), rhs[blocks - 1]);
    for (int i = blocks - 2; i >= 0; --i) {
        Vec3 r = rhs[i];
        const Vec3 ux = mul(upper, sol.amplitudes[static_cast<std::size_t>(i + 1)]);
        for (int k = 0; k < 3; ++k) {
            r[k] -= ux[k];
        }
        sol.amplitudes[static_cast<std::size_t>(i)] = mul(inverse(reduced[i]), r);
    }
    return sol;
}

HarmonicSolution solve_time_domain(const AtomSystem& atom, const DriveConfig& drive, int cycles,
                                   int steps_per_cycle, int extract_order)
{
    if (!(drive.delta_s > 0.0)) {
        throw ValidationError("time-domain solver requires delta_s > 0");
    }
    if (cycles < 3) {
        throw ValidationError("need at least 3 cycles (transient + two extraction periods)");
    }
    if (extract_order < 1) {
        throw ValidationError("extraction order must be >= 1");
    }
    if (steps_per_cycle < 8 * (2 * extract_order + 1)) {
        throw ValidationError("steps per cycle too small for the requested extraction order");
    }

    const Mat3 a = drift(atom, drive);
    const Vec3 c = drive_vector(drive);
    const double period = constants::two_pi / drive.delta_s;
    const double h = period / steps_per_cycle;
    const Complex ws_conj = std::conj(drive.omega_s);
    const Complex ws = drive.omega_s;

    // dX/dt at cycle-local time t (the drive phases are exactly periodic, so
    // using local time keeps the discrete map cycle-periodic).
    auto deriv = [&](double t, const Vec3& x) {
        const Complex e = std::polar(1.0, drive.delta_s * t);
        Vec3 dx = mul(a, x);
        dx[0] += c[0];
        // B_1 contributes (i/2) x2 to row 3, B_{-1} contributes (i/2) x3 to row 2
        dx[2] += ws_conj * e * (0.5 * kI * x[1]);
        dx[1] += ws * std::conj(e) * (0.5 * kI * x[2]);
        return dx;
    };

    auto rk4_step = [&](double t, Vec3& x) {
        const Vec3 k1 = deriv(t, x);
        Vec3 tmp;
        for (int i = 0; i < 3; ++i) {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        const Vec3 k2 = deriv(t + 0.5 * h, tmp);
        for (int i = 0; i < 3; ++i) {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        const Vec3 k3 = deriv(t + 0.5 * h, tmp);
        for (int i = 0; i < 3; ++i) {
            tmp[i] = x[i] + h * k3[i];
        }
        const Vec3 k4 = deriv(t + h, tmp);
        for (int i = 0; i < 3; ++i) {
            x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    };

    Vec3 x{};
    for (int cycle = 0; cycle < cycles - 2; ++cycle) {
        for (int j = 0; j < steps_per_cycle; ++j) {
            rk4_step(j * h, x);
        }
    }

    // Record the last two periods and project each onto e^{-i n ds t}. The
    // phase factors repeat exactly each cycle, so one table serves both.
    const int m = steps_per_cycle;
    std::vector<Complex> phase(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        phase[static_cast<std::size_t>(j)] =
            std::polar(1.0, -constants::two_pi * static_cast<double>(j) / m);
    }

    auto extract = [&](const std::vector<Vec3>& samples) {
        HarmonicSolution sol;
        sol.order = extract_order;
        sol.amplitudes.assign(static_cast<std::size_t>(2 * extract_order + 1), Vec3{});

        Vec3 mean{};
        for (const Vec3& s : samples) {
            for (int i = 0; i < 3; ++i) {
                mean[i] += s[i];
            }
        }
        for (int i = 0; i < 3; ++i) {
            mean[i] /= static_cast<double>(m);
        }
        sol.amplitudes[static_cast<std::size_t>(extract_order)] = mean;

        // Subtracting the mean before projecting keeps the small sideband
        // harmonics free of cancellation noise from the large n = 0 component.
        for (int n = -extract_order; n <= extract_order; ++n) {
            if (n == 0) {
                continue;
            }
            Vec3 acc{};
            for (int j = 0; j < m; ++j) {
                const long idx = static_cast<long>(n) * j % m;
                const Complex w = phase[static_cast<std::size_t>((idx % m + m) % m)];
                const Vec3& s = samples[static_cast<std::size_t>(j)];
                for (int i = 0; i < 3; ++i) {
                    acc[i] += (s[i] - mean[i]) * w;
                }
            }
            for (int i = 0; i < 3; ++i) {
                acc[i] /= static_cast<double>(m);
            }
            sol.amplitudes[static_cast<std::size_t>(n + extract_order)] = acc;
        }
        return sol;
    };

    std::vector<Vec3> samples(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        samples[static_cast<std::size_t>(j)] = x;
        rk4_step(j * h, x);
    }
    const HarmonicSolution previous = extract(samples);

    for (int j = 0; j < m; ++j) {
        samples[static_cast<std::size_t>(j)] = x;
        rk4_step(j * h, x);
    }
    HarmonicSolution last = extract(samples);

    double x0_scale = 0.0;
    for (const Complex& v : last.harmonic(0)) {
        x0_scale = std::max(x0_scale, std::abs(v));
    }
    const double absolute_floor = 1e-12 * std::max(x0_scale, 1e-30);
    for (int n = -extract_order; n <= extract_order; ++n) {
        double diff = 0.0;
        double norm = 0.0;
        for (int i = 0; i < 3; ++i) {
            diff = std::max(diff, std::abs(last.harmonic(n)[i] - previous.harmonic(n)[i]));
            norm = std::max(norm,
                            std::max(std::abs(last.harmonic(n)[i]), std::abs(previous.harmonic(n)[i])));
        }
        if (norm <= absolute_floor) {
            continue; // harmonic is absent; nothing to compare
        }
        if (diff > 1e-6 * norm + absolute_floor) {
            throw NotConverged("transient has not decayed; increase cycles");
        }
    }
    return last;
}

int suggested_cycles(const AtomSystem& atom, const DriveConfig& drive, double decades)
{
    const double slowest =
        std::min(atom.dephasing + 0.5 * atom.gamma2, atom.dephasing + 0.5 * atom.gamma_r);
    if (!(slowest > 0.0) || !(drive.delta_s > 0.0)) {
        return 50;
    }
    const double cycles = decades * drive.delta_s / (constants::two_pi * slowest);
    return std::max(50, static_cast<int>(std::ceil(cycles)));
}

int suggested_steps_per_cycle(const AtomSystem& atom, const DriveConfig& drive, double resolution)
{
    const double norm = inf_norm(drift(atom, drive)) + std::abs(drive.omega_s);
    const double period = constants::two_pi / drive.delta_s;
    const int steps = static_cast<int>(std::ceil(period * norm / resolution));
    return std::max(400, steps);
}

} // namespace rydsuper
