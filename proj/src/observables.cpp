#include "rydsuper/observables.hpp"

#include <algorithm>
#include <cmath>

#include "rydsuper/errors.hpp"
#include "rydsuper/model.hpp"

namespace rydsuper {

namespace {

double to_db(double amplitude)
{
    return 20.0 * std::log10(amplitude);
}

void require_grid(std::span<const double> grid)
{
    if (grid.empty()) {
        throw EmptyGrid{};
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw EmptyGrid("grid must be strictly increasing");
        }
    }
}

} // namespace

double ResponseCurve::amplitude_at(double delta_s) const
{
    if (points.empty()) {
        throw EmptyGrid{};
    }
    if (delta_s < min_delta_s() || delta_s > max_delta_s()) {
        throw ValidationError("frequency outside the curve grid");
    }
    auto hi = std::lower_bound(points.begin(), points.end(), delta_s,
                               [](const ResponsePoint& p, double v) { return p.delta_s < v; });
    if (hi == points.begin()) {
        return hi->amplitude;
    }
    if (hi == points.end()) {
        return points.back().amplitude;
    }
    const auto lo = hi - 1;
    if (hi->delta_s == delta_s) {
        return hi->amplitude;
    }
    const double t = (std::log(delta_s) - std::log(lo->delta_s)) /
                     (std::log(hi->delta_s) - std::log(lo->delta_s));
    if (lo->amplitude > 0.0 && hi->amplitude > 0.0) {
        return std::exp((1.0 - t) * std::log(lo->amplitude) + t * std::log(hi->amplitude));
    }
    return (1.0 - t) * lo->amplitude + t * hi->amplitude;
}

double beat_amplitude(const AtomSystem& atom, const DriveConfig& drive, const DopplerSpec& spec)
{
    const Harmonics1 avg = doppler_average_harmonics(atom, drive, spec);
    return std::abs(avg.rho_plus - std::conj(avg.rho_minus));
}

SidebandAmplitudes sideband_contributions(const AtomSystem& atom, const DriveConfig& drive,
                                          const DopplerSpec& spec)
{
    const Harmonics1 avg = doppler_average_harmonics(atom, drive, spec);
    return {std::abs(avg.rho_plus), std::abs(avg.rho_minus)};
}

ResponseCurve make_curve(std::vector<ResponsePoint> points)
{
    if (points.empty()) {
        throw EmptyGrid{};
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].amplitude < 0.0) {
            throw ValidationError("amplitudes must be non-negative");
        }
        if (i > 0 && !(points[i].delta_s > points[i - 1].delta_s)) {
            throw EmptyGrid("grid must be strictly increasing");
        }
    }
    ResponseCurve curve;
    curve.points = std::move(points);
    return curve;
}

ResponseCurve with_detector(ResponseCurve curve, const DetectorModel& detector)
{
    for (ResponsePoint& p : curve.points) {
        p.amplitude *= detector.magnitude(hz_from_omega(p.delta_s));
    }
    curve.detector = detector;
    return curve;
}

ResponseCurve normalized(ResponseCurve curve, double normalize_at)
{
    const double ref = curve.amplitude_at(normalize_at);
    if (!(ref > 0.0)) {
        throw NumericalError("cannot normalize: zero amplitude at the reference frequency");
    }
    for (ResponsePoint& p : curve.points) {
        p.amplitude /= ref;
    }
    curve.normalized_at = normalize_at;
    return curve;
}

ResponseCurve response_curve(const AtomSystem& atom, const DriveConfig& drive_template,
                             const DopplerSpec& spec, std::span<const double> delta_s_grid,
                             std::optional<DetectorModel> detector,
                             std::optional<double> normalize_at)
{
    require_grid(delta_s_grid);
    const double ref = normalize_at.value_or(kDefaultNormalizeAt);
    if (ref < delta_s_grid.front() || ref > delta_s_grid.back()) {
        throw ValidationError("normalization frequency outside the grid range");
    }

    std::vector<ResponsePoint> points;
    points.reserve(delta_s_grid.size());
    DriveConfig drive = drive_template;
    for (double ds : delta_s_grid) {
        drive.delta_s = ds;
        points.push_back({ds, beat_amplitude(atom, drive, spec)});
    }
    ResponseCurve curve = make_curve(std::move(points));
    if (detector) {
        curve = with_detector(std::move(curve), *detector);
    }
    return normalized(std::move(curve), ref);
}

std::optional<double> bandwidth_minus3db(const ResponseCurve& curve,
                                         std::optional<DetectorModel> detector)
{
    if (!curve.normalized_at) {
        throw NotNormalized{};
    }
    const std::optional<DetectorModel> compensation = detector ? detector : curve.detector;

    auto threshold_db = [&](double delta_s) {
        double t = -3.0;
        if (compensation) {
            t += compensation->attenuation_db(hz_from_omega(delta_s));
        }
        return t;
    };

    double prev_margin = 0.0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const ResponsePoint& p = curve.points[i];
        const double margin = to_db(p.amplitude) - threshold_db(p.delta_s);
        if (i > 0 && prev_margin >= 0.0 && margin < 0.0) {
            const ResponsePoint& q = curve.points[i - 1];
            const double t = prev_margin / (prev_margin - margin);
            const double log_f =
                std::log(q.delta_s) + t * (std::log(p.delta_s) - std::log(q.delta_s));
            return hz_from_omega(std::exp(log_f));
        }
        prev_margin = margin;
    }
    return std::nullopt;
}

std::optional<GainPeak> gain_peak(const ResponseCurve& curve)
{
    if (!curve.normalized_at) {
        throw NotNormalized{};
    }
    if (curve.points.size() < 3) {
        return std::nullopt;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].amplitude > curve.points[best].amplitude) {
            best = i;
        }
    }
    if (best == 0 || best == curve.points.size() - 1) {
        return std::nullopt; // maximum at a grid edge is not a peak
    }
    const double gain = to_db(curve.points[best].amplitude);
    if (!(gain > 0.0)) {
        return std::nullopt;
    }
    return GainPeak{hz_from_omega(curve.points[best].delta_s), gain};
}

EITSpectrum eit_spectrum(const AtomSystem& atom, const DriveConfig& drive_template,
                         const DopplerSpec& spec, std::span<const double> delta_c_grid, double beta)
{
    require_grid(delta_c_grid);
    if (std::abs(drive_template.omega_l) != 0.0 || std::abs(drive_template.omega_s) != 0.0) {
        throw ValidationError("EIT spectrum requires both MW fields off");
    }
    if (std::abs(drive_template.omega_p) == 0.0) {
        throw ValidationError("EIT spectrum requires a probe field");
    }

    EITSpectrum spectrum;
    spectrum.beta = beta;
    spectrum.od = beta * two_level_absorption_integral(atom, spec);
    spectrum.points.reserve(delta_c_grid.size());

    DriveConfig drive = drive_template;
    for (double dc : delta_c_grid) {
        drive.delta_c = dc;
        const Complex avg = doppler_average(atom, drive, spec, Coherence::rho0);
        const double ln_t = -beta * std::imag(avg / drive.omega_p);
        spectrum.points.push_back({dc, ln_t});
    }
    return spectrum;
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2) {
        throw EmptyGrid("log grid requires 0 < lo < hi and n >= 2");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    const double step = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + step * i);
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

} // namespace rydsuper
