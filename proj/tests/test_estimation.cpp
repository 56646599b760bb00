#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rydsuper/calibration.hpp"
#include "rydsuper/errors.hpp"
#include "rydsuper/estimation.hpp"

using namespace rydsuper;

namespace {

std::vector<EITPoint> synthetic_spectrum(const AtomSystem& atom, const DopplerSpec& spec,
                                         double gamma, double omega_c, double beta,
                                         double noise_sigma, std::uint64_t seed)
{
    AtomSystem truth = atom;
    truth.dephasing = gamma;
    DriveConfig probe_only;
    probe_only.omega_p = omega_from_mhz(1.0);
    std::vector<double> grid;
    for (int i = 0; i <= 80; ++i) {
        grid.push_back(omega_from_mhz(-30.0 + 60.0 * i / 80.0));
    }
    DriveConfig d = probe_only;
    d.omega_c = omega_c;
    const EITSpectrum s = eit_spectrum(truth, d, spec, grid, beta);

    std::mt19937_64 rng(seed);
    double depth = 0.0;
    for (const EITPoint& p : s.points) {
        depth = std::max(depth, std::abs(p.ln_transmission));
    }
    std::normal_distribution<double> noise(0.0, noise_sigma * depth);
    std::vector<EITPoint> data = s.points;
    if (noise_sigma > 0.0) {
        for (EITPoint& p : data) {
            p.ln_transmission += noise(rng);
        }
    }
    return data;
}

AtomSystem base_atom()
{
    return AtomSystem::rb87();
}

} // namespace

TEST_CASE("EIT fit")
{
    const AtomSystem atom = base_atom();
    const DopplerSpec spec = DopplerSpec::for_atom(atom, 512);
    const double gamma_true = omega_from_mhz(2.76);
    const double wc_true = omega_from_mhz(17.12);
    const double beta_true = beta_from_od(atom, spec, 1.16);

    FitGuess guess;
    guess.gamma = omega_from_mhz(2.0);
    guess.omega_c = omega_from_mhz(12.0);
    guess.scale = beta_from_od(atom, spec, 1.0);

    SUBCASE("noiseless round trip recovers the generator to 0.1%")
    {
        const auto data = synthetic_spectrum(atom, spec, gamma_true, wc_true, beta_true, 0.0, 1);
        const FitResult fit = fit_eit(data, atom, spec, guess);
        CHECK(fit.converged);
        CHECK(fit.gamma == doctest::Approx(gamma_true).epsilon(1e-3));
        CHECK(fit.omega_c == doctest::Approx(wc_true).epsilon(1e-3));
        CHECK(fit.scale == doctest::Approx(beta_true).epsilon(1e-3));
        CHECK(fit.residual_norm < 1e-6);
    }

    SUBCASE("1% noise keeps the recovery within 5%")
    {
        std::vector<double> gamma_err;
        std::vector<double> wc_err;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto data =
                synthetic_spectrum(atom, spec, gamma_true, wc_true, beta_true, 0.01, seed);
            const FitResult fit = fit_eit(data, atom, spec, guess);
            gamma_err.push_back(std::abs(fit.gamma / gamma_true - 1.0));
            wc_err.push_back(std::abs(fit.omega_c / wc_true - 1.0));
        }
        std::sort(gamma_err.begin(), gamma_err.end());
        std::sort(wc_err.begin(), wc_err.end());
        CHECK(gamma_err[2] < 0.05);
        CHECK(wc_err[2] < 0.05);
    }

    SUBCASE("fitted coupling stays below the peak value computed from power")
    {
        // effective Rabi frequencies run ~70% of the beam-peak values
        const double row_fit[5] = {17.12, 11.53, 8.09, 5.73, 4.15};
        const double row_power_mw[5] = {536.0, 250.0, 124.7, 62.4, 31.2};
        for (int i = 0; i < 5; ++i) {
            const double peak =
                rabi_from_power({row_power_mw[i] * 1e-3, 100.24e-6}, atom.dipole_coupling);
            CHECK(omega_from_mhz(row_fit[i]) < peak);
        }
    }

    SUBCASE("rejects tiny datasets and non-finite guesses")
    {
        const auto data = synthetic_spectrum(atom, spec, gamma_true, wc_true, beta_true, 0.0, 1);
        const std::vector<EITPoint> few(data.begin(), data.begin() + 5);
        CHECK_THROWS_AS(fit_eit(few, atom, spec, guess), InsufficientData);

        std::vector<EITPoint> poisoned = data;
        poisoned[3].ln_transmission = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(fit_eit(poisoned, atom, spec, guess), BadGuess);
    }
}

TEST_CASE("local MW optimization")
{
    const AtomSystem atom = AtomSystem::rb87(omega_from_mhz(2.76));
    const DopplerSpec spec = DopplerSpec::for_atom(atom, 1024);
    DriveConfig d;
    d.omega_p = omega_from_mhz(5.53);
    d.omega_c = omega_from_mhz(17.12);
    d.omega_s = omega_from_mhz(0.01);
    const double delta_s = omega_from_mhz(0.1);

    SUBCASE("matches a dense log-grid argmax within 1%")
    {
        const LocalOptimum opt = optimize_local_mw(atom, d, spec, delta_s, Bracket{});
        double best_amp = -1.0;
        double best_wl = 0.0;
        DriveConfig probe = d;
        probe.delta_s = delta_s;
        for (int i = 0; i <= 1000; ++i) {
            const double wl = omega_from_mhz(0.05 * std::pow(2000.0, i / 1000.0));
            probe.omega_l = wl;
            const double amp = beat_amplitude(atom, probe, spec);
            if (amp > best_amp) {
                best_amp = amp;
                best_wl = wl;
            }
        }
        CHECK(opt.omega_l == doctest::Approx(best_wl).epsilon(0.01));
        CHECK(opt.amplitude == doctest::Approx(best_amp).epsilon(1e-4));
    }

    SUBCASE("bracket choice does not move an interior optimum")
    {
        const LocalOptimum wide = optimize_local_mw(atom, d, spec, delta_s, Bracket{});
        const LocalOptimum narrow = optimize_local_mw(
            atom, d, spec, delta_s,
            Bracket{omega_from_mhz(0.2), omega_from_mhz(40.0)});
        CHECK(wide.omega_l == doctest::Approx(narrow.omega_l).epsilon(1e-3));
    }

    SUBCASE("edge maxima are refused")
    {
        const Bracket above{omega_from_mhz(50.0), omega_from_mhz(5000.0)};
        CHECK_THROWS_AS(optimize_local_mw(atom, d, spec, delta_s, above), NoInteriorMax);
        CHECK_THROWS_AS(optimize_local_mw(atom, d, spec, delta_s,
                                          Bracket{omega_from_mhz(1.0), omega_from_mhz(10.0)}),
                        ValidationError); // spans less than two decades
    }

    SUBCASE("peak response grows from the weakest to the strongest coupling row")
    {
        AtomSystem weak = AtomSystem::rb87(omega_from_mhz(1.31));
        DriveConfig weak_drive = d;
        weak_drive.omega_c = omega_from_mhz(4.15);
        const DopplerSpec weak_spec = DopplerSpec::for_atom(weak, 1024);
        const LocalOptimum weak_opt =
            optimize_local_mw(weak, weak_drive, weak_spec, delta_s, Bracket{});
        const LocalOptimum strong_opt = optimize_local_mw(atom, d, spec, delta_s, Bracket{});
        CHECK(strong_opt.amplitude > weak_opt.amplitude);
    }
}

TEST_CASE("response sweep")
{
    const AtomSystem atom = base_atom();
    const DopplerSpec cold = DopplerSpec::resonant_class(atom);
    DriveConfig d;
    d.omega_p = omega_from_mhz(5.53);
    d.omega_s = omega_from_mhz(0.01);
    const std::vector<double> grid = log_grid(omega_from_mhz(0.1), omega_from_mhz(25.0), 80);

    SUBCASE("a single-point sweep equals the direct curve")
    {
        const std::vector<SweepPoint> one{{omega_from_mhz(2.76), omega_from_mhz(17.12)}};
        const auto curves = sweep_response(atom, d, cold, one, grid);
        REQUIRE(curves.size() == 1);

        AtomSystem direct_atom = atom;
        direct_atom.dephasing = one[0].gamma;
        DriveConfig direct_drive = d;
        direct_drive.omega_c = one[0].omega_c;
        const LocalOptimum opt =
            optimize_local_mw(direct_atom, direct_drive, cold, kDefaultNormalizeAt, Bracket{});
        direct_drive.omega_l = opt.omega_l;
        const ResponseCurve direct = response_curve(direct_atom, direct_drive, cold, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(curves[0].points[i].amplitude ==
                  doctest::Approx(direct.points[i].amplitude).epsilon(1e-12));
        }
    }

    SUBCASE("larger relaxation flattens the band")
    {
        std::vector<SweepPoint> points;
        for (double g : {0.5, 1.0, 2.0, 4.0}) {
            points.push_back({omega_from_mhz(g), omega_from_mhz(20.0)});
        }
        const auto curves = sweep_response(atom, d, cold, points, grid);
        double previous_worst = 1e9;
        for (const ResponseCurve& curve : curves) {
            double worst = 0.0;
            for (const ResponsePoint& p : curve.points) {
                if (p.delta_s >= omega_from_mhz(0.2) && p.delta_s <= omega_from_mhz(20.0)) {
                    worst = std::max(worst, std::abs(20.0 * std::log10(p.amplitude)));
                }
            }
            CHECK(worst <= previous_worst + 1e-9);
            previous_worst = worst;
        }
    }
}

TEST_CASE("sensitivity estimate")
{
    ResponseCurve curve = normalized(
        make_curve({{omega_from_mhz(0.1), 1.0}, {omega_from_mhz(2.0), 0.5},
                    {omega_from_mhz(20.0), 0.1}}),
        omega_from_mhz(0.1));

    SUBCASE("unit slope, unit noise, flat response gives one")
    {
        ResponseCurve flat = normalized(
            make_curve({{omega_from_mhz(0.1), 1.0}, {omega_from_mhz(10.0), 1.0}}),
            omega_from_mhz(0.1));
        CHECK(estimate_sensitivity({1.0, 1.0, omega_from_mhz(1.0), flat}) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("halving the response doubles the sensitivity figure")
    {
        const double at_norm = estimate_sensitivity({2.0, 3.0, omega_from_mhz(0.1), curve});
        const double at_2mhz = estimate_sensitivity({2.0, 3.0, omega_from_mhz(2.0), curve});
        CHECK(at_2mhz == doctest::Approx(2.0 * at_norm).epsilon(1e-12));
    }

    SUBCASE("homogeneous in (noise, slope)")
    {
        const double base = estimate_sensitivity({2.0, 3.0, omega_from_mhz(2.0), curve});
        const double scaled = estimate_sensitivity({14.0, 21.0, omega_from_mhz(2.0), curve});
        CHECK(scaled == doctest::Approx(base).epsilon(1e-12));
    }

    SUBCASE("zero slope is rejected")
    {
        CHECK_THROWS_AS(estimate_sensitivity({0.0, 1.0, omega_from_mhz(1.0), curve}), ZeroSlope);
    }
}

TEST_CASE("linearity of the optical readout")
{
    const AtomSystem atom = AtomSystem::rb87(omega_from_mhz(2.76));
    const DopplerSpec cold = DopplerSpec::resonant_class(atom);
    DriveConfig d;
    d.omega_p = omega_from_mhz(5.53);
    d.omega_c = omega_from_mhz(17.12);
    d.omega_l = omega_from_mhz(7.54);
    d.omega_s = omega_from_mhz(1e-4); // Rabi frequency at unit power
    d.delta_s = omega_from_mhz(0.1);

    SUBCASE("first-order readout power is exactly linear over 30 dB")
    {
        std::vector<double> powers;
        for (int i = 0; i <= 10; ++i) {
            powers.push_back(std::pow(10.0, -1.5 + 3.0 * i / 10.0));
        }
        const double slope = linearity_check(atom, d, cold, powers);
        CHECK(slope == doctest::Approx(1.0).epsilon(1e-3));
    }

    SUBCASE("saturation bends the slope below one as Omega_S nears Omega_L")
    {
        DriveConfig hard = d;
        hard.omega_s = d.omega_l; // unit power drives Omega_S = Omega_L
        std::vector<double> powers;
        for (int i = 0; i <= 6; ++i) {
            powers.push_back(std::pow(10.0, -2.1 + 2.1 * i / 6.0));
        }
        const double slope = linearity_check(atom, hard, cold, powers, BeatModel::truncated, 6);
        CHECK(slope < 0.99);
        CHECK(slope > 0.5);
    }

    SUBCASE("insufficient sampling is rejected")
    {
        CHECK_THROWS_AS(linearity_check(atom, d, cold, std::vector<double>{1.0}),
                        InsufficientData);
        const std::vector<double> narrow{1.0, 1.5, 2.0, 2.5, 3.0};
        CHECK_THROWS_AS(linearity_check(atom, d, cold, narrow), InsufficientData);
    }
}
