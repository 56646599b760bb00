#include "rydsuper/tasks.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rydsuper/calibration.hpp"
#include "rydsuper/config.hpp"
#include "rydsuper/errors.hpp"
#include "rydsuper/estimation.hpp"
#include "rydsuper/observables.hpp"
#include "rydsuper/oracle.hpp"

#include <json.hpp>

namespace rydsuper {

namespace {

using nlohmann::ordered_json;

std::string db_of(double amplitude)
{
    return format_double(20.0 * std::log10(amplitude));
}

// Everything a task computes; files are written only after the whole config
// has been read and validated.
struct Artifact {
    std::string text;            // primary file body when textual (CSV)
    ordered_json json;           // primary file body when JSON
    bool is_json = false;
    ordered_json derived = ordered_json::object(); // sidecar extras
    bool failed_check = false;   // oracle-style: artifact written, then exit 3
    std::string failure_message;
};

struct TaskContext {
    const ConfigMap& config;
    std::string output_path;
    std::string format; // csv | json
    std::uint64_t seed = 0;
    std::string command;
};

std::vector<double> task_grid(const ConfigMap& config, const std::string& min_key,
                              const std::string& max_key, const std::string& points_key,
                              double def_min, double def_max, int def_points)
{
    const double lo = config.get_number(min_key, def_min);
    const double hi = config.get_number(max_key, def_max);
    const int n = static_cast<int>(config.get_number(points_key, def_points));
    const std::string kind = config.get_string("task.grid", "log");
    if (!(hi > lo) || n < 2) {
        throw ConfigError("grid requires min < max and points >= 2");
    }
    std::vector<double> grid;
    if (kind == "log") {
        if (!(lo > 0.0)) {
            throw ConfigError("log grid requires " + min_key + " > 0");
        }
        grid = log_grid(omega_from_mhz(lo), omega_from_mhz(hi), n);
    } else if (kind == "linear") {
        grid.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            grid[static_cast<std::size_t>(i)] = omega_from_mhz(lo + (hi - lo) * i / (n - 1));
        }
    } else {
        throw ConfigError("task.grid must be 'log' or 'linear'");
    }
    return grid;
}

std::optional<DetectorModel> task_detector(const ConfigMap& config)
{
    const std::optional<double> f3db = config.get_optional_number("task.detector_f3db_mhz");
    if (!f3db) {
        return std::nullopt;
    }
    if (!(*f3db > 0.0)) {
        throw ConfigError("task.detector_f3db_mhz must be positive");
    }
    return DetectorModel{*f3db * 1e6};
}

Bracket task_bracket(const ConfigMap& config)
{
    Bracket bracket;
    bracket.lo = omega_from_mhz(config.get_number("task.bracket_lo_mhz", 0.05));
    bracket.hi = omega_from_mhz(config.get_number("task.bracket_hi_mhz", 100.0));
    return bracket;
}

void require_fields(const ResolvedSetup& setup, bool probe, bool coupling, bool signal)
{
    if (probe && std::abs(setup.drive.omega_p) == 0.0) {
        throw ConfigError("probe field required: set drive.probe_rabi_mhz or power + waist");
    }
    if (coupling && std::abs(setup.drive.omega_c) == 0.0) {
        throw ConfigError("coupling field required: set drive.coupling_rabi_mhz or power + waist");
    }
    if (signal && std::abs(setup.drive.omega_s) == 0.0) {
        throw ConfigError("signal field required: set drive.signal_rabi_mhz");
    }
}

void settle_local_mw(ResolvedSetup& setup, const ConfigMap& config, Artifact& artifact)
{
    const double optimize_at = omega_from_mhz(config.get_number("task.optimize_at_mhz", 0.1));
    if (setup.local_optimized) {
        const LocalOptimum opt = optimize_local_mw(setup.atom, setup.drive, setup.doppler,
                                                   optimize_at, task_bracket(config));
        setup.drive.omega_l = opt.omega_l;
        artifact.derived["omega_l_opt_mhz"] = mhz_from_omega(opt.omega_l);
    } else if (std::abs(setup.drive.omega_l) == 0.0) {
        throw ConfigError("set drive.local_rabi_mhz or drive.optimize_local = true");
    }
}

ResponseCurve task_response_curve(ResolvedSetup& setup, const ConfigMap& config,
                                  Artifact& artifact)
{
    require_fields(setup, true, true, true);
    settle_local_mw(setup, config, artifact);
    const std::vector<double> grid = task_grid(config, "task.deltas_min_mhz",
                                               "task.deltas_max_mhz", "task.deltas_points", 0.1,
                                               20.0, 200);
    const double normalize_at = omega_from_mhz(config.get_number("task.normalize_at_mhz", 0.1));
    return response_curve(setup.atom, setup.drive, setup.doppler, grid, task_detector(config),
                          normalize_at);
}

std::string curve_csv(const ResponseCurve& curve)
{
    std::string text = "frequency_Hz,amplitude,amplitude_dB\n";
    for (const ResponsePoint& p : curve.points) {
        text += format_double(hz_from_omega(p.delta_s));
        text += ',';
        text += format_double(p.amplitude);
        text += ',';
        text += db_of(p.amplitude);
        text += '\n';
    }
    return text;
}

ordered_json curve_json(const ResponseCurve& curve)
{
    ordered_json points = ordered_json::array();
    for (const ResponsePoint& p : curve.points) {
        ordered_json row;
        row["frequency_hz"] = hz_from_omega(p.delta_s);
        row["amplitude"] = p.amplitude;
        row["amplitude_db"] = 20.0 * std::log10(p.amplitude);
        points.push_back(row);
    }
    return points;
}

void require_json_format(const TaskContext& ctx)
{
    if (ctx.format != "json") {
        throw ConfigError("subcommand '" + ctx.command + "' emits JSON; use --format json");
    }
}

Artifact run_response(const TaskContext& ctx, ResolvedSetup setup)
{
    Artifact artifact;
    const ResponseCurve curve = task_response_curve(setup, ctx.config, artifact);
    if (ctx.format == "csv") {
        artifact.text = curve_csv(curve);
    } else {
        artifact.is_json = true;
        artifact.json["command"] = ctx.command;
        for (auto& [k, v] : artifact.derived.items()) {
            artifact.json[k] = v;
        }
        artifact.json["points"] = curve_json(curve);
    }
    return artifact;
}

Artifact run_bandwidth(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    Artifact artifact;
    artifact.is_json = true;
    const ResponseCurve curve = task_response_curve(setup, ctx.config, artifact);
    artifact.json["command"] = ctx.command;
    for (auto& [k, v] : artifact.derived.items()) {
        artifact.json[k] = v;
    }
    const std::optional<double> bw = bandwidth_minus3db(curve);
    artifact.json["bandwidth_hz"] = bw ? ordered_json(*bw) : ordered_json(nullptr);
    artifact.json["bandwidth_mhz"] = bw ? ordered_json(*bw / 1e6) : ordered_json(nullptr);
    const std::optional<GainPeak> peak = gain_peak(curve);
    artifact.json["gain_peak_hz"] = peak ? ordered_json(peak->frequency_hz) : ordered_json(nullptr);
    artifact.json["gain_peak_db"] = peak ? ordered_json(peak->gain_db) : ordered_json(nullptr);
    return artifact;
}

Artifact run_sidebands(const TaskContext& ctx, ResolvedSetup setup)
{
    Artifact artifact;
    require_fields(setup, true, true, true);
    settle_local_mw(setup, ctx.config, artifact);
    const std::vector<double> grid = task_grid(ctx.config, "task.deltas_min_mhz",
                                               "task.deltas_max_mhz", "task.deltas_points", 0.1,
                                               20.0, 200);
    std::string text = "frequency_Hz,plus_amplitude,minus_amplitude\n";
    ordered_json rows = ordered_json::array();
    DriveConfig drive = setup.drive;
    for (double ds : grid) {
        drive.delta_s = ds;
        const SidebandAmplitudes s = sideband_contributions(setup.atom, drive, setup.doppler);
        if (ctx.format == "csv") {
            text += format_double(hz_from_omega(ds));
            text += ',';
            text += format_double(s.plus);
            text += ',';
            text += format_double(s.minus);
            text += '\n';
        } else {
            ordered_json row;
            row["frequency_hz"] = hz_from_omega(ds);
            row["plus_amplitude"] = s.plus;
            row["minus_amplitude"] = s.minus;
            rows.push_back(row);
        }
    }
    if (ctx.format == "csv") {
        artifact.text = std::move(text);
    } else {
        artifact.is_json = true;
        artifact.json["command"] = ctx.command;
        artifact.json["points"] = rows;
    }
    return artifact;
}

Artifact run_eit(const TaskContext& ctx, ResolvedSetup setup)
{
    require_fields(setup, true, false, false);
    if (std::abs(setup.drive.omega_l) != 0.0 || std::abs(setup.drive.omega_s) != 0.0 ||
        setup.local_optimized) {
        throw ConfigError("eit requires the local and signal MWs off");
    }
    const std::vector<double> grid = task_grid(ctx.config, "task.deltac_min_mhz",
                                               "task.deltac_max_mhz", "task.deltac_points", -40.0,
                                               40.0, 201);
    const double od = ctx.config.get_number("task.od", 1.16);
    const double beta = beta_from_od(setup.atom, setup.doppler, od);
    const EITSpectrum spectrum = eit_spectrum(setup.atom, setup.drive, setup.doppler, grid, beta);

    Artifact artifact;
    artifact.derived["beta_rad_per_s"] = spectrum.beta;
    if (ctx.format == "csv") {
        std::string text = "delta_c_MHz,ln_transmission,transmission\n";
        for (const EITPoint& p : spectrum.points) {
            text += format_double(mhz_from_omega(p.delta_c));
            text += ',';
            text += format_double(p.ln_transmission);
            text += ',';
            text += format_double(std::exp(p.ln_transmission));
            text += '\n';
        }
        artifact.text = std::move(text);
    } else {
        artifact.is_json = true;
        artifact.json["command"] = ctx.command;
        artifact.json["beta_rad_per_s"] = spectrum.beta;
        artifact.json["od"] = spectrum.od;
        ordered_json rows = ordered_json::array();
        for (const EITPoint& p : spectrum.points) {
            ordered_json row;
            row["delta_c_mhz"] = mhz_from_omega(p.delta_c);
            row["ln_transmission"] = p.ln_transmission;
            rows.push_back(row);
        }
        artifact.json["points"] = rows;
    }
    return artifact;
}

std::vector<EITPoint> read_eit_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open fit input: " + path);
    }
    std::vector<EITPoint> data;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string a;
        std::string b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) {
            throw ConfigError("fit input needs two comma-separated columns", line_no);
        }
        double delta_c_mhz = 0.0;
        double ln_t = 0.0;
        const auto ra = std::from_chars(a.data(), a.data() + a.size(), delta_c_mhz);
        const auto rb = std::from_chars(b.data(), b.data() + b.size(), ln_t);
        if (ra.ec != std::errc{} || rb.ec != std::errc{}) {
            if (line_no == 1) {
                continue; // header row
            }
            throw ConfigError("fit input row is not numeric: " + line, line_no);
        }
        data.push_back({omega_from_mhz(delta_c_mhz), ln_t});
    }
    return data;
}

Artifact run_fit_eit(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    const std::string input = ctx.config.get_string("task.input_csv");
    const std::vector<EITPoint> data = read_eit_csv(input);

    FitGuess guess;
    guess.gamma = omega_from_mhz(ctx.config.get_number("task.guess_gamma_mhz", 2.0));
    // default: 70% of the peak Rabi frequency implied by the coupling beam
    const double default_wc = 0.7 * mhz_from_omega(std::abs(setup.drive.omega_c));
    guess.omega_c = omega_from_mhz(ctx.config.get_number("task.guess_omega_c_mhz", default_wc));
    const double guess_od = ctx.config.get_number("task.guess_od", 1.0);
    guess.scale = beta_from_od(setup.atom, setup.doppler, guess_od);

    const FitResult fit = fit_eit(data, setup.atom, setup.doppler, guess);

    Artifact artifact;
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    artifact.json["converged"] = fit.converged;
    artifact.json["iterations"] = fit.iterations;
    artifact.json["gamma_mhz"] = mhz_from_omega(fit.gamma);
    artifact.json["omega_c_mhz"] = mhz_from_omega(fit.omega_c);
    artifact.json["scale_rad_per_s"] = fit.scale;
    artifact.json["residual_norm"] = fit.residual_norm;
    artifact.json["gamma_std_error_mhz"] = mhz_from_omega(fit.std_errors[0]);
    artifact.json["omega_c_std_error_mhz"] = mhz_from_omega(fit.std_errors[1]);
    artifact.json["scale_std_error_rad_per_s"] = fit.std_errors[2];
    return artifact;
}

Artifact run_optimize_local(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    require_fields(setup, true, true, true);
    const double delta_s = omega_from_mhz(ctx.config.get_number("task.deltas_mhz", 0.1));
    const LocalOptimum opt = optimize_local_mw(setup.atom, setup.drive, setup.doppler, delta_s,
                                               task_bracket(ctx.config));
    Artifact artifact;
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    artifact.json["omega_l_opt_mhz"] = mhz_from_omega(opt.omega_l);
    artifact.json["peak_amplitude"] = opt.amplitude;
    return artifact;
}

Artifact run_sweep(const TaskContext& ctx, ResolvedSetup setup)
{
    if (ctx.format != "csv") {
        throw ConfigError("sweep emits CSV; use --format csv");
    }
    require_fields(setup, true, false, true);
    const std::vector<double> gammas = ctx.config.get_number_array("task.gammas_mhz");
    const std::vector<double> couplings = ctx.config.get_number_array("task.omega_cs_mhz");
    if (gammas.size() != couplings.size() || gammas.empty()) {
        throw ConfigError("task.gammas_mhz and task.omega_cs_mhz must be equal-length, non-empty");
    }
    std::vector<SweepPoint> points(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        points[i] = {omega_from_mhz(gammas[i]), omega_from_mhz(couplings[i])};
    }

    SweepOptions options;
    options.bracket = task_bracket(ctx.config);
    options.optimize_at = omega_from_mhz(ctx.config.get_number("task.optimize_at_mhz", 0.1));
    options.detector = task_detector(ctx.config);
    options.normalize_at = omega_from_mhz(ctx.config.get_number("task.normalize_at_mhz", 0.1));
    const std::vector<double> grid = task_grid(ctx.config, "task.deltas_min_mhz",
                                               "task.deltas_max_mhz", "task.deltas_points", 0.1,
                                               20.0, 200);

    const std::vector<ResponseCurve> curves =
        sweep_response(setup.atom, setup.drive, setup.doppler, points, grid, options);

    Artifact artifact;
    std::string text = "gamma_MHz,omega_c_MHz,frequency_Hz,amplitude,amplitude_dB\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (const ResponsePoint& p : curves[i].points) {
            text += format_double(gammas[i]);
            text += ',';
            text += format_double(couplings[i]);
            text += ',';
            text += format_double(hz_from_omega(p.delta_s));
            text += ',';
            text += format_double(p.amplitude);
            text += ',';
            text += db_of(p.amplitude);
            text += '\n';
        }
    }
    artifact.text = std::move(text);
    return artifact;
}

Artifact run_calibrate_at(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    std::vector<ATPoint> data;
    if (ctx.config.has("task.input_json")) {
        const std::string path = ctx.config.get_string("task.input_json");
        std::ifstream in(path);
        if (!in) {
            throw ValidationError("cannot open calibration input: " + path);
        }
        nlohmann::json payload;
        try {
            in >> payload;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("calibration input is not valid JSON: ") + e.what());
        }
        if (!payload.contains("points") || !payload["points"].is_array()) {
            throw ConfigError("calibration input needs a 'points' array");
        }
        for (const auto& row : payload["points"]) {
            data.push_back(
                {row.at("power_mw").get<double>(), row.at("splitting_mhz").get<double>() * 1e6});
        }
    } else {
        const std::vector<double> powers = ctx.config.get_number_array("task.powers_mw");
        const std::vector<double> splittings = ctx.config.get_number_array("task.splittings_mhz");
        if (powers.size() != splittings.size()) {
            throw ConfigError("task.powers_mw and task.splittings_mhz must be equal length");
        }
        for (std::size_t i = 0; i < powers.size(); ++i) {
            data.push_back({powers[i], splittings[i] * 1e6});
        }
    }
    const ATCalibration cal = fit_at_splitting(data, setup.atom.dipole_mw);

    Artifact artifact;
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    artifact.json["alpha_mhz_per_sqrt_mw"] = cal.alpha / 1e6;
    artifact.json["alpha_std_error_mhz_per_sqrt_mw"] = cal.alpha_std_error / 1e6;
    artifact.json["field_per_sqrt_power_v_per_m"] = cal.field_per_sqrt_power;
    artifact.json["field_per_sqrt_power_mv_per_cm"] = cal.field_per_sqrt_power * 10.0;
    return artifact;
}

Artifact run_rabi(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    require_fields(setup, true, false, false);
    Artifact artifact;
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    artifact.json["probe_rabi_mhz"] = mhz_from_omega(std::abs(setup.drive.omega_p));
    artifact.json["coupling_rabi_mhz"] = mhz_from_omega(std::abs(setup.drive.omega_c));
    if (std::abs(setup.drive.omega_l) > 0.0) {
        artifact.json["local_rabi_mhz"] = mhz_from_omega(std::abs(setup.drive.omega_l));
        artifact.json["local_field_v_per_m"] =
            field_from_rabi(std::abs(setup.drive.omega_l), setup.atom.dipole_mw);
    }
    if (std::abs(setup.drive.omega_s) > 0.0) {
        artifact.json["signal_rabi_mhz"] = mhz_from_omega(std::abs(setup.drive.omega_s));
        artifact.json["signal_field_v_per_m"] =
            field_from_rabi(std::abs(setup.drive.omega_s), setup.atom.dipole_mw);
    }
    return artifact;
}

Artifact run_sensitivity(const TaskContext& ctx, ResolvedSetup setup)
{
    require_json_format(ctx);
    Artifact artifact;
    SensitivityInput input;
    input.response_curve = task_response_curve(setup, ctx.config, artifact);
    input.response_slope = ctx.config.get_number("task.response_slope");
    input.noise_density = ctx.config.get_number("task.noise_density");
    input.delta_s = omega_from_mhz(ctx.config.get_number("task.deltas_mhz", 2.0));

    const double sensitivity = estimate_sensitivity(input);
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    for (auto& [k, v] : artifact.derived.items()) {
        artifact.json[k] = v;
    }
    artifact.json["sensitivity_v_per_m_sqrt_hz"] = sensitivity;
    artifact.json["normalized_response"] = input.response_curve.amplitude_at(input.delta_s);
    return artifact;
}

Artifact run_oracle(const TaskContext& ctx)
{
    require_json_format(ctx);
    OracleOptions options;
    options.points = static_cast<int>(ctx.config.get_number("task.points", 100));
    options.tol_triangle = ctx.config.get_number("task.tolerance", 1e-4);
    options.tol_order1 = ctx.config.get_number("task.tolerance_order1", 1e-9);
    options.truncation_order = static_cast<int>(ctx.config.get_number("task.order", 3));
    options.seed = ctx.seed;

    const OracleReport report = run_oracle_check(options);
    Artifact artifact;
    artifact.is_json = true;
    artifact.json["command"] = ctx.command;
    artifact.json["points"] = report.points;
    artifact.json["max_closed_vs_truncated"] = report.max_closed_vs_truncated;
    artifact.json["max_closed_vs_time_domain"] = report.max_closed_vs_time_domain;
    artifact.json["max_truncated_vs_time_domain"] = report.max_truncated_vs_time_domain;
    artifact.json["max_closed_vs_order1"] = report.max_closed_vs_order1;
    artifact.json["tolerance"] = options.tol_triangle;
    artifact.json["tolerance_order1"] = options.tol_order1;
    artifact.json["pass"] = report.pass();
    artifact.derived["elapsed_seconds"] = report.elapsed_seconds;
    if (!report.pass()) {
        artifact.failed_check = true;
        artifact.failure_message = "oracle deviation above tolerance; see " + ctx.output_path;
    }
    return artifact;
}

// Every key any subcommand understands. Typos are rejected; keys belonging to
// a different subcommand are tolerated so one experiment file can drive the
// whole family (response/bandwidth/sidebands, eit/fit-eit).
const std::vector<std::string>& known_config_keys()
{
    static const std::vector<std::string> keys = {
        "atom.gamma2_mhz", "atom.gamma_r_mhz", "atom.dephasing_mhz", "atom.dipole_probe_ea0",
        "atom.dipole_coupling_ea0", "atom.dipole_mw_ea0", "atom.lambda_probe_nm",
        "atom.lambda_coupling_nm", "atom.mass_kg", "atom.temperature_k",
        "drive.probe_rabi_mhz", "drive.probe_power_mw", "drive.probe_waist_um",
        "drive.coupling_rabi_mhz", "drive.coupling_power_mw", "drive.coupling_waist_um",
        "drive.local_rabi_mhz", "drive.optimize_local", "drive.signal_rabi_mhz",
        "drive.delta_p_mhz", "drive.delta_c_mhz", "drive.delta_l_mhz",
        "doppler.enabled", "doppler.nodes", "doppler.rule",
        "task.grid", "task.deltas_min_mhz", "task.deltas_max_mhz", "task.deltas_points",
        "task.deltac_min_mhz", "task.deltac_max_mhz", "task.deltac_points",
        "task.normalize_at_mhz", "task.optimize_at_mhz", "task.detector_f3db_mhz",
        "task.bracket_lo_mhz", "task.bracket_hi_mhz", "task.deltas_mhz", "task.od",
        "task.input_csv", "task.input_json", "task.guess_gamma_mhz", "task.guess_omega_c_mhz",
        "task.guess_od", "task.gammas_mhz", "task.omega_cs_mhz", "task.powers_mw",
        "task.splittings_mhz", "task.points", "task.tolerance", "task.tolerance_order1",
        "task.order", "task.seed", "task.response_slope", "task.noise_density",
        "output.path", "output.format"};
    return keys;
}

} // namespace

std::string format_double(double value)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

const std::vector<std::string>& known_subcommands()
{
    static const std::vector<std::string> commands = {
        "response", "bandwidth",    "sidebands", "eit",         "fit-eit", "optimize-local",
        "sweep",    "calibrate-at", "rabi",      "sensitivity", "oracle-check"};
    return commands;
}

void run_task(const TaskOptions& options)
{
    const auto start = std::chrono::steady_clock::now();

    ConfigMap config = options.config_path.empty() ? ConfigMap::parse_text("")
                                                   : ConfigMap::parse_file(options.config_path);
    for (const std::string& assignment : options.overrides) {
        config.apply_override(assignment);
    }

    const bool scalar_command =
        options.subcommand == "bandwidth" || options.subcommand == "fit-eit" ||
        options.subcommand == "optimize-local" || options.subcommand == "calibrate-at" ||
        options.subcommand == "rabi" || options.subcommand == "sensitivity" ||
        options.subcommand == "oracle-check";

    TaskContext ctx{config, "", "", 0, options.subcommand};
    const std::string default_ext = scalar_command ? ".json" : ".csv";
    const std::string cfg_format =
        config.get_string("output.format", scalar_command ? "json" : "csv");
    ctx.format = options.format ? *options.format : cfg_format;
    if (ctx.format != "csv" && ctx.format != "json") {
        throw ConfigError("output format must be 'csv' or 'json', got '" + ctx.format + "'");
    }
    const std::string cfg_path =
        config.get_string("output.path", options.subcommand + default_ext);
    ctx.output_path = options.output_path ? *options.output_path : cfg_path;
    ctx.seed = options.seed ? *options.seed
                            : static_cast<std::uint64_t>(config.get_number("task.seed", 20240001));

    Artifact artifact;
    if (options.subcommand == "oracle-check") {
        // solver-level check; the atom/drive sections do not apply
        artifact = run_oracle(ctx);
    } else {
        ResolvedSetup setup = resolve_setup(config);
        if (options.subcommand == "response") {
            artifact = run_response(ctx, std::move(setup));
        } else if (options.subcommand == "bandwidth") {
            artifact = run_bandwidth(ctx, std::move(setup));
        } else if (options.subcommand == "sidebands") {
            artifact = run_sidebands(ctx, std::move(setup));
        } else if (options.subcommand == "eit") {
            artifact = run_eit(ctx, std::move(setup));
        } else if (options.subcommand == "fit-eit") {
            artifact = run_fit_eit(ctx, std::move(setup));
        } else if (options.subcommand == "optimize-local") {
            artifact = run_optimize_local(ctx, std::move(setup));
        } else if (options.subcommand == "sweep") {
            artifact = run_sweep(ctx, std::move(setup));
        } else if (options.subcommand == "calibrate-at") {
            artifact = run_calibrate_at(ctx, std::move(setup));
        } else if (options.subcommand == "rabi") {
            artifact = run_rabi(ctx, std::move(setup));
        } else if (options.subcommand == "sensitivity") {
            artifact = run_sensitivity(ctx, std::move(setup));
        } else {
            throw ConfigError("unknown subcommand: " + options.subcommand);
        }
    }

    // typos abort before any file exists; keys of sibling subcommands pass
    for (const std::string& key : known_config_keys()) {
        config.allow(key);
    }
    config.reject_unknown_keys();

    {
        std::ofstream out(ctx.output_path, std::ios::binary);
        if (!out) {
            throw ValidationError("cannot open output file: " + ctx.output_path);
        }
        if (artifact.is_json) {
            out << artifact.json.dump(2) << "\n";
        } else {
            out << artifact.text;
        }
    }
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    ordered_json meta;
    meta["command"] = ctx.command;
    meta["output"] = ctx.output_path;
    meta["format"] = ctx.format;
    meta["seed"] = ctx.seed;
    meta["constants"] = constants::version;
    meta["derived"] = artifact.derived;
    meta["config"] = config.resolved();
    meta["elapsed_ms"] = elapsed_ms;
    std::ofstream side(ctx.output_path + ".meta.json", std::ios::binary);
    if (!side) {
        throw ValidationError("cannot open sidecar file: " + ctx.output_path + ".meta.json");
    }
    side << meta.dump(2) << "\n";
    side.close();

    if (artifact.failed_check) {
        throw NotConverged(artifact.failure_message);
    }
}

} // namespace rydsuper
