#include "rydsuper/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rydsuper/calibration.hpp"
#include "rydsuper/errors.hpp"

namespace rydsuper {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted) {
            return line.substr(0, i);
        }
    }
    return line;
}

double parse_number(const std::string& text, const std::string& key, int line)
{
    const std::string t = trim(text);
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("key '" + key + "' is not a number: '" + t + "'", line);
    }
    return value;
}

ConfigEntry make_entry(const std::string& value, int line, const std::string& key)
{
    ConfigEntry entry;
    entry.line = line;
    std::string v = trim(value);
    if (v.empty()) {
        throw ConfigError("key '" + key + "' has an empty value", line);
    }
    if (v.front() == '[') {
        if (v.back() != ']') {
            throw ConfigError("unterminated array for key '" + key + "'", line);
        }
        entry.is_array = true;
        std::string body = v.substr(1, v.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) {
                entry.array.push_back(item);
            }
        }
        entry.raw = v;
        return entry;
    }
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw ConfigError("unterminated string for key '" + key + "'", line);
        }
        entry.is_string = true;
        entry.raw = v.substr(1, v.size() - 2);
        return entry;
    }
    for (char c : v) {
        if (c == '=' || std::isspace(static_cast<unsigned char>(c))) {
            throw ConfigError("bare value for key '" + key + "' contains '" +
                                  std::string(1, c) + "'; quote strings with \"...\"",
                              line);
        }
    }
    entry.raw = v;
    // bare words that are not numbers/booleans act as strings (file names etc.)
    entry.is_string = !(std::isdigit(static_cast<unsigned char>(v.front())) || v.front() == '-' ||
                        v.front() == '+' || v.front() == '.') &&
                      v != "true" && v != "false";
    return entry;
}

} // namespace

ConfigMap ConfigMap::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

ConfigMap ConfigMap::parse_text(const std::string& text, const std::string& origin)
{
    ConfigMap map;
    map.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::string body = trim(strip_comment(line));
        if (body.empty()) {
            continue;
        }
        if (body.front() == '[') {
            if (body.back() != ']') {
                throw ConfigError("malformed section header: " + body, line_no);
            }
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) {
                throw ConfigError("empty section name", line_no);
            }
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value': " + body, line_no);
        }
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("missing key before '='", line_no);
        }
        if (section.empty()) {
            throw ConfigError("key '" + key + "' appears before any [section]", line_no);
        }
        const std::string full = section + "." + key;
        if (map.entries_.count(full) > 0) {
            throw ConfigError("duplicate key '" + full + "'", line_no);
        }
        map.entries_[full] = make_entry(body.substr(eq + 1), line_no, full);
    }
    return map;
}

void ConfigMap::apply_override(const std::string& assignment)
{
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    }
    const std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos) {
        throw ConfigError("--set key must be section.key, got '" + key + "'");
    }
    entries_[key] = make_entry(assignment.substr(eq + 1), 0, key);
}

const ConfigEntry* ConfigMap::find(const std::string& key) const
{
    recognized_.insert(key);
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

double ConfigMap::get_number(const std::string& key, std::optional<double> fallback) const
{
    const ConfigEntry* entry = find(key);
    if (entry == nullptr) {
        if (!fallback) {
            throw ConfigError("missing required key '" + key + "'");
        }
        resolved_[key] = *fallback;
        return *fallback;
    }
    if (entry->is_array || entry->is_string) {
        throw ConfigError("key '" + key + "' must be a number", entry->line);
    }
    const double value = parse_number(entry->raw, key, entry->line);
    resolved_[key] = value;
    return value;
}

std::optional<double> ConfigMap::get_optional_number(const std::string& key) const
{
    if (find(key) == nullptr) {
        return std::nullopt;
    }
    return get_number(key);
}

bool ConfigMap::get_bool(const std::string& key, std::optional<bool> fallback) const
{
    const ConfigEntry* entry = find(key);
    if (entry == nullptr) {
        if (!fallback) {
            throw ConfigError("missing required key '" + key + "'");
        }
        resolved_[key] = *fallback;
        return *fallback;
    }
    if (entry->raw == "true") {
        resolved_[key] = true;
        return true;
    }
    if (entry->raw == "false") {
        resolved_[key] = false;
        return false;
    }
    throw ConfigError("key '" + key + "' must be true or false", entry->line);
}

std::string ConfigMap::get_string(const std::string& key,
                                  std::optional<std::string> fallback) const
{
    const ConfigEntry* entry = find(key);
    if (entry == nullptr) {
        if (!fallback) {
            throw ConfigError("missing required key '" + key + "'");
        }
        resolved_[key] = *fallback;
        return *fallback;
    }
    if (entry->is_array) {
        throw ConfigError("key '" + key + "' must be a string", entry->line);
    }
    resolved_[key] = entry->raw;
    return entry->raw;
}

std::vector<double> ConfigMap::get_number_array(const std::string& key) const
{
    const ConfigEntry* entry = find(key);
    if (entry == nullptr) {
        throw ConfigError("missing required key '" + key + "'");
    }
    if (!entry->is_array) {
        throw ConfigError("key '" + key + "' must be an array [a, b, ...]", entry->line);
    }
    std::vector<double> values;
    values.reserve(entry->array.size());
    for (const std::string& item : entry->array) {
        values.push_back(parse_number(item, key, entry->line));
    }
    resolved_[key] = values;
    return values;
}

void ConfigMap::reject_unknown_keys() const
{
    for (const auto& [key, entry] : entries_) {
        if (recognized_.count(key) == 0) {
            throw ConfigError("unknown key '" + key + "'", entry.line);
        }
    }
}

namespace {

// One-of rule: either <field>_rabi_mhz, or <field>_power_mw + <field>_waist_um.
Complex resolve_optical_field(const ConfigMap& config, const std::string& field,
                              double dipole_ea0)
{
    const std::string rabi_key = "drive." + field + "_rabi_mhz";
    const std::string power_key = "drive." + field + "_power_mw";
    const std::string waist_key = "drive." + field + "_waist_um";
    const bool has_rabi = config.has(rabi_key);
    const bool has_power = config.has(power_key) || config.has(waist_key);
    if (has_rabi && has_power) {
        throw ConfigError("give either " + rabi_key + " or " + power_key + " + " + waist_key +
                          ", not both");
    }
    if (has_rabi) {
        config.allow(power_key);
        config.allow(waist_key);
        return omega_from_mhz(config.get_number(rabi_key));
    }
    if (!has_power) {
        // field left unset; tasks that need it reject the zero downstream
        config.allow(rabi_key);
        config.allow(power_key);
        config.allow(waist_key);
        return Complex{0.0, 0.0};
    }
    if (!config.has(power_key) || !config.has(waist_key)) {
        throw ConfigError("field '" + field + "' needs " + rabi_key + " or both " + power_key +
                          " and " + waist_key);
    }
    config.allow(rabi_key);
    BeamGeometry beam;
    beam.power = config.get_number(power_key) * 1e-3;
    beam.waist = config.get_number(waist_key) * 1e-6;
    return rabi_from_power(beam, dipole_ea0);
}

} // namespace

ResolvedSetup resolve_setup(const ConfigMap& config)
{
    ResolvedSetup setup;

    AtomSystem& atom = setup.atom;
    atom.gamma2 = omega_from_mhz(config.get_number("atom.gamma2_mhz", 6.07));
    atom.gamma_r = omega_from_mhz(config.get_number("atom.gamma_r_mhz", 2.4e-3));
    atom.dephasing = omega_from_mhz(config.get_number("atom.dephasing_mhz", 0.0));
    atom.dipole_probe = config.get_number("atom.dipole_probe_ea0", 2.44);
    atom.dipole_coupling = config.get_number("atom.dipole_coupling_ea0", 0.012);
    atom.dipole_mw = config.get_number("atom.dipole_mw_ea0", 1640.184);
    atom.lambda_probe = config.get_number("atom.lambda_probe_nm", 780.0) * 1e-9;
    atom.lambda_coupling = config.get_number("atom.lambda_coupling_nm", 480.0) * 1e-9;
    atom.mass = config.get_number("atom.mass_kg", constants::rb87_mass);
    atom.temperature = config.get_number("atom.temperature_k", 293.0);
    atom.validate();

    DriveConfig& drive = setup.drive;
    drive.omega_p = resolve_optical_field(config, "probe", atom.dipole_probe);
    drive.omega_c = resolve_optical_field(config, "coupling", atom.dipole_coupling);

    const bool optimize_local = config.get_bool("drive.optimize_local", false);
    const std::optional<double> local = config.get_optional_number("drive.local_rabi_mhz");
    if (optimize_local && local) {
        throw ConfigError("give either drive.local_rabi_mhz or drive.optimize_local, not both");
    }
    setup.local_optimized = optimize_local;
    drive.omega_l = local ? omega_from_mhz(*local) : 0.0;
    drive.omega_s = omega_from_mhz(config.get_number("drive.signal_rabi_mhz", 0.0));
    drive.delta_p = omega_from_mhz(config.get_number("drive.delta_p_mhz", 0.0));
    drive.delta_c = omega_from_mhz(config.get_number("drive.delta_c_mhz", 0.0));
    drive.delta_l = omega_from_mhz(config.get_number("drive.delta_l_mhz", 0.0));
    drive.validate();

    setup.doppler_enabled = config.get_bool("doppler.enabled", true);
    const int nodes = static_cast<int>(config.get_number("doppler.nodes", 4096));
    const std::string rule = config.get_string("doppler.rule", "uniform");
    VelocityRule velocity_rule;
    if (rule == "uniform") {
        velocity_rule = VelocityRule::uniform;
    } else if (rule == "gauss-hermite") {
        velocity_rule = VelocityRule::gauss_hermite;
    } else {
        throw ConfigError("doppler.rule must be 'uniform' or 'gauss-hermite', got '" + rule + "'");
    }
    setup.doppler = setup.doppler_enabled ? DopplerSpec::for_atom(atom, nodes, velocity_rule)
                                          : DopplerSpec::resonant_class(atom);
    setup.doppler.validate();
    return setup;
}

} // namespace rydsuper
