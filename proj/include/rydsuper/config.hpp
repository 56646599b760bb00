#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rydsuper/doppler.hpp"
#include "rydsuper/types.hpp"

#include <json.hpp>

namespace rydsuper {

// One parsed `key = value` entry; values keep their source text until typed.
struct ConfigEntry {
    std::string raw;
    int line = 0;
    bool is_string = false;
    std::vector<std::string> array; // non-empty when the value was [a, b, ...]
    bool is_array = false;
};

// TOML-style sections of key/value pairs: `[section]` headers, `#` comments,
// numbers, quoted or bare strings, booleans, and flat arrays of numbers.
class ConfigMap {
  public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_text(const std::string& text, const std::string& origin = "<memory>");

    // `--set section.key=value` override; replaces or adds the entry.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    // Typed getters; each call records the resolved value for the echo and
    // marks the key as recognized. Defaults are recorded too.
    double get_number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
    bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
    std::string get_string(const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) const;
    std::vector<double> get_number_array(const std::string& key) const;
    std::optional<double> get_optional_number(const std::string& key) const;

    // Declares a key legal without requiring it (for echo completeness).
    void allow(const std::string& key) const { recognized_.insert(key); }

    // Throws ConfigError when the file holds keys no getter asked about.
    void reject_unknown_keys() const;

    const nlohmann::ordered_json& resolved() const { return resolved_; }

  private:
    const ConfigEntry* find(const std::string& key) const;
    std::map<std::string, ConfigEntry> entries_;
    std::string origin_;
    mutable std::set<std::string> recognized_;
    mutable nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

// Fully resolved physics inputs shared by every task.
struct ResolvedSetup {
    AtomSystem atom;
    DriveConfig drive;
    DopplerSpec doppler;
    bool doppler_enabled = true;
    bool local_optimized = false; // omega_l to be found by optimize_local_mw
};

// Reads [atom], [drive] and [doppler]; converts user units (MHz, mW, um, nm,
// K) to internal SI/angular units; enforces the one-of {rabi, power+waist}
// rule per optical field.
ResolvedSetup resolve_setup(const ConfigMap& config);

} // namespace rydsuper
